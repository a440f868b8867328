#include "commute/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commute/dataset.hpp"
#include "commute/drivecost.hpp"
#include "commute/frontier.hpp"
#include "commute/regress.hpp"
#include "commute/stats.hpp"
#include "commute/svg.hpp"

namespace commute::cli {

namespace {

using nlohmann::json;

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

dataset::CommunityTable load_input(const std::string& path) {
    if (path == "builtin") return dataset::builtin_table();
    return dataset::load_table_file(path);
}

std::string default_input() {
    if (const char* env = std::getenv("COMMUTE_INPUT")) return env;
    return "builtin";
}

std::vector<int> parse_years(const std::string& year) {
    if (year == "both") return {2011, 2016};
    if (year == "2011") return {2011};
    if (year == "2016") return {2016};
    throw ConfigError("year must be 2011, 2016 or both");
}

// Per-year drive-cost parameter overrides shared by several subcommands.
struct ParamOverrides {
    std::optional<double> fuel_price, fuel_economy, insurance, licence, finance,
        maintenance_rate, tire_rate, dep_flat, dep_rate, dep_threshold_km;
    std::optional<std::string> params_file;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--fuel-price", fuel_price, "Override fuel price, $/litre");
        cmd->add_option("--fuel-economy", fuel_economy, "Override fuel economy, l/100km");
        cmd->add_option("--insurance", insurance, "Override annual insurance, $");
        cmd->add_option("--licence", licence, "Override annual licence, $");
        cmd->add_option("--finance", finance, "Override annual finance, $");
        cmd->add_option("--maintenance-rate", maintenance_rate, "Override maintenance, $/km");
        cmd->add_option("--tire-rate", tire_rate, "Override tire rate, $/km");
        cmd->add_option("--dep-flat", dep_flat, "Override flat depreciation, $/year");
        cmd->add_option("--dep-rate", dep_rate, "Override depreciation, $/km");
        cmd->add_option("--dep-threshold", dep_threshold_km, "Override depreciation threshold, km/year");
        cmd->add_option("--params", params_file, "JSON parameter file keyed by year label");
    }

    drivecost::DrivingCostParams resolve(int year) const {
        drivecost::DrivingCostParams p;
        if (params_file) {
            std::ifstream f(*params_file);
            if (!f) throw ConfigError("cannot open params file '" + *params_file + "'");
            json j = json::parse(f);
            std::string key = std::to_string(year);
            if (!j.contains(key)) throw ConfigError("params file lacks year '" + key + "'");
            p = j.at(key).get<drivecost::DrivingCostParams>();
        } else {
            p = drivecost::params_for_year(year);
        }
        auto apply = [](double& dst, const std::optional<double>& v) {
            if (v) dst = *v;
        };
        apply(p.fuel_price, fuel_price);
        apply(p.fuel_economy, fuel_economy);
        apply(p.insurance, insurance);
        apply(p.licence, licence);
        apply(p.finance, finance);
        apply(p.maintenance_rate, maintenance_rate);
        apply(p.tire_rate, tire_rate);
        apply(p.dep_flat, dep_flat);
        apply(p.dep_rate, dep_rate);
        apply(p.dep_threshold_km, dep_threshold_km);
        return p;
    }
};

std::vector<regress::FitPoint> column_points(const dataset::CommunityTable& table,
                                             const std::string& response) {
    std::vector<regress::FitPoint> pts;
    for (const auto& rec : table.records) {
        auto y = dataset::field_value(rec, response);
        if (y) pts.push_back({rec.distance_km, *y});
    }
    return pts;
}

frontier::TotalCostCurve build_curve(const dataset::CommunityTable& table, int year, int degree,
                                     const ParamOverrides& overrides) {
    frontier::TotalCostCurve curve = frontier::make_year_curve(table, year, degree);
    // Explicit overrides (including a tire rate) replace the calibrated set.
    drivecost::DrivingCostParams p = overrides.resolve(year);
    if (!overrides.tire_rate && !overrides.params_file) p.tire_rate = curve.drive_params.tire_rate;
    curve.drive_params = p;
    return curve;
}

int cmd_validate(const std::string& input, const std::string& output, std::ostream& out) {
    dataset::CommunityTable table = load_input(input);
    auto report = dataset::validate_table(table);
    if (output == "json")
        out << dataset::report_json(report).dump(2) << '\n';
    else
        out << dataset::report_text(report);
    return report.ok() ? 0 : 1;
}

int cmd_calibrate(const std::string& input, const std::string& year, const std::string& output,
                  std::ostream& out) {
    auto table = load_input(input);
    json j;
    std::ostringstream text;
    for (int y : parse_years(year)) {
        auto params = drivecost::params_for_year(y);
        double rate = drivecost::calibrate_tire_rate(table, params, y);
        j[std::to_string(y)] = rate;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "tire rate %d: %.10f $/km\n", y, rate);
        text << buf;
    }
    out << (output == "json" ? j.dump(2) + "\n" : text.str());
    return 0;
}

int cmd_drive_cost(double d, const std::string& year, const ParamOverrides& overrides,
                   const std::string& output, std::ostream& out) {
    json j;
    std::ostringstream text;
    for (int y : parse_years(year)) {
        auto params = overrides.resolve(y);
        auto b = drivecost::annual_driving_cost(d, params);
        j[std::to_string(y)] = drivecost::breakdown_json(b);
        text << y << " driving cost at " << fmt2(d) << " km one-way (" << fmt2(b.annual_km)
             << " km/year)\n"
             << "  gas          " << fmt2(b.gas) << '\n'
             << "  insurance    " << fmt2(b.insurance) << '\n'
             << "  licence      " << fmt2(b.licence) << '\n'
             << "  depreciation " << fmt2(b.depreciation) << '\n'
             << "  finance      " << fmt2(b.finance) << '\n'
             << "  maintenance  " << fmt2(b.maintenance) << '\n'
             << "  tires        " << fmt2(b.tires) << '\n'
             << "  total annual " << fmt2(b.total_annual) << "  monthly " << fmt2(b.total_monthly)
             << '\n';
    }
    out << (output == "json" ? j.dump(2) + "\n" : text.str());
    return 0;
}

int cmd_fit(const std::string& input, const std::string& response, int degree,
            const std::string& output, std::ostream& out) {
    auto table = load_input(input);
    auto pts = column_points(table, response);
    auto model = regress::fit_polynomial(pts, degree);
    if (output == "json") {
        json j = regress::model_json(model);
        j["response"] = response;
        out << j.dump(2) << '\n';
    } else {
        out << response << " ~ distance_km (n = " << model.n << ")\n"
            << regress::model_text(model);
    }
    return 0;
}

int cmd_diagnose(const std::string& input, const std::string& coords_path,
                 const std::string& weights_spec, int permutations, std::uint64_t seed,
                 const std::string& output, std::ostream& out) {
    auto table = load_input(input);
    static const std::vector<std::string> kColumns = {
        "income_2011", "income_2016", "shelter_2011", "shelter_2016", "drive_2011",
        "drive_2016",  "total_2011",  "total_2016",   "pct_2011",     "pct_2016"};

    // Optional coordinates: CSV name,x_km,y_km matched to the table by name.
    std::optional<stats::WeightsMatrix> weights;
    if (!coords_path.empty()) {
        std::ifstream f(coords_path);
        if (!f) throw ConfigError("cannot open coords file '" + coords_path + "'");
        std::map<std::string, std::pair<double, double>> by_name;
        std::string line;
        std::getline(f, line); // header
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string name, xs, ys;
            std::getline(ls, name, ',');
            std::getline(ls, xs, ',');
            std::getline(ls, ys, ',');
            by_name[name] = {std::stod(xs), std::stod(ys)};
        }
        std::vector<std::pair<double, double>> coords;
        for (const auto& rec : table.records) {
            auto it = by_name.find(rec.name);
            if (it == by_name.end())
                throw ConfigError("coords file lacks community '" + rec.name + "'");
            coords.push_back(it->second);
        }
        weights = stats::build_weights(coords, weights_spec);
    }

    json j;
    std::ostringstream text;
    text << "Variable\tRyan-Joiner (p)";
    if (weights) text << "\tMoran's I (p)";
    text << '\n';
    for (const auto& col : kColumns) {
        std::vector<double> values;
        for (const auto& rec : table.records)
            if (auto v = dataset::field_value(rec, col)) values.push_back(*v);
        if (values.size() < 4) continue;
        auto rj = stats::ryan_joiner(values);
        json jc = {{"ryan_joiner", stats::diagnostic_json(rj)}};
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f (%s)", rj.statistic, rj.detail.c_str());
        text << col << '\t' << buf;
        if (weights && static_cast<int>(values.size()) == weights->n) {
            auto mi = stats::morans_i(values, *weights, permutations, seed);
            jc["morans_i"] = stats::diagnostic_json(mi);
            std::snprintf(buf, sizeof(buf), "%.4f (%.3f)", mi.statistic, mi.p_value);
            text << '\t' << buf;
        }
        text << '\n';
        j[col] = jc;
    }
    out << (output == "json" ? j.dump(2) + "\n" : text.str());
    return 0;
}

int cmd_frontier(const std::string& input, double income, double p, const std::string& year,
                 int degree, frontier::Window window, const ParamOverrides& overrides,
                 const std::string& output, std::ostream& out) {
    auto table = load_input(input);
    json j;
    std::ostringstream text;
    for (int y : parse_years(year)) {
        auto curve = build_curve(table, y, degree, overrides);
        frontier::BudgetConstraint budget{p, income};
        auto zone = frontier::feasibility_zone(curve, budget, window);
        j[std::to_string(y)] = frontier::zone_json(zone, curve, budget);
        text << y << ": " << frontier::verdict_name(zone.verdict) << " at p = " << fmt2(p)
             << ", income = " << fmt2(income) << " (level " << fmt2(budget.level_monthly())
             << "/mo)\n";
        if (zone.d1) text << "  d1 (shelter boundary)      " << fmt2(*zone.d1) << " km\n";
        if (zone.feasible_from)
            text << "  feasible from (total cost) " << fmt2(*zone.feasible_from) << " km\n";
        if (zone.d2) text << "  d2 (outer boundary)        " << fmt2(*zone.d2) << " km\n";
        if (zone.indifference_d)
            text << "  indifference distance      " << fmt2(*zone.indifference_d) << " km\n";
        if (zone.extrapolated) text << "  note: a boundary lies outside the fitted domain\n";
    }
    out << (output == "json" ? j.dump(2) + "\n" : text.str());
    return 0;
}

int cmd_limits(const std::string& input, std::vector<double> incomes, std::vector<double> ps,
               const std::string& year, int degree, frontier::Window window,
               const ParamOverrides& overrides, const std::string& output, std::ostream& out) {
    auto table = load_input(input);
    std::map<int, frontier::TotalCostCurve> curves;
    for (int y : parse_years(year)) curves.emplace(y, build_curve(table, y, degree, overrides));
    auto limits = frontier::commuting_limits(curves, incomes, ps, window);
    out << (output == "json" ? frontier::limits_json(limits).dump(2) + "\n"
                             : frontier::limits_text(limits));
    return 0;
}

int cmd_compare_years(const std::string& input, double income, double p, int degree,
                      frontier::Window window, const ParamOverrides& overrides,
                      const std::string& output, std::ostream& out) {
    auto table = load_input(input);
    struct YearFacts {
        double shelter_constant, shelter_slope, tire_rate, total_at_lo;
        std::optional<double> d2, indifference;
    };
    std::map<int, YearFacts> facts;
    for (int y : {2011, 2016}) {
        auto curve = build_curve(table, y, degree, overrides);
        auto zone = frontier::feasibility_zone(curve, frontier::BudgetConstraint{p, income}, window);
        facts[y] = {curve.shelter.coefficients[0], curve.shelter.coefficients[1],
                    curve.drive_params.tire_rate, frontier::total_cost(curve, window.lo),
                    zone.d2, zone.indifference_d};
    }
    auto delta_opt = [](std::optional<double> a, std::optional<double> b) -> json {
        if (a && b) return *b - *a;
        return nullptr;
    };
    json j = {{"p", p}, {"income", income}};
    std::ostringstream text;
    auto row = [&](const std::string& key, std::optional<double> v11, std::optional<double> v16) {
        j[key] = {{"y2011", v11 ? json(*v11) : json(nullptr)},
                  {"y2016", v16 ? json(*v16) : json(nullptr)},
                  {"delta", delta_opt(v11, v16)}};
        text << key << '\t' << (v11 ? fmt2(*v11) : "*") << '\t' << (v16 ? fmt2(*v16) : "*") << '\t'
             << (v11 && v16 ? fmt2(*v16 - *v11) : "-") << '\n';
    };
    text << "quantity\t2011\t2016\tdelta\n";
    row("shelter_constant", facts[2011].shelter_constant, facts[2016].shelter_constant);
    row("shelter_slope", facts[2011].shelter_slope, facts[2016].shelter_slope);
    row("tire_rate", facts[2011].tire_rate, facts[2016].tire_rate);
    row("total_cost_at_window_lo", facts[2011].total_at_lo, facts[2016].total_at_lo);
    row("outer_boundary_d2", facts[2011].d2, facts[2016].d2);
    row("indifference_km", facts[2011].indifference, facts[2016].indifference);
    out << (output == "json" ? j.dump(2) + "\n" : text.str());
    return 0;
}

int cmd_plot(const std::string& input, const std::string& figure, double income, int degree,
             frontier::Window window, const ParamOverrides& overrides, const std::string& out_path,
             const std::string& series_out, std::ostream& out) {
    auto table = load_input(input);
    std::vector<svg::Series> series;
    std::vector<svg::Guide> guides;
    std::vector<svg::Annotation> annotations;
    svg::PlotSpec spec;
    spec.x_label = "distance from core, km";

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    int ci = 0;
    auto sample = [&](const std::function<double(double)>& f) {
        std::vector<std::pair<double, double>> pts;
        for (double d = window.lo; d <= window.hi + 1e-9; d += 1.0)
            pts.push_back({d, f(std::min(d, window.hi))});
        return pts;
    };

    if (figure == "costs") {
        spec.title = "Shelter, driving and total cost vs distance";
        spec.y_label = "$ / month";
        for (int y : {2011, 2016}) {
            auto curve = build_curve(table, y, degree, overrides);
            auto shelter = [&](double d) { return regress::predict(curve.shelter, d).value; };
            auto drive = [&](double d) {
                return drivecost::monthly_driving_cost(d, curve.drive_params);
            };
            auto total = [&](double d) { return frontier::total_cost(curve, d); };
            series.push_back({"shelter " + std::to_string(y), sample(shelter),
                              kColors[ci % 6], y == 2016});
            ++ci;
            series.push_back({"driving " + std::to_string(y), sample(drive), kColors[ci % 6],
                              y == 2016});
            ++ci;
            series.push_back({"total " + std::to_string(y), sample(total), kColors[ci % 6],
                              y == 2016});
            ++ci;
            frontier::BudgetConstraint tds{0.42, income};
            auto zone = frontier::feasibility_zone(curve, tds, window);
            if (zone.d2 && zone.verdict == frontier::Verdict::FeasibleBand)
                annotations.push_back({"d2 " + std::to_string(y) + " @42%",
                                       *zone.d2, frontier::total_cost(curve, *zone.d2)});
        }
        for (double p : frontier::kBudgetPresets) {
            char lab[48];
            std::snprintf(lab, sizeof(lab), "%.0f%% of $%.0f", p * 100, income);
            guides.push_back({lab, p * income / 12.0});
        }
    } else if (figure == "percent") {
        spec.title = "Shelter + driving share of household income vs distance";
        spec.y_label = "% of income";
        for (int y : {2011, 2016}) {
            auto pts = column_points(table, y == 2011 ? "pct_2011" : "pct_2016");
            auto model = regress::fit_polynomial(pts, degree);
            auto f = [&](double d) { return regress::predict(model, d).value; };
            series.push_back({"share " + std::to_string(y), sample(f), kColors[ci % 6],
                              y == 2016});
            ++ci;
        }
        for (double p : frontier::kBudgetPresets) {
            char lab[32];
            std::snprintf(lab, sizeof(lab), "%.0f%% guideline", p * 100);
            guides.push_back({lab, p * 100});
        }
    } else {
        throw ConfigError("figure must be 'costs' or 'percent'");
    }

    std::string doc = svg::render_plot(series, guides, annotations, spec);
    if (out_path.empty() || out_path == "-") {
        out << doc;
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + out_path + "'");
        f << doc;
    }
    if (!series_out.empty()) {
        std::ofstream f(series_out, std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + series_out + "'");
        f << svg::series_csv(series);
    }
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Income-constrained commuting distance model"};
    app.require_subcommand(1);

    std::string input = default_input();
    app.add_option("--input", input, "Input CSV path or 'builtin'")->capture_default_str();
    std::string output = "text";
    app.add_option("--output", output, "Output format: text or json")
        ->check(CLI::IsMember({"text", "json"}));

    std::string year = "both";
    int degree = 3;
    double income = 60000.0;
    double p = 0.42;
    std::vector<double> incomes = {30000, 40000, 50000, 60000};
    std::vector<double> ps = {0.42, 0.45};
    frontier::Window window{10.0, 156.0};
    double d = 10.0;
    std::uint64_t seed = 1;
    int permutations = 999;
    std::string coords_path, weights_spec = "knn:4", figure = "costs";
    std::string out_path, series_out, response = "shelter_2011";
    ParamOverrides overrides;

    auto add_window = [&](CLI::App* cmd) {
        cmd->add_option("--window-lo", window.lo, "Window lower bound, km");
        cmd->add_option("--window-hi", window.hi, "Window upper bound, km");
    };

    auto* validate = app.add_subcommand("validate", "Load a table and report every violation");

    auto* calibrate = app.add_subcommand("calibrate", "Fit the tire rate to observed costs");
    calibrate->add_option("--year", year, "2011, 2016 or both");

    auto* drive = app.add_subcommand("drive-cost", "Cost breakdown at a distance");
    drive->add_option("--d", d, "One-way distance, km")->required();
    drive->add_option("--year", year, "2011, 2016 or both");
    overrides.add_flags(drive);

    auto* fit = app.add_subcommand("fit", "Fit a polynomial cost curve");
    fit->add_option("--response", response, "Column to regress on distance")->required();
    fit->add_option("--degree", degree, "Polynomial degree 1-3")->check(CLI::Range(1, 3));

    auto* diagnose = app.add_subcommand("diagnose", "Normality and spatial diagnostics");
    diagnose->add_option("--coords", coords_path, "CSV name,x_km,y_km for Moran's I");
    diagnose->add_option("--weights", weights_spec, "Weights spec (knn:K, inverse-distance:band=B)");
    diagnose->add_option("--permutations", permutations, "Permutation count");
    diagnose->add_option("--seed", seed, "Permutation seed");

    auto* front = app.add_subcommand("frontier", "Feasibility zone for one budget");
    front->add_option("--income", income, "After-tax income, $/year")->required();
    front->add_option("--p", p, "Allocation fraction")->required();
    front->add_option("--year", year, "2011, 2016 or both");
    front->add_option("--degree", degree, "Shelter curve degree")->check(CLI::Range(1, 3));
    add_window(front);
    overrides.add_flags(front);

    auto* limits = app.add_subcommand("limits", "Commuting-limit table over incomes and fractions");
    limits->add_option("--income", incomes, "Income list, $/year")->delimiter(',');
    limits->add_option("--p", ps, "Allocation fraction list")->delimiter(',');
    limits->add_option("--year", year, "2011, 2016 or both");
    limits->add_option("--degree", degree, "Shelter curve degree")->check(CLI::Range(1, 3));
    add_window(limits);
    overrides.add_flags(limits);

    auto* compare = app.add_subcommand("compare-years", "2011 vs 2016 with signed deltas");
    compare->add_option("--income", income, "After-tax income, $/year");
    compare->add_option("--p", p, "Allocation fraction");
    compare->add_option("--degree", degree, "Shelter curve degree")->check(CLI::Range(1, 3));
    add_window(compare);
    overrides.add_flags(compare);

    auto* plot = app.add_subcommand("plot", "Static SVG chart of cost or percent curves");
    plot->add_option("--figure", figure, "'costs' or 'percent'");
    plot->add_option("--income", income, "Income for the guideline lines");
    plot->add_option("--degree", degree, "Curve degree")->check(CLI::Range(1, 3));
    plot->add_option("--out", out_path, "Output SVG path ('-' = stdout)");
    plot->add_option("--series-out", series_out, "Also write the series as CSV");
    add_window(plot);
    overrides.add_flags(plot);

    std::vector<std::string> argv_copy(args);
    try {
        std::vector<const char*> argv;
        argv.push_back("commute");
        for (const auto& a : argv_copy) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(input, output, out);
        if (calibrate->parsed()) return cmd_calibrate(input, year, output, out);
        if (drive->parsed()) return cmd_drive_cost(d, year, overrides, output, out);
        if (fit->parsed()) return cmd_fit(input, response, degree, output, out);
        if (diagnose->parsed())
            return cmd_diagnose(input, coords_path, weights_spec, permutations, seed, output, out);
        if (front->parsed())
            return cmd_frontier(input, income, p, year, degree, window, overrides, output, out);
        if (limits->parsed())
            return cmd_limits(input, incomes, ps, year, degree, window, overrides, output, out);
        if (compare->parsed())
            return cmd_compare_years(input, income, p, degree, window, overrides, output, out);
        if (plot->parsed())
            return cmd_plot(input, figure, income, degree, window, overrides, out_path, series_out,
                            out);
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << "usage error: no subcommand\n";
    return 2;
}

} // namespace commute::cli
