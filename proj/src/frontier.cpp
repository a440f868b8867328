#include "commute/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace commute::frontier {

namespace {

constexpr double kBisectTol = 0.01; // km
constexpr double kFeasTol = 1e-9;

// Refine a sign change of f - level inside [lo, hi] to kBisectTol.
double bisect(const std::function<double(double)>& f, double level, double lo, double hi) {
    double flo = f(lo) - level;
    while (hi - lo > kBisectTol) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid) - level;
        if (fm == 0.0) return mid;
        if ((flo < 0) != (fm < 0)) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::vector<regress::FitPoint> year_points(const dataset::CommunityTable& table, int year) {
    std::vector<regress::FitPoint> pts;
    for (const auto& r : table.records)
        pts.push_back({r.distance_km, year == 2011 ? r.shelter_2011 : r.shelter_2016});
    return pts;
}

} // namespace

double total_cost(const TotalCostCurve& curve, double d) {
    if (d < 0) throw std::domain_error("total_cost: d must be >= 0");
    if (d > kHardMaxKm)
        throw std::domain_error("total_cost: d beyond hard evaluation limit of 250 km");
    return regress::predict(curve.shelter, d).value +
           drivecost::monthly_driving_cost(d, curve.drive_params) + curve.second_mode_monthly +
           curve.parking_monthly;
}

bool is_extrapolated(const TotalCostCurve& curve, double d) {
    return d < curve.domain_lo || d > curve.domain_hi;
}

std::vector<double> crossings(const std::function<double(double)>& f, double level,
                              Window window, double grid_step) {
    if (!(window.lo < window.hi)) throw std::domain_error("crossings: window lo must be < hi");
    if (!(grid_step > 0)) throw std::domain_error("crossings: grid_step must be > 0");

    auto eval = [&](double d) {
        double v = f(d);
        if (!std::isfinite(v))
            throw std::runtime_error("crossings: non-finite evaluation at d = " + fmt2(d));
        return v;
    };

    std::vector<double> roots;
    double prev_x = window.lo;
    double prev = eval(prev_x) - level;
    if (prev == 0.0) roots.push_back(prev_x); // exact touch at a grid node
    for (double x = window.lo + grid_step; prev_x < window.hi;
         x = std::min(x + grid_step, window.hi)) {
        x = std::min(x, window.hi);
        double cur = eval(x) - level;
        if (cur == 0.0) {
            roots.push_back(x);
        } else if ((prev < 0) != (cur < 0) && prev != 0.0) {
            roots.push_back(bisect(f, level, prev_x, x));
        }
        if (x >= window.hi) break;
        prev_x = x;
        prev = cur;
    }
    return roots;
}

FeasibilityZone feasibility_zone(const TotalCostCurve& curve, const BudgetConstraint& budget,
                                 Window window) {
    if (!(window.lo < window.hi) || window.lo < 0 || window.hi > kHardMaxKm)
        throw std::domain_error("feasibility_zone: invalid window");
    if (!(budget.p > 0 && budget.p < 1) || !(budget.income_annual > 0))
        throw std::domain_error("feasibility_zone: invalid budget");

    const double level = budget.level_monthly();
    FeasibilityZone zone;

    // Inner boundary: shelter cost alone falling to the budget level.
    auto shelter_f = [&](double d) { return regress::predict(curve.shelter, d).value; };
    auto shelter_roots = crossings(shelter_f, level, window);
    if (!shelter_roots.empty() && shelter_f(window.lo) > level) zone.d1 = shelter_roots.front();

    // Outer boundary and feasible span from the total-cost curve.
    auto total_f = [&](double d) { return total_cost(curve, d); };
    auto total_roots = crossings(total_f, level, window);

    const bool lo_feasible = total_f(window.lo) <= level + kFeasTol;
    const bool hi_feasible = total_f(window.hi) <= level + kFeasTol;

    if (total_roots.empty()) {
        zone.verdict = lo_feasible ? Verdict::FeasibleEverywhereInDomain
                                   : Verdict::InfeasibleEverywhere;
        if (lo_feasible) {
            zone.feasible_from = window.lo;
            zone.d2 = window.hi;
        }
    } else {
        // Segment the window at the roots and test each segment at its
        // midpoint; the roots themselves are only located to the 0.01 km
        // bisection tolerance, so testing on them is unreliable. A pure
        // grazing contact leaves every segment infeasible.
        std::vector<double> breaks;
        breaks.push_back(window.lo);
        for (double r : total_roots) breaks.push_back(std::clamp(r, window.lo, window.hi));
        breaks.push_back(window.hi);
        std::optional<double> first_lo, last_hi;
        for (size_t i = 0; i + 1 < breaks.size(); ++i) {
            double mid = 0.5 * (breaks[i] + breaks[i + 1]);
            if (total_f(mid) <= level + kFeasTol) {
                if (!first_lo) first_lo = breaks[i];
                last_hi = breaks[i + 1];
            }
        }
        if (!first_lo) {
            zone.verdict = Verdict::InfeasibleEverywhere;
        } else {
            zone.verdict = Verdict::FeasibleBand;
            zone.feasible_from = first_lo;
            zone.d2 = last_hi;
        }
    }

    zone.indifference_d = indifference_distance(curve, window);
    for (const auto& b : {zone.d1, zone.d2, zone.feasible_from})
        if (b && is_extrapolated(curve, *b)) zone.extrapolated = true;
    return zone;
}

std::optional<double> indifference_distance(const TotalCostCurve& curve, Window window) {
    auto f = [&](double d) {
        return regress::predict(curve.shelter, d).value -
               drivecost::monthly_driving_cost(d, curve.drive_params);
    };
    auto roots = crossings(f, 0.0, window);
    if (roots.empty()) return std::nullopt;
    return roots.front();
}

double affordability_share(const TotalCostCurve& curve, double d, double income_annual) {
    if (!(income_annual > 0)) throw std::domain_error("income must be > 0");
    return 12.0 * total_cost(curve, d) / income_annual;
}

double required_income(const TotalCostCurve& curve, double d, double p) {
    if (!(p > 0 && p < 1)) throw std::domain_error("p must lie in (0,1)");
    return 12.0 * total_cost(curve, d) / p;
}

LimitsTable commuting_limits(const std::map<int, TotalCostCurve>& curves,
                             const std::vector<double>& incomes, const std::vector<double>& ps,
                             Window window) {
    if (incomes.empty() || ps.empty())
        throw std::domain_error("commuting_limits: incomes and ps must be nonempty");
    LimitsTable t;
    t.incomes = incomes;
    t.ps = ps;
    for (const auto& [year, curve] : curves) t.years.push_back(year);

    for (double p : ps)
        for (const auto& [year, curve] : curves)
            for (double income : incomes) {
                FeasibilityZone z = feasibility_zone(curve, BudgetConstraint{p, income}, window);
                LimitsCell cell;
                cell.year = year;
                cell.income = income;
                cell.p = p;
                if (z.verdict != Verdict::InfeasibleEverywhere) {
                    cell.d2 = z.d2;
                    cell.extrapolated = z.d2 && is_extrapolated(curve, *z.d2);
                }
                t.cells.push_back(cell);
            }
    return t;
}

TotalCostCurve make_year_curve(const dataset::CommunityTable& table, int year, int degree) {
    TotalCostCurve curve;
    auto pts = year_points(table, year);
    curve.shelter = regress::fit_polynomial(pts, degree);
    curve.drive_params = drivecost::params_for_year(year);
    curve.drive_params.tire_rate = drivecost::calibrate_tire_rate(table, curve.drive_params, year);
    curve.domain_lo = curve.shelter.x_min;
    curve.domain_hi = std::max(curve.shelter.x_max, table.domain_max_km);
    return curve;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::FeasibleBand: return "FeasibleBand";
        case Verdict::InfeasibleEverywhere: return "InfeasibleEverywhere";
        case Verdict::FeasibleEverywhereInDomain: return "FeasibleEverywhereInDomain";
    }
    return "?";
}

std::string limits_text(const LimitsTable& t) {
    std::ostringstream os;
    os << "Annual Household Income";
    for (double inc : t.incomes) os << "\t$" << fmt2(inc);
    os << '\n';
    size_t idx = 0;
    for (double p : t.ps)
        for (int year : t.years) {
            char head[96];
            std::snprintf(head, sizeof(head), "Commuting limit, km: %.0f%% of income (%d)",
                          p * 100.0, year);
            os << head;
            for (size_t i = 0; i < t.incomes.size(); ++i) {
                const LimitsCell& c = t.cells[idx++];
                if (!c.d2) {
                    os << "\t*";
                } else {
                    os << '\t' << fmt2(*c.d2);
                    if (c.extrapolated) os << "(extrapolated)";
                }
            }
            os << '\n';
        }
    os << "(*) not affordable: total cost exceeds the income allocation at every distance\n";
    return os.str();
}

nlohmann::json limits_json(const LimitsTable& t) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : t.cells) {
        nlohmann::json jc = {{"year", c.year},
                             {"income", c.income},
                             {"p", c.p},
                             {"infeasible", !c.d2.has_value()},
                             {"extrapolated", c.extrapolated}};
        if (c.d2) jc["d2_km"] = *c.d2;
        cells.push_back(jc);
    }
    return {{"incomes", t.incomes}, {"ps", t.ps}, {"years", t.years}, {"cells", cells}};
}

nlohmann::json zone_json(const FeasibilityZone& z, const TotalCostCurve& curve,
                         const BudgetConstraint& budget) {
    nlohmann::json j = {{"verdict", verdict_name(z.verdict)},
                        {"extrapolated", z.extrapolated},
                        {"p", budget.p},
                        {"income_annual", budget.income_annual},
                        {"level_monthly", budget.level_monthly()},
                        {"curve_domain", {curve.domain_lo, curve.domain_hi}},
                        {"boundary_semantics",
                         {{"d1", "shelter curve crosses the budget level"},
                          {"feasible_from", "total-cost curve first at or below the level"},
                          {"d2", "total-cost curve last at or below the level"}}}};
    if (z.d1) j["d1_km"] = *z.d1;
    if (z.d2) j["d2_km"] = *z.d2;
    if (z.feasible_from) j["feasible_from_km"] = *z.feasible_from;
    if (z.indifference_d) j["indifference_km"] = *z.indifference_d;
    return j;
}

} // namespace commute::frontier
