#include "commute/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace commute::dataset {

namespace {

const std::vector<std::string> kColumns = {
    "name",        "distance_km",  "drive_time_min", "income_2011",
    "income_2016", "shelter_2011", "shelter_2016",   "drive_2011",
    "drive_2016",  "total_2011",   "total_2016",     "pct_2011",
    "pct_2016",    "lone_drivers_2016"};

// name, distance, drive time, both incomes and both shelter costs are
// mandatory; the rest may be absent.
const std::set<std::string> kMandatory = {
    "name",        "distance_km",  "income_2011", "income_2016",
    "shelter_2011", "shelter_2016", "drive_time_min"};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    out.push_back(cell);
    return out;
}

double parse_double(const std::string& cell, size_t row, const std::string& col) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ", column '" + col +
                         "': cannot parse numeric cell '" + cell + "'");
    }
    if (pos != cell.size())
        throw ParseError("row " + std::to_string(row) + ", column '" + col +
                         "': trailing characters in numeric cell '" + cell + "'");
    return v;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Shortest representation that reparses exactly.
std::string format_number(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::stod(buf) == v) break;
    }
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    q += '"';
    return q;
}

// Transcription of the published 23-community sample.
const char* kBuiltinCsv =
    "name,distance_km,drive_time_min,income_2011,income_2016,shelter_2011,shelter_2016,"
    "drive_2011,drive_2016,total_2011,total_2016,pct_2011,pct_2016,lone_drivers_2016\n"
    "Toronto - CMA,10,38,78165,87993,1359,1755,581.88,649.94,1940.88,2404.94,29.8,32.8,1274835\n"
    "Oshawa - CMA,51,56,75527,84163,1290,1552,591.27,643.58,1881.27,2195.58,29.89,31.3,11035\n"
    "Port Hope - CA,75,67,66065,74054,1022,1243,761.67,804.77,1783.67,2047.77,32.4,33.18,140\n"
    "Hamilton - CMA,77,65,70277,80008,1130,1422,775.87,818.2,1905.87,2240.2,32.54,33.6,17725\n"
    "St. Catharines - Niagara - CMA,79,87,60999,67788,974,1153,790.07,831.63,1764.07,1984.63,34.7,35.13,720\n"
    "Kitchener - Cambridge - Waterloo - CMA,94,89,71388,79056,1140,1381,896.57,932.37,2036.57,2313.37,34.23,35.11,4550\n"
    "Centre Wellington - CA,94,80,77041,82668,1185,1385,896.57,932.37,2081.57,2317.37,32.42,33.64,160\n"
    "Peterborough - CMA,95,90,62509,68638,1000,1202,903.67,939.09,1903.67,2141.09,36.55,37.43,350\n"
    "Orillia - CA,96,91,57707,61112,1009,1174,910.77,945.8,1919.77,2119.8,39.92,41.62,185\n"
    "Guelph - CMA,97,82,72864,82559,1181,1479,917.87,952.52,2098.87,2431.52,34.57,35.34,3400\n"
    "Woodstock - CA,97,91,58874,68803,1005,1193,917.87,952.52,1922.87,2145.52,39.19,37.42,115\n"
    "Ingersoll - CA,106,97,63699,72019,998,1232,981.77,1012.96,1979.77,2244.96,37.3,37.41,35\n"
    "Kawartha Lakes - CA,106,100,62355,69163,1009,1150,981.77,1012.96,1990.77,2162.96,38.31,37.53,260\n"
    "Cobourg - CA,108,82,61560,68651,1006,1189,995.97,1026.4,2001.97,2215.4,39.02,38.72,120\n"
    "Midland - CA,108,99,57563,63290,970,1115,995.97,1026.4,1965.97,2141.4,40.98,40.6,105\n"
    "Norfolk - CA,110,118,60840,67807,893,1061,1010.17,1039.83,1903.17,2100.83,37.54,37.18,95\n"
    "Stratford - CA,111,116,61342,67646,972,1162,1017.27,1046.54,1989.27,2208.54,38.91,39.18,70\n"
    "Collingwood - CA,112,113,62016,68585,1076,1255,1024.37,1053.26,2100.37,2308.26,40.64,40.39,80\n"
    "Barrie - CMA,112.2,79,70402,80832,1297,1521,1025.79,1054.6,2322.79,2575.6,39.59,38.24,3085\n"
    "Belleville - CA,123,111,58520,65204,939,1127,1102.47,1127.14,2041.47,2254.14,41.86,41.48,250\n"
    "Brantford - CMA,127,91,62608,70718,1023,1227,1130.87,1154,2153.87,2381,41.28,40.4,500\n"
    "London - CMA,128,121,63208,69903,1007,1219,1137.97,1160.72,2144.97,2379.72,40.72,40.85,835\n"
    "Owen Sound - CA,156,142,59011,64148,900,1089,1336.77,1348.76,2236.77,2437.76,45.49,45.6,50\n";

} // namespace

CommunityTable load_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty file: no header row");
    auto header = split_csv_line(line);
    std::map<std::string, int> col_index;
    for (size_t i = 0; i < header.size(); ++i) col_index[trim(header[i])] = static_cast<int>(i);
    for (const auto& col : kMandatory)
        if (!col_index.count(col)) throw SchemaError("missing mandatory column '" + col + "'");

    auto cell_at = [&](const std::vector<std::string>& cells, const std::string& col)
        -> std::optional<std::string> {
        auto it = col_index.find(col);
        if (it == col_index.end()) return std::nullopt;
        if (it->second >= static_cast<int>(cells.size())) return std::nullopt;
        auto v = trim(cells[static_cast<size_t>(it->second)]);
        if (v.empty()) return std::nullopt;
        return v;
    };

    CommunityTable table;
    size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        CommunityRecord r;
        r.name = *cell_at(cells, "name");
        auto num = [&](const std::string& col) {
            auto c = cell_at(cells, col);
            if (!c) throw ParseError("row " + std::to_string(row) + ", column '" + col +
                                     "': mandatory cell is empty");
            return parse_double(*c, row, col);
        };
        auto opt_num = [&](const std::string& col) -> std::optional<double> {
            auto c = cell_at(cells, col);
            if (!c) return std::nullopt;
            return parse_double(*c, row, col);
        };
        r.distance_km = num("distance_km");
        r.drive_time_min = num("drive_time_min");
        r.income_2011 = num("income_2011");
        r.income_2016 = num("income_2016");
        r.shelter_2011 = num("shelter_2011");
        r.shelter_2016 = num("shelter_2016");
        r.drive_2011 = opt_num("drive_2011");
        r.drive_2016 = opt_num("drive_2016");
        r.total_2011 = opt_num("total_2011");
        r.total_2016 = opt_num("total_2016");
        r.pct_2011 = opt_num("pct_2011");
        r.pct_2016 = opt_num("pct_2016");
        if (auto c = cell_at(cells, "lone_drivers_2016"))
            r.lone_drivers_2016 = static_cast<long long>(parse_double(*c, row, "lone_drivers_2016"));
        table.records.push_back(std::move(r));
    }
    if (table.records.empty()) throw SchemaError("no records: file holds only a header");
    double max_d = 0.0;
    for (const auto& r : table.records) max_d = std::max(max_d, r.distance_km);
    table.domain_max_km = std::max(156.0, max_d);
    return table;
}

CommunityTable load_table_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SchemaError("cannot open '" + path + "'");
    return load_table(f);
}

ValidationReport validate_table(const CommunityTable& table) {
    ValidationReport rep;
    auto err = [&](const std::string& name, const std::string& field, const std::string& msg) {
        rep.errors.push_back({name, field, msg});
    };
    auto warn = [&](const std::string& name, const std::string& field, const std::string& msg) {
        rep.warnings.push_back({name, field, msg});
    };

    std::set<std::string> seen;
    for (const auto& r : table.records) {
        if (!seen.insert(r.name).second) err(r.name, "name", "duplicate name");
        if (!(r.distance_km > 0)) err(r.name, "distance_km", "must be > 0");
        if (!(r.income_2011 > 0)) err(r.name, "income_2011", "must be > 0");
        if (!(r.income_2016 > 0)) err(r.name, "income_2016", "must be > 0");
        if (!(r.shelter_2011 > 0)) err(r.name, "shelter_2011", "must be > 0");
        if (!(r.shelter_2016 > 0)) err(r.name, "shelter_2016", "must be > 0");
        auto pct_range = [&](const std::optional<double>& v, const char* field) {
            if (v && !(*v > 0 && *v < 100)) err(r.name, field, "percent must lie in (0, 100)");
        };
        pct_range(r.pct_2011, "pct_2011");
        pct_range(r.pct_2016, "pct_2016");
        auto drive_pos = [&](const std::optional<double>& v, const char* field) {
            if (v && *v < 0) err(r.name, field, "must be >= 0");
        };
        drive_pos(r.drive_2011, "drive_2011");
        drive_pos(r.drive_2016, "drive_2016");

        // Derived-column consistency: total = shelter + drive within
        // +/- 0.01, pct = 100 * 12 * total / income within +/- 0.05.
        auto consistency = [&](double shelter, const std::optional<double>& drive,
                               const std::optional<double>& total,
                               const std::optional<double>& pct, double income,
                               const char* tfield, const char* pfield) {
            if (drive && total) {
                double expect = shelter + *drive;
                if (std::fabs(expect - *total) > 0.01 + 1e-9)
                    err(r.name, tfield,
                        "inconsistent: shelter + drive = " + format_number(expect) +
                            " but total = " + format_number(*total));
            }
            if (total && pct && income > 0) {
                double expect = 100.0 * 12.0 * *total / income;
                if (std::fabs(expect - *pct) > 0.05 + 1e-9)
                    err(r.name, pfield,
                        "inconsistent: 100*12*total/income = " + format_number(expect) +
                            " but pct = " + format_number(*pct));
            }
        };
        consistency(r.shelter_2011, r.drive_2011, r.total_2011, r.pct_2011, r.income_2011,
                    "total_2011", "pct_2011");
        consistency(r.shelter_2016, r.drive_2016, r.total_2016, r.pct_2016, r.income_2016,
                    "total_2016", "pct_2016");

        if (r.distance_km > table.domain_max_km)
            err(r.name, "distance_km", "beyond table domain_max_km");
        if (r.lone_drivers_2016 && *r.lone_drivers_2016 < 0)
            err(r.name, "lone_drivers_2016", "must be >= 0");
        if (r.drive_time_min <= 0) warn(r.name, "drive_time_min", "non-positive driving time");
    }
    if (table.records.size() < 4)
        rep.warnings.push_back({"", "records", "fewer than 4 records: degree-3 fits unavailable"});
    return rep;
}

const CommunityTable& builtin_table() {
    static const CommunityTable table = [] {
        std::istringstream in(kBuiltinCsv);
        auto t = load_table(in);
        t.domain_max_km = 156.0;
        return t;
    }();
    return table;
}

void write_csv(const CommunityTable& table, std::ostream& out) {
    for (size_t i = 0; i < kColumns.size(); ++i)
        out << kColumns[i] << (i + 1 < kColumns.size() ? "," : "\n");
    for (const auto& r : table.records) {
        out << csv_quote(r.name) << ',' << format_number(r.distance_km) << ','
            << format_number(r.drive_time_min) << ',' << format_number(r.income_2011) << ','
            << format_number(r.income_2016) << ',' << format_number(r.shelter_2011) << ','
            << format_number(r.shelter_2016) << ',';
        auto opt = [&](const std::optional<double>& v) {
            return v ? format_number(*v) : std::string();
        };
        out << opt(r.drive_2011) << ',' << opt(r.drive_2016) << ',' << opt(r.total_2011) << ','
            << opt(r.total_2016) << ',' << opt(r.pct_2011) << ',' << opt(r.pct_2016) << ',';
        if (r.lone_drivers_2016) out << *r.lone_drivers_2016;
        out << '\n';
    }
}

std::string report_text(const ValidationReport& report) {
    std::ostringstream os;
    for (const auto& f : report.errors)
        os << "error: " << (f.record.empty() ? "<table>" : f.record) << ": " << f.field << ": "
           << f.message << '\n';
    for (const auto& f : report.warnings)
        os << "warning: " << (f.record.empty() ? "<table>" : f.record) << ": " << f.field << ": "
           << f.message << '\n';
    os << (report.ok() ? "OK" : "INVALID") << ": " << report.errors.size() << " error(s), "
       << report.warnings.size() << " warning(s)\n";
    return os.str();
}

nlohmann::json report_json(const ValidationReport& report) {
    auto findings = [](const std::vector<Finding>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& f : v)
            a.push_back({{"record", f.record}, {"field", f.field}, {"message", f.message}});
        return a;
    };
    return {{"ok", report.ok()},
            {"errors", findings(report.errors)},
            {"warnings", findings(report.warnings)}};
}

std::optional<double> field_value(const CommunityRecord& rec, std::string_view column) {
    if (column == "distance_km") return rec.distance_km;
    if (column == "drive_time_min") return rec.drive_time_min;
    if (column == "income_2011") return rec.income_2011;
    if (column == "income_2016") return rec.income_2016;
    if (column == "shelter_2011") return rec.shelter_2011;
    if (column == "shelter_2016") return rec.shelter_2016;
    if (column == "drive_2011") return rec.drive_2011;
    if (column == "drive_2016") return rec.drive_2016;
    if (column == "total_2011") return rec.total_2011;
    if (column == "total_2016") return rec.total_2016;
    if (column == "pct_2011") return rec.pct_2011;
    if (column == "pct_2016") return rec.pct_2016;
    if (column == "lone_drivers_2016") {
        if (rec.lone_drivers_2016) return static_cast<double>(*rec.lone_drivers_2016);
        return std::nullopt;
    }
    return std::nullopt; // unknown columns read as absent
}

const std::vector<std::string>& numeric_columns() {
    static const std::vector<std::string> cols(kColumns.begin() + 1, kColumns.end());
    return cols;
}

} // namespace commute::dataset
