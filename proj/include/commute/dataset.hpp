#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "commute/errors.hpp"

namespace commute::dataset {

/// One census geography. Distances are one-way kilometres to the
/// metropolitan core; the core itself carries a conventional 10 km
/// (the distance source cannot measure a place to itself).
/// Optional columns are absent when the source file leaves the cell empty.
struct CommunityRecord {
    std::string name;
    double distance_km = 0.0;
    double drive_time_min = 0.0; // context only, not used in any model
    double income_2011 = 0.0;    // after-tax household, $/year
    double income_2016 = 0.0;
    double shelter_2011 = 0.0; // $/month
    double shelter_2016 = 0.0;
    std::optional<double> drive_2011; // observed driving cost, $/month
    std::optional<double> drive_2016;
    std::optional<double> total_2011; // shelter + drive, $/month
    std::optional<double> total_2016;
    std::optional<double> pct_2011; // total as percent of income
    std::optional<double> pct_2016;
    std::optional<long long> lone_drivers_2016;
};

struct CommunityTable {
    std::vector<CommunityRecord> records;
    double domain_max_km = 156.0; // dataset cut-off
};

struct Finding {
    std::string record;
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> errors;
    std::vector<Finding> warnings;
    bool ok() const { return errors.empty(); }
};

/// Parse delimiter-separated text with a mandatory header row.
/// Unknown columns are ignored; optional columns absent from the header
/// (or empty cells) are marked missing, never zero.
/// Throws SchemaError for a missing mandatory column or an empty file,
/// ParseError for a malformed numeric cell (names row and column).
CommunityTable load_table(std::istream& in);
CommunityTable load_table_file(const std::string& path);

/// Enumerate every invariant violation. Hard violations (non-positive
/// distance, duplicate names, out-of-range percents) are errors;
/// derived-column inconsistencies beyond rounding tolerance are errors,
/// borderline ones warnings.
ValidationReport validate_table(const CommunityTable& table);

/// The 23-community sample shipped with the library, domain cut-off 156 km.
const CommunityTable& builtin_table();

/// Serialize in the same CSV dialect load_table reads. Round-trips
/// field-identically.
void write_csv(const CommunityTable& table, std::ostream& out);

std::string report_text(const ValidationReport& report);
nlohmann::json report_json(const ValidationReport& report);

/// Numeric column access by header name ("shelter_2011", "pct_2016", ...).
/// Returns nullopt when the record does not carry the column.
std::optional<double> field_value(const CommunityRecord& rec, std::string_view column);

/// Header names of all numeric columns, in file order.
const std::vector<std::string>& numeric_columns();

} // namespace commute::dataset
