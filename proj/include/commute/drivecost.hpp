#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "commute/dataset.hpp"

namespace commute::drivecost {

/// Cost constants for one model year. Depreciation is a two-regime rule:
/// a flat annual amount up to dep_threshold_km per year, a pure per-km
/// rate above it. The regimes are exclusive, not additive.
struct DrivingCostParams {
    std::string year_label;
    double fuel_price = 0.0;       // $/litre
    double fuel_economy = 0.0;     // litres per 100 km
    double insurance = 0.0;        // $/year
    double licence = 0.0;          // $/year
    double finance = 0.0;          // $/year
    double maintenance_rate = 0.0; // $/km
    double tire_rate = 0.0;        // $/km
    double dep_flat = 3515.0;      // $/year at or below threshold
    double dep_rate = 0.028;       // $/km above threshold
    double dep_threshold_km = 18000.0;
    int workdays_per_week = 5;
    int weeks_per_year = 52;
};

/// Tire rates fitted against the builtin table's observed driving costs
/// (the source cost table names a tire component but gives no rate).
inline constexpr double kTireRate2011 = 0.0083477561;
inline constexpr double kTireRate2016 = 0.0198256950;

DrivingCostParams params_2011();
DrivingCostParams params_2016();
DrivingCostParams params_for_year(int year); // 2011 or 2016

struct CostBreakdown {
    double annual_km = 0.0;
    double gas = 0.0;
    double insurance = 0.0;
    double licence = 0.0;
    double depreciation = 0.0;
    double finance = 0.0;
    double maintenance = 0.0;
    double tires = 0.0;
    double total_annual = 0.0;  // exact sum of the seven components
    double total_monthly = 0.0; // total_annual / 12
};

/// (d * 2) * workdays * weeks. Throws std::domain_error for d < 0.
double annual_km(double d, const DrivingCostParams& params);

CostBreakdown annual_driving_cost(double d, const DrivingCostParams& params);
double monthly_driving_cost(double d, const DrivingCostParams& params);

/// Least-squares tire rate r minimizing
///   sum_i (observed_annual_i - model_annual_i(r))^2
/// over records carrying an observed driving cost for the year;
/// closed form r = sum(residual_i * km_i) / sum(km_i^2) with residual
/// measured against the zero-tire model.
/// Throws InsufficientDataError (< 2 usable records) or DegenerateError
/// (all annual km zero).
double calibrate_tire_rate(const dataset::CommunityTable& table,
                           const DrivingCostParams& params, int year);

void to_json(nlohmann::json& j, const DrivingCostParams& p);
void from_json(const nlohmann::json& j, DrivingCostParams& p);
nlohmann::json breakdown_json(const CostBreakdown& b);

} // namespace commute::drivecost
