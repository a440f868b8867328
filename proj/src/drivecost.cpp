#include "commute/drivecost.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace commute::drivecost {

DrivingCostParams params_2011() {
    DrivingCostParams p;
    p.year_label = "2011";
    p.fuel_price = 1.29;
    p.fuel_economy = 8.0;
    p.insurance = 1936.0;
    p.licence = 115.0;
    p.finance = 699.0;
    p.maintenance_rate = 0.0243;
    p.tire_rate = kTireRate2011;
    return p;
}

DrivingCostParams params_2016() {
    DrivingCostParams p;
    p.year_label = "2016";
    p.fuel_price = 1.02;
    p.fuel_economy = 7.3;
    p.insurance = 2630.0;
    p.licence = 146.16;
    p.finance = 836.64;
    p.maintenance_rate = 0.0327;
    p.tire_rate = kTireRate2016;
    return p;
}

DrivingCostParams params_for_year(int year) {
    if (year == 2011) return params_2011();
    if (year == 2016) return params_2016();
    throw std::domain_error("no parameter set for year " + std::to_string(year));
}

double annual_km(double d, const DrivingCostParams& params) {
    if (d < 0) throw std::domain_error("distance must be >= 0");
    return d * 2.0 * params.workdays_per_week * params.weeks_per_year;
}

CostBreakdown annual_driving_cost(double d, const DrivingCostParams& params) {
    CostBreakdown b;
    b.annual_km = annual_km(d, params);
    b.gas = b.annual_km / 100.0 * params.fuel_economy * params.fuel_price;
    // Exclusive regimes: the flat amount applies at the threshold itself,
    // the per-km rate only strictly above it.
    b.depreciation = b.annual_km > params.dep_threshold_km ? params.dep_rate * b.annual_km
                                                           : params.dep_flat;
    b.maintenance = params.maintenance_rate * b.annual_km;
    b.tires = params.tire_rate * b.annual_km;
    b.insurance = params.insurance;
    b.licence = params.licence;
    b.finance = params.finance;
    b.total_annual = b.gas + b.insurance + b.licence + b.depreciation + b.finance +
                     b.maintenance + b.tires;
    b.total_monthly = b.total_annual / 12.0;
    return b;
}

double monthly_driving_cost(double d, const DrivingCostParams& params) {
    return annual_driving_cost(d, params).total_monthly;
}

double calibrate_tire_rate(const dataset::CommunityTable& table,
                           const DrivingCostParams& params, int year) {
    if (year != 2011 && year != 2016)
        throw std::domain_error("calibration year must be 2011 or 2016");
    DrivingCostParams zero_tire = params;
    zero_tire.tire_rate = 0.0;

    double num = 0.0, den = 0.0;
    int usable = 0;
    for (const auto& rec : table.records) {
        const auto& observed = year == 2011 ? rec.drive_2011 : rec.drive_2016;
        if (!observed) continue;
        double km = annual_km(rec.distance_km, params);
        double residual = *observed * 12.0 - annual_driving_cost(rec.distance_km, zero_tire).total_annual;
        num += residual * km;
        den += km * km;
        ++usable;
    }
    if (usable < 2)
        throw InsufficientDataError("tire calibration needs >= 2 records with observed costs");
    if (den == 0.0) throw DegenerateError("tire calibration: all annual km are zero");
    return num / den;
}

void to_json(nlohmann::json& j, const DrivingCostParams& p) {
    j = {{"year_label", p.year_label},
         {"fuel_price", p.fuel_price},
         {"fuel_economy", p.fuel_economy},
         {"insurance", p.insurance},
         {"licence", p.licence},
         {"finance", p.finance},
         {"maintenance_rate", p.maintenance_rate},
         {"tire_rate", p.tire_rate},
         {"dep_flat", p.dep_flat},
         {"dep_rate", p.dep_rate},
         {"dep_threshold_km", p.dep_threshold_km},
         {"workdays_per_week", p.workdays_per_week},
         {"weeks_per_year", p.weeks_per_year}};
}

void from_json(const nlohmann::json& j, DrivingCostParams& p) {
    j.at("year_label").get_to(p.year_label);
    j.at("fuel_price").get_to(p.fuel_price);
    j.at("fuel_economy").get_to(p.fuel_economy);
    j.at("insurance").get_to(p.insurance);
    j.at("licence").get_to(p.licence);
    j.at("finance").get_to(p.finance);
    j.at("maintenance_rate").get_to(p.maintenance_rate);
    p.tire_rate = j.value("tire_rate", 0.0);
    p.dep_flat = j.value("dep_flat", 3515.0);
    p.dep_rate = j.value("dep_rate", 0.028);
    p.dep_threshold_km = j.value("dep_threshold_km", 18000.0);
    p.workdays_per_week = j.value("workdays_per_week", 5);
    p.weeks_per_year = j.value("weeks_per_year", 52);
}

nlohmann::json breakdown_json(const CostBreakdown& b) {
    return {{"annual_km", b.annual_km},
            {"gas", b.gas},
            {"insurance", b.insurance},
            {"licence", b.licence},
            {"depreciation", b.depreciation},
            {"finance", b.finance},
            {"maintenance", b.maintenance},
            {"tires", b.tires},
            {"total_annual", b.total_annual},
            {"total_monthly", b.total_monthly}};
}

} // namespace commute::drivecost
