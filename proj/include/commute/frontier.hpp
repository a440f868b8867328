#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "commute/dataset.hpp"
#include "commute/drivecost.hpp"
#include "commute/regress.hpp"

namespace commute::frontier {

/// Allocation fraction plus after-tax income. Presets follow the usual
/// guidelines: 0.30 rule of thumb, 0.35 GDS, 0.42 TDS, 0.45 unaffordability.
struct BudgetConstraint {
    double p = 0.42;             // fraction of after-tax income, in (0,1)
    double income_annual = 0.0;  // $/year
    double income_monthly() const { return income_annual / 12.0; }
    double level_monthly() const { return p * income_monthly(); }
};

inline constexpr double kBudgetPresets[] = {0.30, 0.35, 0.42, 0.45};

/// Fitted shelter curve plus closed-form driving cost; T2 and PC enter
/// as flat monthly amounts (zero for car-only commuters).
struct TotalCostCurve {
    regress::PolynomialModel shelter;
    drivecost::DrivingCostParams drive_params;
    double second_mode_monthly = 0.0;
    double parking_monthly = 0.0;
    double domain_lo = 10.0;
    double domain_hi = 156.0;
};

/// Evaluation never goes past this; beyond the curve domain results are
/// flagged extrapolated, never silently produced.
inline constexpr double kHardMaxKm = 250.0;

struct Window {
    double lo = 10.0;
    double hi = 156.0;
};

/// shelter(d) + driving(d) + second mode + parking, $/month.
/// Throws std::domain_error for d < 0 or d > kHardMaxKm.
double total_cost(const TotalCostCurve& curve, double d);

bool is_extrapolated(const TotalCostCurve& curve, double d);

/// Grid scan at grid_step for sign changes of f - level, each bracket
/// refined by bisection to |dd| <= 0.01 km. Exact touches at grid nodes
/// count as crossings. Ascending order.
std::vector<double> crossings(const std::function<double(double)>& f, double level,
                              Window window, double grid_step = 1.0);

enum class Verdict { FeasibleBand, InfeasibleEverywhere, FeasibleEverywhereInDomain };

std::string verdict_name(Verdict v);

struct FeasibilityZone {
    std::optional<double> d1;             // shelter cost alone falls to p*I
    std::optional<double> d2;             // largest d with total cost <= p*I
    std::optional<double> feasible_from;  // smallest d with total cost <= p*I
    std::optional<double> indifference_d; // shelter equals driving cost
    Verdict verdict = Verdict::InfeasibleEverywhere;
    bool extrapolated = false; // some boundary lies outside curve domain
};

FeasibilityZone feasibility_zone(const TotalCostCurve& curve,
                                 const BudgetConstraint& budget, Window window);

/// Crossing of shelter(d) and driving(d) within the window, if any.
std::optional<double> indifference_distance(const TotalCostCurve& curve, Window window);

/// 12 * total_cost(d) / income_annual.
double affordability_share(const TotalCostCurve& curve, double d, double income_annual);

/// 12 * total_cost(d) / p.
double required_income(const TotalCostCurve& curve, double d, double p);

struct LimitsCell {
    int year = 0;
    double income = 0.0;
    double p = 0.0;
    std::optional<double> d2; // absent => infeasible marker "*"
    bool extrapolated = false;
};

struct LimitsTable {
    std::vector<double> incomes;
    std::vector<double> ps;
    std::vector<int> years;
    std::vector<LimitsCell> cells; // ordered (p, year) major, income minor
};

LimitsTable commuting_limits(const std::map<int, TotalCostCurve>& curves,
                             const std::vector<double>& incomes,
                             const std::vector<double>& ps, Window window);

/// Fit the year's shelter curve at the given degree and calibrate the
/// tire rate from the same table.
TotalCostCurve make_year_curve(const dataset::CommunityTable& table, int year,
                               int degree = 3);

std::string limits_text(const LimitsTable& t);
nlohmann::json limits_json(const LimitsTable& t);
nlohmann::json zone_json(const FeasibilityZone& z, const TotalCostCurve& curve,
                         const BudgetConstraint& budget);

} // namespace commute::frontier
