#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "commute/dataset.hpp"
#include "commute/frontier.hpp"

using namespace commute;
using frontier::BudgetConstraint;
using frontier::TotalCostCurve;
using frontier::Verdict;
using frontier::Window;

namespace {

const TotalCostCurve& curve_2011() {
    static const TotalCostCurve c = frontier::make_year_curve(dataset::builtin_table(), 2011, 3);
    return c;
}

const TotalCostCurve& curve_2016() {
    static const TotalCostCurve c = frontier::make_year_curve(dataset::builtin_table(), 2016, 3);
    return c;
}

const Window kWindow{10.0, 156.0};

} // namespace

TEST_CASE("total cost matches the reference evaluation") {
    CHECK(frontier::total_cost(curve_2011(), 120.0) == doctest::Approx(2087.22).epsilon(1e-4));
    CHECK_THROWS_AS(frontier::total_cost(curve_2011(), -1.0), std::domain_error);
    CHECK_THROWS_AS(frontier::total_cost(curve_2011(), 250.1), std::domain_error);
    // The hard limit itself is evaluable, just flagged extrapolated.
    CHECK(std::isfinite(frontier::total_cost(curve_2011(), 250.0)));
    CHECK(frontier::is_extrapolated(curve_2011(), 250.0));
    CHECK(!frontier::is_extrapolated(curve_2011(), 100.0));
}

TEST_CASE("crossings finds quadratic roots to 0.01 km") {
    // f(d) = (d - 40)(d - 90) + level has roots exactly at 40 and 90.
    auto f = [](double d) { return (d - 40.0) * (d - 90.0); };
    auto roots = frontier::crossings(f, 0.0, kWindow);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == doctest::Approx(40.0).epsilon(1e-3));
    CHECK(roots[1] == doctest::Approx(90.0).epsilon(1e-3));

    // Exact touch at a grid node is counted.
    auto g = [](double d) { return (d - 50.0) * (d - 50.0); };
    CHECK(frontier::crossings(g, 0.0, kWindow).size() == 1);

    CHECK_THROWS_AS(frontier::crossings(f, 0.0, Window{50.0, 50.0}), std::domain_error);
    CHECK_THROWS_AS(frontier::crossings(f, 0.0, kWindow, 0.0), std::domain_error);
}

TEST_CASE("2011 budget level 2100 crosses once at the outer boundary") {
    auto zone = frontier::feasibility_zone(curve_2011(), BudgetConstraint{0.42, 60000.0}, kWindow);
    CHECK(zone.verdict == Verdict::FeasibleBand);
    REQUIRE(zone.d2.has_value());
    CHECK(*zone.d2 == doctest::Approx(122.64).epsilon(5e-4));
    REQUIRE(zone.feasible_from.has_value());
    CHECK(*zone.feasible_from == kWindow.lo); // already affordable at the core
    CHECK(!zone.extrapolated);
}

TEST_CASE("2016 inner boundary at the 30 percent level") {
    // Shelter alone exceeds 0.30 * 60000 / 12 = 1500 up to ~44.6 km.
    auto zone = frontier::feasibility_zone(curve_2016(), BudgetConstraint{0.30, 60000.0}, kWindow);
    REQUIRE(zone.d1.has_value());
    CHECK(*zone.d1 == doctest::Approx(44.55).epsilon(1e-3));
}

TEST_CASE("indifference distance for 2011 sits near 112 km") {
    auto d = frontier::indifference_distance(curve_2011(), kWindow);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(111.95).epsilon(1e-3));
    auto zone = frontier::feasibility_zone(curve_2011(), BudgetConstraint{0.42, 60000.0}, kWindow);
    CHECK(zone.indifference_d == d);
}

TEST_CASE("verdicts cover the whole-window cases") {
    auto rich = frontier::feasibility_zone(curve_2011(), BudgetConstraint{0.45, 200000.0}, kWindow);
    CHECK(rich.verdict == Verdict::FeasibleEverywhereInDomain);
    CHECK(rich.feasible_from == kWindow.lo);
    CHECK(rich.d2 == kWindow.hi);

    auto poor = frontier::feasibility_zone(curve_2011(), BudgetConstraint{0.42, 20000.0}, kWindow);
    CHECK(poor.verdict == Verdict::InfeasibleEverywhere);
    CHECK(!poor.d2.has_value());
    CHECK(!poor.feasible_from.has_value());

    CHECK_THROWS_AS(
        frontier::feasibility_zone(curve_2011(), BudgetConstraint{1.5, 60000.0}, kWindow),
        std::domain_error);
    CHECK_THROWS_AS(
        frontier::feasibility_zone(curve_2011(), BudgetConstraint{0.42, 60000.0}, Window{10, 300}),
        std::domain_error);
}

TEST_CASE("feasibility is coherent at the boundaries") {
    for (const auto* curve : {&curve_2011(), &curve_2016()})
        for (double income : {50000.0, 60000.0, 80000.0})
            for (double p : {0.35, 0.42, 0.45}) {
                BudgetConstraint b{p, income};
                auto z = frontier::feasibility_zone(*curve, b, kWindow);
                if (z.verdict == Verdict::InfeasibleEverywhere) continue;
                REQUIRE(z.feasible_from.has_value());
                REQUIRE(z.d2.has_value());
                CHECK(*z.feasible_from <= *z.d2);
                const double level = b.level_monthly();
                // Just inside each boundary the constraint holds (within the
                // 0.01 km root tolerance translated through the curve slope).
                double lo = std::min(*z.feasible_from + 0.02, *z.d2);
                double hi = std::max(*z.d2 - 0.02, *z.feasible_from);
                CHECK(frontier::total_cost(*curve, lo) <= level + 1.0);
                CHECK(frontier::total_cost(*curve, hi) <= level + 1.0);
                // At an interior boundary the curve actually meets the level.
                if (*z.d2 < kWindow.hi - 1e-9)
                    CHECK(std::fabs(frontier::total_cost(*curve, *z.d2) - level) < 1.0);
            }
}

TEST_CASE("outer boundary is monotone in income and allocation fraction") {
    auto d2_of = [&](double p, double income) -> double {
        auto z = frontier::feasibility_zone(curve_2011(), BudgetConstraint{p, income}, kWindow);
        if (z.verdict == Verdict::InfeasibleEverywhere) return 0.0;
        return z.d2.value_or(0.0);
    };
    for (double p : {0.35, 0.42, 0.45}) {
        double prev = 0.0;
        for (double income = 45000.0; income <= 90000.0; income += 5000.0) {
            double cur = d2_of(p, income);
            CHECK(cur >= prev - 1e-9);
            prev = cur;
        }
    }
    for (double income : {50000.0, 60000.0, 70000.0}) {
        double prev = 0.0;
        for (double p : {0.30, 0.35, 0.42, 0.45}) {
            double cur = d2_of(p, income);
            CHECK(cur >= prev - 1e-9);
            prev = cur;
        }
    }
}

TEST_CASE("share and required-income are inverses of the constraint") {
    double share = frontier::affordability_share(curve_2016(), 92.0, 60000.0);
    CHECK(share == doctest::Approx(12.0 * frontier::total_cost(curve_2016(), 92.0) / 60000.0));
    double need = frontier::required_income(curve_2016(), 92.0, 0.45);
    CHECK(need == doctest::Approx(58585.0).epsilon(2e-4));
    // By construction the share at that income equals p.
    CHECK(frontier::affordability_share(curve_2016(), 92.0, need) ==
          doctest::Approx(0.45).epsilon(1e-12));
    CHECK_THROWS_AS(frontier::required_income(curve_2016(), 92.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(frontier::affordability_share(curve_2016(), 92.0, -1.0), std::domain_error);
}

TEST_CASE("limits table reproduces the reference grid") {
    std::map<int, TotalCostCurve> curves = {{2011, curve_2011()}, {2016, curve_2016()}};
    std::vector<double> incomes = {30000, 40000, 50000, 60000};
    std::vector<double> ps = {0.42, 0.45};
    auto t = frontier::commuting_limits(curves, incomes, ps, kWindow);
    REQUIRE(t.cells.size() == 16);

    auto cell = [&](double p, int year, double income) -> const frontier::LimitsCell& {
        for (const auto& c : t.cells)
            if (c.p == p && c.year == year && c.income == income) return c;
        FAIL("missing cell");
        return t.cells.front();
    };

    // Infeasible at 30k/40k everywhere.
    for (double income : {30000.0, 40000.0})
        for (double p : {0.42, 0.45})
            for (int year : {2011, 2016}) CHECK(!cell(p, year, income).d2.has_value());

    CHECK(cell(0.42, 2011, 50000).d2.value() == doctest::Approx(42.87).epsilon(1e-3));
    CHECK(cell(0.42, 2011, 60000).d2.value() == doctest::Approx(122.64).epsilon(1e-3));
    CHECK(cell(0.45, 2011, 60000).d2.value() == doctest::Approx(155.49).epsilon(1e-3));
    CHECK(cell(0.45, 2016, 60000).d2.value() == doctest::Approx(106.75).epsilon(1e-3));

    // Ordering: (p, year) major, income minor.
    CHECK(t.cells[0].p == 0.42);
    CHECK(t.cells[0].year == 2011);
    CHECK(t.cells[0].income == 30000);
    CHECK(t.cells[4].year == 2016);
    CHECK(t.cells[8].p == 0.45);

    auto text = frontier::limits_text(t);
    CHECK(text.find("42% of income (2011)") != std::string::npos);
    CHECK(text.find("*") != std::string::npos);
    CHECK(text.find("not affordable") != std::string::npos);

    auto j = frontier::limits_json(t);
    CHECK(j.at("cells").size() == 16);
    CHECK(j.at("cells")[0].at("infeasible") == true);
}

TEST_CASE("2016 boundaries tighten relative to 2011 cell by cell") {
    std::map<int, TotalCostCurve> curves = {{2011, curve_2011()}, {2016, curve_2016()}};
    std::vector<double> incomes = {50000, 60000, 70000, 80000};
    std::vector<double> ps = {0.42, 0.45};
    auto t = frontier::commuting_limits(curves, incomes, ps, kWindow);
    // cells ordered (p, year) major: for each p the 2011 block precedes 2016.
    size_t per_year = incomes.size();
    for (size_t pi = 0; pi < ps.size(); ++pi)
        for (size_t ii = 0; ii < per_year; ++ii) {
            const auto& c11 = t.cells[pi * 2 * per_year + ii];
            const auto& c16 = t.cells[pi * 2 * per_year + per_year + ii];
            double d11 = c11.d2.value_or(0.0);
            double d16 = c16.d2.value_or(0.0);
            CHECK(d16 <= d11 + 1e-9);
        }
}

TEST_CASE("zone json names the boundary semantics") {
    BudgetConstraint b{0.42, 60000.0};
    auto z = frontier::feasibility_zone(curve_2011(), b, kWindow);
    auto j = frontier::zone_json(z, curve_2011(), b);
    CHECK(j.at("verdict") == "FeasibleBand");
    CHECK(j.at("level_monthly").get<double>() == doctest::Approx(2100.0));
    CHECK(j.contains("boundary_semantics"));
    CHECK(j.at("d2_km").get<double>() == doctest::Approx(122.64).epsilon(1e-3));
}

TEST_CASE("boundaries beyond the fitted domain are flagged extrapolated") {
    auto z = frontier::feasibility_zone(curve_2011(), BudgetConstraint{0.45, 200000.0},
                                        Window{10.0, 200.0});
    CHECK(z.verdict == Verdict::FeasibleEverywhereInDomain);
    CHECK(z.extrapolated); // d2 = 200 km sits past the 156 km data cut-off
}
