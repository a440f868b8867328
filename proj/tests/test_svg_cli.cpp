#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "commute/cli.hpp"
#include "commute/svg.hpp"

using namespace commute;
using svg::Annotation;
using svg::Guide;
using svg::PlotSpec;
using svg::Series;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<Series> demo_series() {
    return {
        {"rent & utilities", {{10, 1300}, {60, 1150}, {120, 1020}}, "#1f77b4", false},
        {"driving", {{10, 580}, {60, 610}, {120, 1100}}, "#d62728", true},
    };
}

} // namespace

TEST_CASE("svg output is byte-deterministic and well formed") {
    PlotSpec spec;
    spec.title = "costs";
    spec.x_label = "km";
    spec.y_label = "$/mo";
    std::vector<Guide> guides = {{"42% line", 2100.0}};
    std::vector<Annotation> notes = {{"d2", 120.0, 1020.0}};
    auto a = svg::render_plot(demo_series(), guides, notes, spec);
    auto b = svg::render_plot(demo_series(), guides, notes, spec);
    CHECK(a == b);
    CHECK(a.rfind("<?xml", 0) == 0);
    CHECK(a.find("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"") != std::string::npos);
    CHECK(a.find("</svg>") != std::string::npos);
    CHECK(a.find("polyline") != std::string::npos);
    CHECK(a.find("stroke-dasharray") != std::string::npos); // dashed series + guide
    CHECK(a.find("42% line") != std::string::npos);
    // The ampersand in a label must be escaped.
    CHECK(a.find("rent &amp; utilities") != std::string::npos);
    CHECK(a.find("rent & utilities") == std::string::npos);
    // No negative-zero coordinate spellings.
    CHECK(a.find("-0.00") == std::string::npos);
}

TEST_CASE("svg rejects empty input") {
    PlotSpec spec;
    CHECK_THROWS_AS(svg::render_plot({}, {}, {}, spec), std::domain_error);
    std::vector<Series> holed = {{"x", {}, "#000000", false}};
    CHECK_THROWS_AS(svg::render_plot(holed, {}, {}, spec), std::domain_error);
}

TEST_CASE("series csv escapes labels and is stable") {
    std::vector<Series> s = {{"a,b", {{1, 2}}, "#000000", false}};
    auto csv = svg::series_csv(s);
    CHECK(csv == "series,x,y\n\"a,b\",1.00,2.00\n");
}

TEST_CASE("cli validate on the builtin table succeeds") {
    auto r = run_cli({"validate"});
    CHECK(r.code == 0);
    CHECK(r.out.find("0 error") != std::string::npos);
}

TEST_CASE("cli validate reports a missing file as a data error") {
    auto r = run_cli({"--input", "/no/such/file.csv", "validate"});
    CHECK(r.code == 1);
    CHECK(!r.err.empty());
}

TEST_CASE("cli rejects bad flags with a usage error") {
    CHECK(run_cli({"validate", "--frobnicate"}).code == 2);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"fit", "--response", "shelter_2011", "--degree", "9"}).code == 2);
}

TEST_CASE("cli calibrate emits the frozen tire rates") {
    auto r = run_cli({"--output", "json", "calibrate", "--year", "both"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("2011").get<double>() == doctest::Approx(0.0083477561).epsilon(1e-6));
    CHECK(j.at("2016").get<double>() == doctest::Approx(0.0198256950).epsilon(1e-6));
}

TEST_CASE("cli fit json carries the regression summary") {
    auto r = run_cli({"--output", "json", "fit", "--response", "shelter_2011", "--degree", "1"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("coefficients")[0].get<double>() == doctest::Approx(1352.80).epsilon(1e-4));
    CHECK(j.at("coefficients")[1].get<double>() == doctest::Approx(-2.9617).epsilon(1e-3));
    CHECK(j.at("response") == "shelter_2011");
}

TEST_CASE("cli drive-cost honours parameter overrides") {
    auto base = run_cli({"--output", "json", "drive-cost", "--d", "10", "--year", "2011"});
    REQUIRE(base.code == 0);
    double monthly =
        nlohmann::json::parse(base.out).at("2011").at("total_monthly").get<double>();
    CHECK(monthly == doctest::Approx(580.95).epsilon(1e-4));

    auto bumped = run_cli({"--output", "json", "drive-cost", "--d", "10", "--year", "2011",
                           "--insurance", "3000"});
    double monthly2 =
        nlohmann::json::parse(bumped.out).at("2011").at("total_monthly").get<double>();
    CHECK(monthly2 > monthly);
}

TEST_CASE("cli frontier json reports the 2011 outer boundary") {
    auto r = run_cli({"--output", "json", "frontier", "--income", "60000", "--p", "0.42",
                      "--year", "2011"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("2011").at("d2_km").get<double>() == doctest::Approx(122.64).epsilon(1e-3));
    CHECK(j.at("2011").at("verdict") == "FeasibleBand");
}

TEST_CASE("cli limits text prints the infeasibility marker and footer") {
    auto r = run_cli({"limits"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("*") != std::string::npos);
    CHECK(r.out.find("not affordable") != std::string::npos);
    CHECK(r.out.find("42% of income (2016)") != std::string::npos);
}

TEST_CASE("cli compare-years reports deltas that match the endpoints") {
    auto r = run_cli({"--output", "json", "compare-years", "--income", "60000", "--p", "0.45"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    auto row = j.at("shelter_constant");
    CHECK(row.at("delta").get<double>() ==
          doctest::Approx(row.at("y2016").get<double>() - row.at("y2011").get<double>())
              .epsilon(1e-12));
    // The 2016 curve tightened: outer boundary moved inward.
    auto d2 = j.at("outer_boundary_d2");
    CHECK(d2.at("y2016").get<double>() < d2.at("y2011").get<double>());
}

TEST_CASE("cli diagnose text lists the diagnostic columns") {
    auto r = run_cli({"diagnose"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("income_2011") != std::string::npos);
    CHECK(r.out.find("pct_2016") != std::string::npos);
    CHECK(r.out.find("Ryan-Joiner") != std::string::npos);
}

TEST_CASE("cli plot to stdout is byte-deterministic") {
    auto a = run_cli({"plot", "--figure", "costs", "--income", "60000", "--out", "-"});
    auto b = run_cli({"plot", "--figure", "costs", "--income", "60000", "--out", "-"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("<?xml", 0) == 0);

    auto p = run_cli({"plot", "--figure", "percent", "--out", "-"});
    REQUIRE(p.code == 0);
    CHECK(p.out.find("% of income") != std::string::npos);

    CHECK(run_cli({"plot", "--figure", "bogus", "--out", "-"}).code == 2);
}

TEST_CASE("cli limits json equals a second invocation byte for byte") {
    auto a = run_cli({"--output", "json", "limits"});
    auto b = run_cli({"--output", "json", "limits"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}
