#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "commute/dataset.hpp"

using namespace commute;

namespace {

const char* kHeader =
    "name,distance_km,drive_time_min,income_2011,income_2016,shelter_2011,shelter_2016,"
    "drive_2011,drive_2016,total_2011,total_2016,pct_2011,pct_2016,lone_drivers_2016\n";

dataset::CommunityTable from_string(const std::string& csv) {
    std::istringstream in(csv);
    return dataset::load_table(in);
}

} // namespace

TEST_CASE("builtin table has the full 23-community sample") {
    const auto& t = dataset::builtin_table();
    CHECK(t.records.size() == 23);
    CHECK(t.domain_max_km == 156.0);
    CHECK(t.records.front().name == "Toronto - CMA");
    CHECK(t.records.front().distance_km == 10.0);
    CHECK(t.records.back().distance_km <= 156.0);

    bool found_barrie = false, found_owen = false;
    for (const auto& r : t.records) {
        if (r.name == "Barrie - CMA") {
            found_barrie = true;
            CHECK(r.distance_km == doctest::Approx(112.2));
            CHECK(r.shelter_2016 == doctest::Approx(1521));
            CHECK(r.total_2016 == doctest::Approx(2575.6));
        }
        if (r.name == "Owen Sound - CA") {
            found_owen = true;
            CHECK(r.distance_km == doctest::Approx(156.0));
        }
    }
    CHECK(found_barrie);
    CHECK(found_owen);
}

TEST_CASE("builtin table validates with zero errors") {
    auto report = dataset::validate_table(dataset::builtin_table());
    CHECK(report.errors.empty());
    CHECK(report.ok());
}

TEST_CASE("csv round-trip is field-identical") {
    const auto& t = dataset::builtin_table();
    std::ostringstream out;
    dataset::write_csv(t, out);
    auto t2 = from_string(out.str());
    REQUIRE(t2.records.size() == t.records.size());
    for (size_t i = 0; i < t.records.size(); ++i) {
        const auto& a = t.records[i];
        const auto& b = t2.records[i];
        CHECK(a.name == b.name);
        for (const auto& col : dataset::numeric_columns()) {
            auto va = dataset::field_value(a, col);
            auto vb = dataset::field_value(b, col);
            CHECK(va.has_value() == vb.has_value());
            if (va && vb) CHECK(*va == *vb);
        }
        CHECK(a.lone_drivers_2016 == b.lone_drivers_2016);
    }

    // And a second serialization gives the same bytes.
    std::ostringstream out2;
    dataset::write_csv(t2, out2);
    CHECK(out.str() == out2.str());
}

TEST_CASE("missing mandatory column raises SchemaError") {
    CHECK_THROWS_AS(from_string("name,distance_km\nA,10\n"), SchemaError);
}

TEST_CASE("empty input raises SchemaError") {
    CHECK_THROWS_AS(from_string(""), SchemaError);
    CHECK_THROWS_AS(from_string(std::string(kHeader)), SchemaError); // header only
}

TEST_CASE("malformed numeric cell raises ParseError naming row and column") {
    std::string csv = std::string(kHeader) +
                      "A,10,38,70000,80000,1300,abc,,,,,,,\n";
    try {
        from_string(csv);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        std::string msg = e.what();
        CHECK(msg.find("shelter_2016") != std::string::npos);
        CHECK(msg.find("row 2") != std::string::npos);
    }
}

TEST_CASE("empty optional cells come back missing, not zero") {
    std::string csv = std::string(kHeader) +
                      "A,10,38,70000,80000,1300,1500,,,,,,,\n";
    auto t = from_string(csv);
    REQUIRE(t.records.size() == 1);
    CHECK(!t.records[0].drive_2011.has_value());
    CHECK(!t.records[0].total_2016.has_value());
    CHECK(!t.records[0].pct_2011.has_value());
    CHECK(!t.records[0].lone_drivers_2016.has_value());
    CHECK(t.records[0].shelter_2016 == 1500.0);
}

TEST_CASE("validation flags hard violations") {
    std::string csv = std::string(kHeader) +
                      "A,-5,38,70000,80000,1300,1500,,,,,,,\n"  // bad distance
                      "B,20,38,70000,80000,1300,1500,,,,,120,,\n" // pct out of range
                      "B,30,38,70000,80000,1300,1500,,,,,,,\n";  // duplicate name
    auto t = from_string(csv);
    auto rep = dataset::validate_table(t);
    CHECK(!rep.ok());
    CHECK(rep.errors.size() >= 3);

    bool saw_distance = false, saw_pct = false, saw_dup = false;
    for (const auto& f : rep.errors) {
        if (f.field == "distance_km") saw_distance = true;
        if (f.field == "pct_2011") saw_pct = true;
        if (f.field == "name") saw_dup = true;
    }
    CHECK(saw_distance);
    CHECK(saw_pct);
    CHECK(saw_dup);
}

TEST_CASE("validation checks derived-column consistency") {
    // total deliberately off by $5 from shelter + drive
    std::string csv = std::string(kHeader) +
                      "A,10,38,70000,80000,1300,1500,600,,1905,,,,\n";
    auto rep = dataset::validate_table(from_string(csv));
    bool saw = false;
    for (const auto& f : rep.errors)
        if (f.field == "total_2011") saw = true;
    CHECK(saw);
}

TEST_CASE("field_value covers every numeric column") {
    const auto& rec = dataset::builtin_table().records.front();
    for (const auto& col : dataset::numeric_columns()) {
        // Toronto carries every column in the builtin data.
        CHECK(dataset::field_value(rec, col).has_value());
    }
    CHECK(!dataset::field_value(rec, "no_such_column").has_value());
}

TEST_CASE("unknown columns are ignored") {
    std::string csv =
        "junk,name,distance_km,drive_time_min,income_2011,income_2016,shelter_2011,shelter_2016\n"
        "x,A,10,38,70000,80000,1300,1500\n";
    auto t = from_string(csv);
    REQUIRE(t.records.size() == 1);
    CHECK(t.records[0].name == "A");
    CHECK(t.records[0].income_2016 == 80000.0);
}

TEST_CASE("quoted names with commas survive the round trip") {
    std::string csv = std::string(kHeader) +
                      "\"Town, The - CA\",10,38,70000,80000,1300,1500,,,,,,,\n";
    auto t = from_string(csv);
    REQUIRE(t.records.size() == 1);
    CHECK(t.records[0].name == "Town, The - CA");
    std::ostringstream out;
    dataset::write_csv(t, out);
    auto t2 = from_string(out.str());
    CHECK(t2.records[0].name == "Town, The - CA");
}
