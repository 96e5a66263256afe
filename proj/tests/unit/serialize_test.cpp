#include <doctest.h>

#include "gumbelmark/error.hpp"
#include "gumbelmark/serialize.hpp"

using namespace gumbelmark;

TEST_CASE("token sequence round trip") {
    TokenSeq s;
    s.m = 2;
    s.push_back(3, Provenance::Prompt);
    s.push_back(4, Provenance::Prompt);
    s.push_back(9, Provenance::Watermarked);
    s.push_back(1, Provenance::Edited);
    CHECK(tokenseq_from_json(tokenseq_to_json(s)) == s);
    CHECK_THROWS_AS(tokenseq_from_json("{"), DataError);
    CHECK_THROWS_AS(tokenseq_from_json(R"({"tokens":[1],"provenance":["Q"],"m":0})"), DataError);
    CHECK_THROWS_AS(tokenseq_from_json(R"({"tokens":[1,2],"provenance":["P"],"m":1})"), DataError);
}

TEST_CASE("detector round trip") {
    for (const auto& d : {DetectorSpec::trgof(1.5, CPlus::inv_n2(), 3.25), DetectorSpec::hc(CPlus::fixed(0.001), 4.0),
                          DetectorSpec::sum(ScoreKind::opt(0.1), -2.5), DetectorSpec::sum(ScoreKind::ind(0.5))})
        CHECK(detector_from_json(detector_to_json(d)) == d);
    CHECK_THROWS(detector_from_json(R"({"kind":"nope"})"));
}

TEST_CASE("ntp and calibration round trip") {
    const NtpDist p({0.6, 0.4});
    const auto back = ntp_from_json(ntp_to_json(p));
    CHECK(back[0] == 0.6);
    CHECK(back[1] == 0.4);
    CalibrationResult c{DetectorSpec::hc(CPlus::inv_n()), 400, 0.01, 12.5, 1000, 10, 3, false};
    const auto c2 = calibration_from_json(calibration_to_json(c));
    CHECK(c2.detector == c.detector);
    CHECK(c2.critical_value == 12.5);
    CHECK(c2.seed == 3);
    CHECK(calibration_cache_key(c.detector, 400, 0.01, 1000, 10, 3) !=
          calibration_cache_key(c.detector, 400, 0.01, 1000, 10, 4));
}

TEST_CASE("doubles and csv") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
    CsvTable t({"a", "b"});
    t.row({"x", "y"});
    const double nums[] = {1.5, 2};
    t.row_numbers(nums);
    CHECK(t.str() == "a,b\nx,y\n1.5,2\n");
    CHECK(t.rows() == 2);
    CHECK_THROWS(t.row({"only"}));
    CHECK(pivots_to_csv(PivotSeries({0.25}), 5) == "t,y,p\n5,0.25,0.75\n");
}
