#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gumbelmark/error.hpp"
#include "gumbelmark/experiments.hpp"

using namespace gumbelmark;

TEST_CASE("mixture sizes") {
    CHECK(replaced_count(100, 1.0) == 1);
    CHECK(replaced_count(100, 0.0) == 100);
    CHECK(replaced_count(10000, 0.5) == 100);
    CHECK(q_min(1000, 5) == doctest::Approx(std::log(1.25) / std::log(1000.0)));
    CHECK(grid_R(0, 1, 5) == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
}

TEST_CASE("mixture sampler shares the null") {
    MixtureConfig cfg{200, 0.3, 0.5, 50, NtpMode::M2, 10, 4};
    const auto a = sample_mixture(cfg, 3);
    MixtureConfig other = cfg;
    other.p = 0.6;
    other.q = 0.2;
    other.ntp_mode = NtpMode::M1;
    CHECK(mixture_null(other, 3) == a.null.y);
    const std::size_t k = replaced_count(200, 0.3);
    for (std::size_t i = k; i < 200; ++i) CHECK(a.alt.y[i] == a.null.y[i]);
    cfg.p = 0.0;
    const auto all = mixture_alt(cfg, 3);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < 200; ++i) changed += all[i] != a.null.y[i];
    CHECK(changed > 190);
    cfg.q = 0.001;
    CHECK_THROWS_AS(validate(cfg), InputError);
}

TEST_CASE("min error sum") {
    const std::vector<double> h0{1, 2, 3}, h1{4, 5, 6};
    CHECK(min_error_sum(h0, h1, std::vector<double>{3.5}).value == 0.0);
    const auto e = min_error_sum(h0, h0, std::vector<double>{0, 2, 100});
    CHECK(e.value == doctest::Approx(1.0));
}

TEST_CASE("boundary thresholds") {
    CHECK(boundary_threshold(DetectorSpec::trgof(2, CPlus::inv_n()), 1000, 2.5) == 2.5);
    CHECK(boundary_threshold(DetectorSpec::hc(CPlus::inv_n()), 10000, 0.5) ==
          doctest::Approx(std::sqrt(3 * std::log(std::log(10000.0)))));
    CHECK(boundary_threshold(DetectorSpec::sum(ScoreKind::ars()), 100, 2) == doctest::Approx(100 + 20 * std::log(100.0)));
    CHECK(default_crit_grid(DetectorSpec::trgof(2, CPlus::inv_n())).size() == 1000);
}

TEST_CASE("boundary grid is independent of jobs") {
    ExperimentGrid g;
    g.p_values = {0.1, 0.45};
    g.q_values = {0.2, 0.8};
    g.n = 500;
    g.trials = 40;
    g.seed = 2;
    const auto fam = DetectorSpec::trgof(2, CPlus::inv_n());
    const auto a = boundary_grid(g, fam, 1);
    const auto b = boundary_grid(g, fam, 3);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i].min_error_sum == b[i].min_error_sum);
    CHECK(a[0].p == 0.1);
    CHECK(a[1].q == 0.8);
    CHECK(a[0].min_error_sum < a[3].min_error_sum);
}

TEST_CASE("entropy gap closed forms") {
    const std::vector<ScoreKind> scores{ScoreKind::log(), ScoreKind::ind(0.5), ScoreKind::ars()};
    const auto rows = entropy_gap_check(NtpDist({0.6, 0.4}), scores, 100000, 1);
    CHECK(rows[0].analytic == doctest::Approx(0.48).epsilon(1e-12));
    for (const auto& r : rows) CHECK(r.pass);
    const auto half = entropy_gap_check(NtpDist({0.5, 0.5}), scores, 100000, 2);
    CHECK(half[1].analytic == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(half[2].lower == doctest::Approx((std::numbers::pi * std::numbers::pi / 6 - 1) * std::log(2.0)));
    CHECK(half[2].upper == doctest::Approx(std::log(2.0)));
}

TEST_CASE("histogram study") {
    MixtureConfig cfg{300, 0.1, 0.3, 20, NtpMode::M2, 60, 1};
    const std::vector<double> s{2, 1};
    const auto h = histogram_study(cfg, s, CPlus::inv_n2(), 0.05);
    REQUIRE(h.size() == 2);
    CHECK(h[0].null_samples.size() == 60);
    CHECK(h[0].power > 0.5);
}

TEST_CASE("tolerance study runs") {
    ToleranceStudyConfig cfg;
    cfg.source = ToySource{50, 0.3, 0.3, 1};
    cfg.n = 100;
    cfg.sequences = 2;
    cfg.detectors = {DetectorSpec::sum(ScoreKind::ars(), 130.0)};
    const auto rows = tolerance_study(cfg, Key::from_string("t"));
    CHECK(rows.size() == 8);
    for (const auto& r : rows) CHECK(r.result.fraction <= 1.0);
}
