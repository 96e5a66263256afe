#include <doctest.h>

#include "gumbelmark/efficiency.hpp"

using namespace gumbelmark;

static double rate(double d, double e) { return optimal_rate(EfficiencyQuery{d, e, 1e-11}); }

TEST_CASE("optimal rate goldens") {
    CHECK(rate(0.4, 1.0) == doctest::Approx(0.248420682698998).epsilon(1e-9));
    CHECK(rate(0.4, 0.5) == doctest::Approx(0.0413764657556366).epsilon(1e-9));
    CHECK(rate(0.2, 1.0) == doctest::Approx(0.0806949681214239).epsilon(1e-9));
    CHECK(rate(0.6, 1.0) == doctest::Approx(0.681003648667969).epsilon(1e-9));
    CHECK(rate(0.75, 0.5) == doctest::Approx(0.140933007381354).epsilon(1e-9));
    CHECK(rate(0.1, 0.3) == doctest::Approx(0.00286293171700924).epsilon(1e-9));
}

TEST_CASE("optimal rate limits") {
    CHECK(rate(0.4, 1e-6) < 1e-10);
    CHECK(rate(1e-6, 1.0) < 1e-4);
}

TEST_CASE("rate curve") {
    const auto grid = delta_grid(0.01, 0.9, 0.005);
    CHECK(grid.size() == 179);
    const auto one = rate_curve(grid, 1.0);
    const auto half = rate_curve(grid, 0.5);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(half[i].rate < one[i].rate);
        if (i) CHECK(one[i].rate >= one[i - 1].rate);
    }
}
