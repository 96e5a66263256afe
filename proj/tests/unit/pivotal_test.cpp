#include <doctest.h>

#include <cmath>
#include <vector>

#include "gumbelmark/pivotal.hpp"
#include "gumbelmark/prf.hpp"
#include "gumbelmark/quadrature.hpp"
#include "gumbelmark/rng.hpp"
#include "gumbelmark/watermark.hpp"

using namespace gumbelmark;

static NtpDist random_ntp(Stream& rng, std::size_t V) {
    std::vector<double> p(V);
    double s = 0.0;
    for (auto& x : p) s += (x = rng.uniform());
    for (auto& x : p) x /= s;
    p[0] = 1.0;
    for (std::size_t i = 1; i < V; ++i) p[0] -= p[i];
    return NtpDist(p);
}

TEST_CASE("alt law closed forms") {
    const NtpDist half({0.5, 0.5});
    CHECK(alt_cdf(half, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(alt_cdf(half, 1.0) == 1.0);
    CHECK(alt_cdf(half, 0.0) == 0.0);
    CHECK(alt_pdf(half, 0.5) == doctest::Approx(1.0));
    CHECK(alt_pdf(half, 0.3) == doctest::Approx(0.6));
    CHECK(alt_sample(half, 0.25) == doctest::Approx(0.5).epsilon(1e-12));
    const NtpDist one({1.0});
    CHECK(alt_pdf(one, 0.3) == doctest::Approx(1.0));
    CHECK(alt_cdf(one, 0.3) == doctest::Approx(0.3));
    CHECK(alt_cdf(NtpDist({0.5, 0.5, 0.0}), 0.5) == doctest::Approx(0.25));
}

TEST_CASE("alt law properties on random distributions") {
    Stream rng(42);
    for (int rep = 0; rep < 10; ++rep) {
        const auto p = random_ntp(rng, 2 + rep);
        const AltLaw law(p);
        for (int i = 1; i < 100; ++i) {
            const double r = i / 100.0;
            CHECK(law.cdf(r) <= r + 1e-15);
        }
        CHECK(law.cdf(0.5) < 0.5);
        const auto q = integrate_unit([&](double y) { return law.pdf(y); }, 1e-10);
        CHECK(q.value == doctest::Approx(1.0).epsilon(1e-8));
        for (double u : {1e-6, 0.1, 0.5, 0.9, 1 - 1e-6}) CHECK(std::abs(law.cdf(law.sample(u)) - u) <= 1e-10);
    }
}

TEST_CASE("pivot_series aligns with prf") {
    TokenSeq s;
    s.m = 2;
    for (TokenId t : {3u, 1u, 4u, 1u, 5u}) s.push_back(t, Provenance::Sampled);
    const Key k = Key::from_string("pk");
    const auto ps = pivot_series(s, k, 10);
    REQUIRE(ps.size() == 3);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const TokenId win[2] = {s.tokens[i], s.tokens[i + 1]};
        CHECK(ps.y[i] == prf_uniform(k, win, s.tokens[i + 2], 10));
        CHECK(ps.y[i] + ps.p[i] == doctest::Approx(1.0));
    }
}
