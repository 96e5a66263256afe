#include "gumbelmark/pivotal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "gumbelmark/error.hpp"

namespace gumbelmark {
namespace {

constexpr double negligible = 1e-300;

}  // namespace

PivotSeries::PivotSeries(std::vector<double> pivots) : y(std::move(pivots)) {
    p.reserve(y.size());
    for (double v : y) {
        require(v > 0.0 && v < 1.0, "pivotal statistics must lie in (0,1)");
        p.push_back(1.0 - v);
    }
}

PivotSeries pivot_series(const TokenSeq& seq, const Key& key, std::uint32_t vocab_size) {
    validate(seq);
    std::vector<double> y;
    if (seq.size() > seq.m) y.reserve(seq.size() - seq.m);
    const std::span<const TokenId> tokens(seq.tokens);
    for (std::size_t t = seq.m; t < seq.size(); ++t)
        y.push_back(prf_uniform(key, tokens.subspan(t - seq.m, seq.m), tokens[t], vocab_size));
    return PivotSeries(std::move(y));
}

AltLaw::AltLaw(const NtpDist& dist) {
    std::vector<double> probs;
    probs.reserve(dist.size());
    for (double q : dist.probs())
        if (q > 0.0) probs.push_back(q);
    std::sort(probs.begin(), probs.end(), std::greater<>());
    for (double q : probs) {
        if (!groups_.empty() && groups_.back().prob == q)
            groups_.back().count += 1.0;
        else
            groups_.push_back({q, 1.0, 0.0, 0.0});
    }
    double count = 0.0, mass = 0.0;
    for (auto it = groups_.rbegin(); it != groups_.rend(); ++it) {
        count += it->count;
        mass += it->count * it->prob;
        it->tail_count = count;
        it->tail_mass = mass;
    }
}

double AltLaw::cdf(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= 1.0) return 1.0;
    const double log_r = std::log(r);
    double sum = 0.0;
    for (const auto& g : groups_) {
        const double power = std::exp(log_r / g.prob);
        // every later group has a smaller probability, hence a smaller power
        if (g.tail_mass * power < negligible) break;
        sum += g.count * g.prob * power;
    }
    return std::min(sum, 1.0);
}

double AltLaw::pdf(double r) const {
    require(r > 0.0 && r < 1.0, "density is evaluated on (0,1)");
    const double log_r = std::log(r);
    double sum = 0.0;
    for (const auto& g : groups_) {
        const double power = std::exp(log_r * (1.0 / g.prob - 1.0));
        if (g.tail_count * power < negligible) break;
        sum += g.count * power;
    }
    return sum;
}

double AltLaw::sample(double u) const {
    require(u > 0.0 && u < 1.0, "alt_sample needs u in (0,1)");
    if (degenerate()) return u;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double alt_cdf(const NtpDist& p, double r) {
    require(r >= 0.0 && r <= 1.0, "alt_cdf needs r in [0,1]");
    return AltLaw(p).cdf(r);
}

double alt_pdf(const NtpDist& p, double r) { return AltLaw(p).pdf(r); }

double alt_sample(const NtpDist& p, double u) { return AltLaw(p).sample(u); }

}  // namespace gumbelmark
