#include "gumbelmark/tokensource.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gumbelmark/error.hpp"

namespace gumbelmark {
namespace {

void check_delta(double delta) { require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)"); }

}  // namespace

NtpDist::NtpDist(std::vector<double> probs) : probs_(std::move(probs)) {
    require(!probs_.empty(), "NTP distribution must be non-empty");
    double sum = 0.0;
    for (double p : probs_) {
        require(std::isfinite(p) && p >= 0.0, "NTP probabilities must be finite and non-negative");
        sum += p;
    }
    require(std::abs(sum - 1.0) <= sum_tolerance, "NTP probabilities must sum to 1");
}

NtpDist make_m2(double delta, std::uint32_t vocab_size) {
    check_delta(delta);
    require(vocab_size >= 2, "vocab_size must be at least 2");
    std::vector<double> probs(vocab_size, delta / (vocab_size - 1));
    probs[0] = 1.0 - delta;
    return NtpDist(std::move(probs));
}

NtpDist make_m1(double delta, std::uint32_t vocab_size, ZipfShape shape) {
    check_delta(delta);
    require(vocab_size >= 2, "vocab_size must be at least 2");
    require(shape.a > 0.0 && shape.b > 0.0, "Zipf shape parameters must be positive");
    std::vector<double> probs(vocab_size);
    double norm = 0.0;
    for (std::uint32_t w = 1; w < vocab_size; ++w) {
        // 0-based index w is 1-based token w+1, so (w+1)-1+b = w+b
        probs[w] = std::pow(static_cast<double>(w) + shape.b, -shape.a);
        norm += probs[w];
    }
    for (std::uint32_t w = 1; w < vocab_size; ++w) probs[w] *= delta / norm;
    probs[0] = 1.0 - delta;
    return NtpDist(std::move(probs));
}

NtpDist make_m1(double delta, std::uint32_t vocab_size, Stream& rng) {
    ZipfShape shape{rng.uniform(0.95, 1.5), rng.uniform(0.01, 0.1)};
    return make_m1(delta, vocab_size, shape);
}

NtpDist least_favorable(double delta) {
    check_delta(delta);
    const double top = 1.0 - delta;
    const auto k = static_cast<std::size_t>(std::floor(1.0 / top));
    std::vector<double> probs(k, top);
    const double remainder = 1.0 - top * static_cast<double>(k);
    // remainder below rounding noise counts as exactly zero
    if (remainder > 1e-14) probs.push_back(remainder);
    return NtpDist(std::move(probs));
}

double delta_of(const NtpDist& p) { return 1.0 - *std::max_element(p.probs().begin(), p.probs().end()); }

double entropy_of(const NtpDist& p) {
    double h = 0.0;
    for (double q : p.probs())
        if (q > 0.0) h -= q * std::log(q);
    return h;
}

void validate(const ToySource& source) {
    require(source.vocab_size >= 2, "toy source vocab_size must be at least 2");
    require(source.delta_min > 0.0 && source.delta_min <= source.delta_max && source.delta_max < 1.0,
            "toy source requires 0 < delta_min <= delta_max < 1");
    require(source.delta_max <= 1.0 - 1.0 / source.vocab_size, "toy source delta_max must not exceed 1 - 1/V");
}

NtpDist toy_next_dist(const ToySource& source, std::span<const TokenId> history) {
    validate(source);
    const std::uint64_t last = history.empty() ? 0xffffffffULL : history.back();
    const std::uint64_t h = derive_seed(source.seed, {last});
    const double unit = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
    const double delta = source.delta_min + (source.delta_max - source.delta_min) * unit;
    const auto top = static_cast<std::uint32_t>(mix64(h) % source.vocab_size);
    std::vector<double> probs(source.vocab_size, delta / (source.vocab_size - 1));
    probs[top] = 1.0 - delta;
    return NtpDist(std::move(probs));
}

}  // namespace gumbelmark
