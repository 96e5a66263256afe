#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gumbelmark/prf.hpp"
#include "gumbelmark/rng.hpp"

namespace gumbelmark {

/// Next-token probability vector over vocabulary indices 0..V-1.
class NtpDist {
public:
    static constexpr double sum_tolerance = 1e-12;

    /// Validates: V >= 2 (or a single atom), entries >= 0, sum within 1e-12 of 1.
    explicit NtpDist(std::vector<double> probs);

    std::span<const double> probs() const noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t w) const noexcept { return probs_[w]; }

private:
    std::vector<double> probs_;
};

/// (1-delta, delta/(V-1), ..., delta/(V-1)).
NtpDist make_m2(double delta, std::uint32_t vocab_size);

/// Zipf-tail parameters of one M1 draw: tail weight (w-1+b)^(-a) for w >= 2 (1-based).
struct ZipfShape {
    double a;
    double b;
};

/// Top entry 1-delta at index 0, remaining mass on a Zipf tail with a ~ U(0.95,1.5), b ~ U(0.01,0.1).
NtpDist make_m1(double delta, std::uint32_t vocab_size, Stream& rng);
NtpDist make_m1(double delta, std::uint32_t vocab_size, ZipfShape shape);

/// floor(1/(1-delta)) atoms of mass 1-delta plus the (nonzero) remainder atom.
NtpDist least_favorable(double delta);

/// 1 - max entry.
double delta_of(const NtpDist& p);

/// Shannon entropy in nats.
double entropy_of(const NtpDist& p);

/// Seeded stand-in for a language model: the next distribution depends only
/// on (seed, last token).
struct ToySource {
    std::uint32_t vocab_size = 50;
    double delta_min = 0.3;
    double delta_max = 0.3;
    std::uint64_t seed = 0;
};

void validate(const ToySource& source);

NtpDist toy_next_dist(const ToySource& source, std::span<const TokenId> history);

}  // namespace gumbelmark
