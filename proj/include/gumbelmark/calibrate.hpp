#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gumbelmark/detectors.hpp"

namespace gumbelmark {

struct CalibrationResult {
    DetectorSpec detector;
    std::size_t n = 0;
    double alpha = 0.0;
    double critical_value = 0.0;
    std::size_t reps = 0;
    std::size_t outer = 0;
    std::uint64_t seed = 0;
    /// alpha * reps < 10: fewer than ten null draws sit above the quantile.
    bool unstable = false;
};

/// Empirical (1 - alpha) quantile, type 1: the ceil((1 - alpha) * N)-th order statistic.
double empirical_quantile(std::vector<double> samples, double alpha);

/// Monte Carlo critical value: for each of `outer` rounds, the (1 - alpha)
/// quantile of the statistic over `reps` null series of n i.i.d. U(0,1)
/// pivots; the result is the mean of the round quantiles. Each null series
/// draws from its own (round, rep) substream, so the value does not depend on jobs.
CalibrationResult mc_critical(const DetectorSpec& detector, std::size_t n, double alpha, std::size_t reps = 10000,
                              std::size_t outer = 10, std::uint64_t seed = 0, unsigned jobs = 1);

/// mc_critical with an on-disk JSON cache keyed by (detector, n, alpha, reps, outer, seed).
CalibrationResult mc_critical_cached(const std::string& cache_dir, const DetectorSpec& detector, std::size_t n,
                                     double alpha, std::size_t reps, std::size_t outer, std::uint64_t seed,
                                     unsigned jobs = 1);

/// n E0 h + Phi^{-1}(1 - alpha) sqrt(n Var0 h).
double clt_critical(const ScoreKind& kind, std::size_t n, double alpha);

/// Fraction of `trials` fresh null series (n pivots each) whose statistic is >= critical_value.
double null_rejection_rate(const DetectorSpec& detector, std::size_t n, std::size_t trials, std::uint64_t seed,
                           unsigned jobs = 1);

/// n i.i.d. U(0,1) pivots from the given stream seed.
std::vector<double> null_pivots(std::size_t n, std::uint64_t stream_seed);

struct TradeoffPoint {
    double threshold;
    double alpha;  // fraction of H0 statistics >= threshold
    double beta;   // fraction of H1 statistics < threshold
};

/// Empirical (Type I, Type II) pairs as the threshold sweeps the pooled
/// sample in ascending order, ending at +inf.
std::vector<TradeoffPoint> tradeoff_curve(std::span<const double> h0, std::span<const double> h1);

}  // namespace gumbelmark
