#include "gumbelmark/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "gumbelmark/error.hpp"
#include "gumbelmark/normal.hpp"
#include "gumbelmark/parallel.hpp"
#include "gumbelmark/rng.hpp"
#include "gumbelmark/serialize.hpp"

namespace gumbelmark {

double empirical_quantile(std::vector<double> samples, double alpha) {
    require(!samples.empty(), "quantile of an empty sample");
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    const double n = static_cast<double>(samples.size());
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, samples.size());
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank - 1), samples.end());
    return samples[rank - 1];
}

std::vector<double> null_pivots(std::size_t n, std::uint64_t stream_seed) {
    Stream rng(stream_seed);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.uniform();
    return y;
}

CalibrationResult mc_critical(const DetectorSpec& detector, std::size_t n, double alpha, std::size_t reps,
                              std::size_t outer, std::uint64_t seed, unsigned jobs) {
    require(n >= 3, "calibration needs n >= 3");
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(reps >= 100, "calibration needs at least 100 replications");
    require(outer >= 1, "calibration needs at least one outer round");
    const DetectorStatistic statistic(detector);
    std::vector<double> stats(reps * outer);
    parallel_for(stats.size(), jobs, [&](std::size_t i) {
        const std::size_t round = i / reps, rep = i % reps;
        stats[i] = statistic(null_pivots(n, derive_seed(seed, {tag::null_pivots, round, rep})));
    });
    double total = 0.0;
    for (std::size_t round = 0; round < outer; ++round) {
        const auto first = stats.begin() + static_cast<std::ptrdiff_t>(round * reps);
        total += empirical_quantile(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(reps)), alpha);
    }
    CalibrationResult result;
    result.detector = detector;
    result.n = n;
    result.alpha = alpha;
    result.critical_value = total / static_cast<double>(outer);
    result.detector.critical_value = result.critical_value;
    result.reps = reps;
    result.outer = outer;
    result.seed = seed;
    result.unstable = alpha * static_cast<double>(reps) < 10.0;
    return result;
}

CalibrationResult mc_critical_cached(const std::string& cache_dir, const DetectorSpec& detector, std::size_t n,
                                     double alpha, std::size_t reps, std::size_t outer, std::uint64_t seed,
                                     unsigned jobs) {
    namespace fs = std::filesystem;
    const fs::path path = fs::path(cache_dir) / (calibration_cache_key(detector, n, alpha, reps, outer, seed) + ".json");
    if (fs::exists(path)) {
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return calibration_from_json(text);
    }
    auto result = mc_critical(detector, n, alpha, reps, outer, seed, jobs);
    fs::create_directories(cache_dir);
    std::ofstream(path) << calibration_to_json(result) << '\n';
    return result;
}

double clt_critical(const ScoreKind& kind, std::size_t n, double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(n >= 1, "n must be positive");
    const Moments m = null_moments(kind);
    const double nn = static_cast<double>(n);
    const double z = alpha == 0.5 ? 0.0 : normal_quantile(1.0 - alpha);
    return nn * m.mean + z * std::sqrt(nn * m.variance);
}

double null_rejection_rate(const DetectorSpec& detector, std::size_t n, std::size_t trials, std::uint64_t seed,
                           unsigned jobs) {
    require(trials >= 1, "need at least one trial");
    const DetectorStatistic statistic(detector);
    std::vector<char> rejected(trials);
    parallel_for(trials, jobs, [&](std::size_t i) {
        rejected[i] = statistic(null_pivots(n, derive_seed(seed, {tag::trial, i}))) >= detector.critical_value;
    });
    return static_cast<double>(std::count(rejected.begin(), rejected.end(), 1)) / static_cast<double>(trials);
}

std::vector<TradeoffPoint> tradeoff_curve(std::span<const double> h0, std::span<const double> h1) {
    require(!h0.empty() && !h1.empty(), "trade-off curve needs samples under both hypotheses");
    std::vector<double> a(h0.begin(), h0.end()), b(h1.begin(), h1.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<double> thresholds;
    thresholds.reserve(a.size() + b.size() + 1);
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    thresholds.push_back(std::numeric_limits<double>::infinity());
    const double n0 = static_cast<double>(a.size()), n1 = static_cast<double>(b.size());
    std::vector<TradeoffPoint> curve;
    curve.reserve(thresholds.size());
    for (double c : thresholds) {
        const auto below0 = std::lower_bound(a.begin(), a.end(), c) - a.begin();
        const auto below1 = std::lower_bound(b.begin(), b.end(), c) - b.begin();
        curve.push_back({c, (n0 - static_cast<double>(below0)) / n0, static_cast<double>(below1) / n1});
    }
    return curve;
}

}  // namespace gumbelmark
