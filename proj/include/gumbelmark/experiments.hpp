#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gumbelmark/detectors.hpp"
#include "gumbelmark/edits.hpp"
#include "gumbelmark/pivotal.hpp"
#include "gumbelmark/prf.hpp"
#include "gumbelmark/tokensource.hpp"

namespace gumbelmark {

enum class NtpMode { M1, M2 };

std::string to_string(NtpMode mode);
NtpMode parse_ntp_mode(const std::string& name);

/// Sparse mixture alternative: eps_n = n^-p of the pivots carry watermark
/// signal from NTP distributions with Delta_n = n^-q.
struct MixtureConfig {
    std::size_t n = 1000;
    double p = 0.2;
    double q = 0.5;
    std::uint32_t vocab_size = 1000;
    NtpMode ntp_mode = NtpMode::M2;
    std::size_t trials = 200;
    std::uint64_t seed = 0;
};

void validate(const MixtureConfig& cfg);

/// Smallest admissible q: log_n(V/(V-1)), where 1 - n^-q reaches 1/V.
double q_min(std::size_t n, std::uint32_t vocab_size);

/// ceil(n * n^-p), the number of replaced entries.
std::size_t replaced_count(std::size_t n, double p);

/// n i.i.d. U(0,1) pivots of trial `trial`; the same for every (p, q).
std::vector<double> mixture_null(const MixtureConfig& cfg, std::size_t trial);

/// The null pivots of the same trial with the first replaced_count entries
/// redrawn from the watermarked pivot law of their NTP distribution.
std::vector<double> mixture_alt(const MixtureConfig& cfg, std::size_t trial);

struct MixtureDraw {
    PivotSeries alt;
    PivotSeries null;
};

MixtureDraw sample_mixture(const MixtureConfig& cfg, std::size_t trial);

/// R(a, b, K) = {a + k (b - a) / (K - 1) : k = 0..K-1}.
std::vector<double> grid_R(double a, double b, std::size_t K);

/// Value a study records per series: log(n S_n^+(s)) for Tr-GoF, HC_n^+ for
/// HC, the score sum for sum rules.
double study_statistic(const DetectorStatistic& stat, std::span<const double> y);

struct HistogramSeries {
    DetectorSpec detector;
    std::vector<double> null_samples;
    std::vector<double> alt_samples;
    double null_quantile = 0.0;  // empirical (1 - alpha) quantile of null_samples
    double power = 0.0;          // fraction of alt_samples >= null_quantile
};

std::vector<HistogramSeries> histogram_study(const MixtureConfig& cfg, std::span<const DetectorSpec> detectors,
                                             double alpha, unsigned jobs = 1);

/// Tr-GoF histograms for each s with a shared c_plus.
std::vector<HistogramSeries> histogram_study(const MixtureConfig& cfg, std::span<const double> s_values, CPlus c_plus,
                                             double alpha, unsigned jobs = 1);

struct ExperimentGrid {
    std::vector<double> p_values;
    std::vector<double> q_values;
    /// Candidate critical values; empty selects the family default.
    std::vector<double> crit_grid;
    std::size_t n = 1000;
    std::size_t trials = 200;
    std::uint64_t seed = 0;
    std::uint32_t vocab_size = 5;
    NtpMode ntp_mode = NtpMode::M2;
};

void validate(const ExperimentGrid& grid);

/// Default tuning sets: R(0,30,1000) on log(n S) for Tr-GoF, delta in
/// {0, 0.2, ..., 4} for HC, and per-score C grids for sum rules.
std::vector<double> default_crit_grid(const DetectorSpec& family);

/// Threshold on the study statistic implied by candidate `c`:
/// c itself for Tr-GoF, sqrt(2 (1 + c) log log n) for HC,
/// n E0 h + c sqrt(n) log n for sum rules.
double boundary_threshold(const DetectorSpec& family, std::size_t n, double c);

struct ErrorSum {
    double value = 1.0;
    std::size_t best_index = 0;  // into the threshold list
};

/// min over candidate thresholds of (fraction of h0 >= t) + (fraction of h1 < t).
ErrorSum min_error_sum(std::span<const double> h0, std::span<const double> h1, std::span<const double> thresholds);

struct BoundaryCell {
    double p;
    double q;
    double min_error_sum;
    double best_critical;
};

/// Min error sum per (p, q) cell, p-major. Null statistics are shared by all cells.
std::vector<BoundaryCell> boundary_grid(const ExperimentGrid& grid, const DetectorSpec& family, unsigned jobs = 1);

struct GapRow {
    ScoreKind score;
    double mc_gap = 0.0;
    double std_error = 0.0;
    double analytic = 0.0;  // closed form for Log and Ind, quadrature otherwise
    double lower = 0.0;     // entropy bounds, Ars only
    double upper = 0.0;
    bool pass = false;
};

/// E1 h - E0 h by Monte Carlo through Gumbel-max decoding with true-random
/// uniforms, compared with the analytic gap (within 4 standard errors) and,
/// for Ars, with the entropy bounds [(pi^2/6 - 1) Ent, Ent].
std::vector<GapRow> entropy_gap_check(const NtpDist& p, std::span<const ScoreKind> scores, std::size_t samples,
                                      std::uint64_t seed);

struct ToleranceStudyConfig {
    ToySource source;
    std::uint32_t n = 400;
    std::uint32_t m = 5;
    std::size_t sequences = 20;
    std::vector<EditKind> kinds{EditKind::Substitute, EditKind::Insert, EditKind::Delete, EditKind::Adversarial};
    std::vector<DetectorSpec> detectors;  // with critical values set
    std::uint64_t seed = 0;
};

struct ToleranceRow {
    std::size_t sequence;
    DetectorSpec detector;
    EditKind kind;
    ToleranceResult result;
};

/// Watermarks `sequences` texts from the toy source and finds every
/// detector's edit-tolerance limit for every edit kind.
std::vector<ToleranceRow> tolerance_study(const ToleranceStudyConfig& cfg, const Key& key, unsigned jobs = 1);

}  // namespace gumbelmark
