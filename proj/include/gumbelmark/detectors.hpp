#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gumbelmark/pivotal.hpp"

namespace gumbelmark {

/// phi_s divergence generator: x log x - x + 1 (s=1), -log x + x - 1 (s=0),
/// (1 - s + s x - x^s) / (s (1 - s)) otherwise. Limits are taken when s is
/// within 1e-9 of 0 or 1.
double phi_s(double x, double s);

/// phi_s-divergence between Ber(u) and Ber(v). +inf where the divergence is
/// unbounded (u at 0 or 1 with s <= 0).
double k_s(double u, double v, double s);

/// k_s when v < u (u = 1 included when the divergence is finite), else 0.
double k_s_plus(double u, double v, double s);

/// S_n^+(s) = max over {t : p_(t+1) >= c_plus} of K_s^+(t/n, p_(t)), with p_(n+1) = 1.
double trgof_stat(std::span<const double> pvalues, double s, double c_plus);

/// HC_n^+ = max over the same admissible set of sqrt(n) (t/n - p_(t)) / sqrt(p_(t) (1 - p_(t))).
double hc_plus(std::span<const double> pvalues, double c_plus);

/// n * stat >= (1 + delta) log log n; n must be at least 3.
bool reject_rule(double stat, std::size_t n, double delta);

/// Score functions of the sum-based rules.
struct ScoreKind {
    enum class Kind { Ars, Log, Ind, Opt };
    Kind kind = Kind::Ars;
    double param = 0.0;  // delta for Ind, Delta0 for Opt

    static ScoreKind ars() { return {Kind::Ars, 0.0}; }
    static ScoreKind log() { return {Kind::Log, 0.0}; }
    static ScoreKind ind(double delta) { return {Kind::Ind, delta}; }
    static ScoreKind opt(double delta0) { return {Kind::Opt, delta0}; }

    friend bool operator==(const ScoreKind&, const ScoreKind&) = default;
};

void validate(const ScoreKind& kind);
std::string to_string(const ScoreKind& kind);
ScoreKind parse_score_kind(const std::string& name, double param);

/// Precomputed score h(y); Opt holds the least-favorable law for its Delta0.
class ScoreFunction {
public:
    explicit ScoreFunction(ScoreKind kind);
    double operator()(double y) const;
    const ScoreKind& kind() const noexcept { return kind_; }

private:
    ScoreKind kind_;
    std::optional<AltLaw> law_;
    bool two_term_ = false;
    double low_exp_ = 0.0, high_exp_ = 0.0;
};

double score(double y, const ScoreKind& kind);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Null mean and variance of h(Y), Y ~ U(0,1): closed forms for Ars, Log and
/// Ind, quadrature for Opt.
Moments null_moments(const ScoreKind& kind);

/// The same moments computed by quadrature for every kind (tolerance 1e-10).
Moments null_moments_quadrature(const ScoreKind& kind);

/// sum_t h(y_t) >= threshold.
bool sum_test(std::span<const double> y, const ScoreKind& kind, double threshold);
double score_sum(std::span<const double> y, const ScoreFunction& h);

/// How the truncation point c_n^+ is fixed: an absolute value, 1/n or 1/n^2.
struct CPlus {
    enum class Rule { Fixed, InvN, InvN2 };
    Rule rule = Rule::InvN;
    double value = 0.0;

    double resolve(std::size_t n) const;
    std::string to_string() const;
    static CPlus parse(const std::string& text);
    static CPlus fixed(double c) { return {Rule::Fixed, c}; }
    static CPlus inv_n() { return {Rule::InvN, 0.0}; }
    static CPlus inv_n2() { return {Rule::InvN2, 0.0}; }

    friend bool operator==(const CPlus&, const CPlus&) = default;
};

enum class DetectorKind { TrGoF, HC, Sum };

/// Which test to run plus its critical value. The decision statistic is
/// n * S_n^+(s) for Tr-GoF, HC_n^+ for HC and sum_t h(Y_t) for sum rules;
/// H0 is rejected when the statistic is >= critical_value.
struct DetectorSpec {
    DetectorKind kind = DetectorKind::TrGoF;
    double s = 2.0;
    CPlus c_plus;
    ScoreKind score;
    double critical_value = 0.0;

    static DetectorSpec trgof(double s, CPlus c, double critical = 0.0) {
        return {DetectorKind::TrGoF, s, c, ScoreKind{}, critical};
    }
    static DetectorSpec hc(CPlus c, double critical = 0.0) { return {DetectorKind::HC, 2.0, c, ScoreKind{}, critical}; }
    static DetectorSpec sum(ScoreKind h, double critical = 0.0) {
        return {DetectorKind::Sum, 2.0, CPlus{}, h, critical};
    }

    friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

void validate(const DetectorSpec& spec);
std::string to_string(DetectorKind kind);

/// Evaluates one detector's statistic on pivots; reusable across many series.
class DetectorStatistic {
public:
    explicit DetectorStatistic(const DetectorSpec& spec);
    /// Statistic of the pivots y (p-values are formed as 1 - y).
    double operator()(std::span<const double> y) const;
    const DetectorSpec& spec() const noexcept { return spec_; }

private:
    DetectorSpec spec_;
    ScoreFunction score_;
};

double detector_statistic(const DetectorSpec& spec, const PivotSeries& pivots);

struct Verdict {
    double statistic = 0.0;
    std::size_t n_scored = 0;
    double critical_value = 0.0;
    bool reject = false;
    DetectorSpec detector;
};

Verdict detect(const DetectorSpec& spec, const PivotSeries& pivots);

}  // namespace gumbelmark
