#include "gumbelmark/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gumbelmark/error.hpp"
#include "gumbelmark/quadrature.hpp"

namespace gumbelmark {
namespace {

constexpr double branch_tol = 1e-9;
constexpr double inf = std::numeric_limits<double>::infinity();

/// x log(x / y) with 0 log 0 = 0.
double xlogx_over(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(x / y); }

std::vector<double> sorted_pvalues(std::span<const double> pvalues) {
    require(!pvalues.empty(), "p-value series must be non-empty");
    std::vector<double> p(pvalues.begin(), pvalues.end());
    for (double v : p) require(v > 0.0 && v < 1.0, "p-values must lie in (0,1)");
    std::sort(p.begin(), p.end());
    return p;
}

/// Calls visit(t, p_(t)) for each 1-based t with p_(t+1) >= c_plus.
template <class Visit>
void for_each_admissible(const std::vector<double>& p, double c_plus, Visit&& visit) {
    const std::size_t n = p.size();
    // p_(t+1) >= c_plus holds for every t from the first index whose successor clears c_plus
    const auto first = std::lower_bound(p.begin(), p.end(), c_plus) - p.begin();
    const std::size_t t0 = first == 0 ? 1 : static_cast<std::size_t>(first);
    for (std::size_t t = t0; t <= n; ++t) visit(t, p[t - 1]);
}

}  // namespace

double phi_s(double x, double s) {
    require(x > 0.0, "phi_s needs x > 0");
    if (std::abs(s - 1.0) < branch_tol) return x * std::log(x) - x + 1.0;
    if (std::abs(s) < branch_tol) return -std::log(x) + x - 1.0;
    return (1.0 - s + s * x - std::pow(x, s)) / (s * (1.0 - s));
}

double k_s(double u, double v, double s) {
    require(v > 0.0 && v < 1.0, "k_s needs v in (0,1)");
    require(u >= 0.0 && u <= 1.0, "k_s needs u in [0,1]");
    if (std::abs(s - 1.0) < branch_tol) return xlogx_over(u, v) + xlogx_over(1.0 - u, 1.0 - v);
    if (std::abs(s) < branch_tol) {
        if (u == 0.0 || u == 1.0) return inf;
        return xlogx_over(v, u) + xlogx_over(1.0 - v, 1.0 - u);
    }
    if (std::abs(s - 2.0) < branch_tol) return (u - v) * (u - v) / (2.0 * v * (1.0 - v));
    if (s < 0.0 && (u == 0.0 || u == 1.0)) return inf;
    const double a = u == 0.0 ? 0.0 : std::pow(u, s) * std::pow(v, 1.0 - s);
    const double b = u == 1.0 ? 0.0 : std::pow(1.0 - u, s) * std::pow(1.0 - v, 1.0 - s);
    return std::max(0.0, (1.0 - a - b) / (s * (1.0 - s)));
}

double k_s_plus(double u, double v, double s) {
    if (!(v > 0.0 && v < u && u <= 1.0)) return 0.0;
    const double k = k_s(u, v, s);
    return std::isfinite(k) ? k : 0.0;
}

double trgof_stat(std::span<const double> pvalues, double s, double c_plus) {
    require(s >= -1.0 && s <= 2.0, "s must lie in [-1, 2]");
    const auto p = sorted_pvalues(pvalues);
    const double n = static_cast<double>(p.size());
    double best = 0.0;
    for_each_admissible(p, c_plus, [&](std::size_t t, double pt) {
        best = std::max(best, k_s_plus(static_cast<double>(t) / n, pt, s));
    });
    return best;
}

double hc_plus(std::span<const double> pvalues, double c_plus) {
    const auto p = sorted_pvalues(pvalues);
    const double n = static_cast<double>(p.size());
    const double root_n = std::sqrt(n);
    double best = -inf;
    for_each_admissible(p, c_plus, [&](std::size_t t, double pt) {
        best = std::max(best, root_n * (static_cast<double>(t) / n - pt) / std::sqrt(pt * (1.0 - pt)));
    });
    return best;
}

bool reject_rule(double stat, std::size_t n, double delta) {
    require(n >= 3, "the log log n rule needs n >= 3");
    return static_cast<double>(n) * stat >= (1.0 + delta) * std::log(std::log(static_cast<double>(n)));
}

void validate(const ScoreKind& kind) {
    if (kind.kind == ScoreKind::Kind::Ind || kind.kind == ScoreKind::Kind::Opt)
        require(kind.param > 0.0 && kind.param < 1.0, "score parameter must lie in (0,1)");
}

std::string to_string(const ScoreKind& kind) {
    switch (kind.kind) {
        case ScoreKind::Kind::Ars: return "ars";
        case ScoreKind::Kind::Log: return "log";
        case ScoreKind::Kind::Ind: return "ind";
        case ScoreKind::Kind::Opt: return "opt";
    }
    throw InvariantError("unknown score kind");
}

ScoreKind parse_score_kind(const std::string& name, double param) {
    ScoreKind k;
    if (name == "ars")
        k = ScoreKind::ars();
    else if (name == "log")
        k = ScoreKind::log();
    else if (name == "ind")
        k = ScoreKind::ind(param);
    else if (name == "opt")
        k = ScoreKind::opt(param);
    else
        throw InputError("unknown score '" + name + "' (expected ars, log, ind or opt)");
    validate(k);
    return k;
}

ScoreFunction::ScoreFunction(ScoreKind kind) : kind_(kind) {
    validate(kind_);
    if (kind_.kind != ScoreKind::Kind::Opt) return;
    const double d0 = kind_.param;
    if (d0 < 0.5) {
        // least_favorable(d0) = (1 - d0, d0): density y^(d0/(1-d0)) + y^(1/d0 - 1)
        two_term_ = true;
        low_exp_ = d0 / (1.0 - d0);
        high_exp_ = 1.0 / d0 - 1.0;
    } else {
        law_.emplace(least_favorable(d0));
    }
}

double ScoreFunction::operator()(double y) const {
    require(y > 0.0 && y < 1.0, "score needs y in (0,1)");
    switch (kind_.kind) {
        case ScoreKind::Kind::Ars: return -std::log1p(-y);
        case ScoreKind::Kind::Log: return std::log(y);
        case ScoreKind::Kind::Ind: return y >= kind_.param ? 1.0 : 0.0;
        case ScoreKind::Kind::Opt:
            if (two_term_) {
                // log(y^a + y^b) = a log y + log1p(y^(b-a)), b > a
                const double ly = std::log(y);
                return low_exp_ * ly + std::log1p(std::exp((high_exp_ - low_exp_) * ly));
            }
            return std::log(law_->pdf(y));
    }
    throw InvariantError("unknown score kind");
}

double score(double y, const ScoreKind& kind) { return ScoreFunction(kind)(y); }

Moments null_moments_quadrature(const ScoreKind& kind) {
    const ScoreFunction h(kind);
    constexpr double tol = 1e-10;
    auto first = integrate_unit([&](double y) { return h(y); }, 0.25 * tol);
    auto second = integrate_unit(
        [&](double y) {
            const double v = h(y);
            return v * v;
        },
        0.25 * tol);
    return {first.value, second.value - first.value * first.value};
}

Moments null_moments(const ScoreKind& kind) {
    validate(kind);
    switch (kind.kind) {
        // -log(1-U) is Exp(1); -log U is Exp(1) so log U has mean -1
        case ScoreKind::Kind::Ars: return {1.0, 1.0};
        case ScoreKind::Kind::Log: return {-1.0, 1.0};
        case ScoreKind::Kind::Ind: return {1.0 - kind.param, kind.param * (1.0 - kind.param)};
        case ScoreKind::Kind::Opt: return null_moments_quadrature(kind);
    }
    throw InvariantError("unknown score kind");
}

double score_sum(std::span<const double> y, const ScoreFunction& h) {
    double total = 0.0;
    for (double v : y) total += h(v);
    return total;
}

bool sum_test(std::span<const double> y, const ScoreKind& kind, double threshold) {
    return score_sum(y, ScoreFunction(kind)) >= threshold;
}

double CPlus::resolve(std::size_t n) const {
    const double nn = static_cast<double>(n);
    switch (rule) {
        case Rule::Fixed: return value;
        case Rule::InvN: return 1.0 / nn;
        case Rule::InvN2: return 1.0 / (nn * nn);
    }
    throw InvariantError("unknown c_plus rule");
}

std::string CPlus::to_string() const {
    switch (rule) {
        case Rule::InvN: return "1/n";
        case Rule::InvN2: return "1/n^2";
        case Rule::Fixed: break;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

CPlus CPlus::parse(const std::string& text) {
    if (text == "1/n") return inv_n();
    if (text == "1/n^2" || text == "1/n2") return inv_n2();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InputError("c_plus must be a number in [0,1], '1/n' or '1/n^2'");
    }
    require(used == text.size() && v >= 0.0 && v <= 1.0, "c_plus must be a number in [0,1], '1/n' or '1/n^2'");
    return fixed(v);
}

void validate(const DetectorSpec& spec) {
    switch (spec.kind) {
        case DetectorKind::TrGoF: require(spec.s >= -1.0 && spec.s <= 2.0, "s must lie in [-1, 2]"); [[fallthrough]];
        case DetectorKind::HC:
            require(spec.c_plus.rule != CPlus::Rule::Fixed || (spec.c_plus.value >= 0.0 && spec.c_plus.value <= 1.0),
                    "c_plus must lie in [0, 1]");
            break;
        case DetectorKind::Sum: validate(spec.score); break;
    }
}

std::string to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::TrGoF: return "trgof";
        case DetectorKind::HC: return "hc";
        case DetectorKind::Sum: return "sum";
    }
    throw InvariantError("unknown detector kind");
}

DetectorStatistic::DetectorStatistic(const DetectorSpec& spec) : spec_(spec), score_(spec.score) { validate(spec_); }

double DetectorStatistic::operator()(std::span<const double> y) const {
    require(!y.empty(), "pivot series must be non-empty");
    if (spec_.kind == DetectorKind::Sum) return score_sum(y, score_);
    std::vector<double> p(y.size());
    std::transform(y.begin(), y.end(), p.begin(), [](double v) { return 1.0 - v; });
    const double c = spec_.c_plus.resolve(y.size());
    if (spec_.kind == DetectorKind::HC) return hc_plus(p, c);
    return static_cast<double>(y.size()) * trgof_stat(p, spec_.s, c);
}

double detector_statistic(const DetectorSpec& spec, const PivotSeries& pivots) {
    return DetectorStatistic(spec)(pivots.y);
}

Verdict detect(const DetectorSpec& spec, const PivotSeries& pivots) {
    const double stat = detector_statistic(spec, pivots);
    return {stat, pivots.size(), spec.critical_value, stat >= spec.critical_value, spec};
}

}  // namespace gumbelmark
