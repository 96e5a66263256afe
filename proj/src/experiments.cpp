#include "gumbelmark/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gumbelmark/calibrate.hpp"
#include "gumbelmark/error.hpp"
#include "gumbelmark/parallel.hpp"
#include "gumbelmark/quadrature.hpp"
#include "gumbelmark/rng.hpp"
#include "gumbelmark/watermark.hpp"

namespace gumbelmark {

std::string to_string(NtpMode mode) { return mode == NtpMode::M1 ? "M1" : "M2"; }

NtpMode parse_ntp_mode(const std::string& name) {
    if (name == "M1" || name == "m1") return NtpMode::M1;
    if (name == "M2" || name == "m2") return NtpMode::M2;
    throw InputError("unknown NTP mode '" + name + "' (expected M1 or M2)");
}

double q_min(std::size_t n, std::uint32_t vocab_size) {
    require(n >= 2, "n must be at least 2");
    require(vocab_size >= 2, "vocabulary size must be at least 2");
    const double v = vocab_size;
    return std::log(v / (v - 1.0)) / std::log(static_cast<double>(n));
}

void validate(const MixtureConfig& cfg) {
    require(cfg.n >= 2, "mixture n must be at least 2");
    require(cfg.p >= 0.0 && cfg.p <= 1.0, "p must lie in [0,1]");
    require(cfg.q >= 0.0 && cfg.q <= 1.0, "q must lie in [0,1]");
    require(cfg.vocab_size >= 2, "vocabulary size must be at least 2");
    require(cfg.trials >= 1, "trials must be positive");
    require(cfg.q >= q_min(cfg.n, cfg.vocab_size) - 1e-12,
            "q is below log_n(V/(V-1)): 1 - n^-q would fall under 1/V");
}

std::size_t replaced_count(std::size_t n, double p) {
    const double dn = static_cast<double>(n);
    const double k = std::ceil(dn * std::pow(dn, -p) - 1e-9);
    return std::min(n, static_cast<std::size_t>(std::max(0.0, k)));
}

namespace {

double mixture_delta(const MixtureConfig& cfg) {
    const double cap = 1.0 - 1.0 / static_cast<double>(cfg.vocab_size);
    return std::min(cap, std::pow(static_cast<double>(cfg.n), -cfg.q));
}

}  // namespace

std::vector<double> mixture_null(const MixtureConfig& cfg, std::size_t trial) {
    validate(cfg);
    return null_pivots(cfg.n, derive_seed(cfg.seed, {tag::null_pivots, trial}));
}

std::vector<double> mixture_alt(const MixtureConfig& cfg, std::size_t trial) {
    auto y = mixture_null(cfg, trial);
    const std::size_t k = replaced_count(cfg.n, cfg.p);
    const double delta = mixture_delta(cfg);
    Stream u(derive_seed(cfg.seed, {tag::alt_pivots, trial}));
    if (cfg.ntp_mode == NtpMode::M2) {
        const AltLaw law(make_m2(delta, cfg.vocab_size));
        for (std::size_t i = 0; i < k; ++i) y[i] = law.sample(u.uniform());
    } else {
        Stream shapes(derive_seed(cfg.seed, {tag::ntp, trial}));
        for (std::size_t i = 0; i < k; ++i) {
            const AltLaw law(make_m1(delta, cfg.vocab_size, shapes));
            y[i] = law.sample(u.uniform());
        }
    }
    return y;
}

MixtureDraw sample_mixture(const MixtureConfig& cfg, std::size_t trial) {
    return {PivotSeries(mixture_alt(cfg, trial)), PivotSeries(mixture_null(cfg, trial))};
}

std::vector<double> grid_R(double a, double b, std::size_t K) {
    require(K >= 2, "grid needs K >= 2");
    require(std::isfinite(a) && std::isfinite(b), "grid endpoints must be finite");
    std::vector<double> g(K);
    for (std::size_t k = 0; k < K; ++k)
        g[k] = a + static_cast<double>(k) / static_cast<double>(K - 1) * (b - a);
    return g;
}

double study_statistic(const DetectorStatistic& stat, std::span<const double> y) {
    const double v = stat(y);
    return stat.spec().kind == DetectorKind::TrGoF ? std::log(v) : v;
}

std::vector<HistogramSeries> histogram_study(const MixtureConfig& cfg, std::span<const DetectorSpec> detectors,
                                             double alpha, unsigned jobs) {
    validate(cfg);
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(!detectors.empty(), "histogram study needs at least one detector");
    std::vector<DetectorStatistic> stats;
    for (const auto& d : detectors) {
        validate(d);
        stats.emplace_back(d);
    }
    const std::size_t D = stats.size();
    std::vector<double> h0(D * cfg.trials), h1(D * cfg.trials);
    parallel_for(cfg.trials, jobs, [&](std::size_t i) {
        const auto y0 = mixture_null(cfg, i);
        const auto y1 = mixture_alt(cfg, i);
        for (std::size_t d = 0; d < D; ++d) {
            h0[d * cfg.trials + i] = study_statistic(stats[d], y0);
            h1[d * cfg.trials + i] = study_statistic(stats[d], y1);
        }
    });
    std::vector<HistogramSeries> out;
    for (std::size_t d = 0; d < D; ++d) {
        HistogramSeries s;
        s.detector = detectors[d];
        s.null_samples.assign(h0.begin() + d * cfg.trials, h0.begin() + (d + 1) * cfg.trials);
        s.alt_samples.assign(h1.begin() + d * cfg.trials, h1.begin() + (d + 1) * cfg.trials);
        s.null_quantile = empirical_quantile(s.null_samples, alpha);
        const auto hits = std::count_if(s.alt_samples.begin(), s.alt_samples.end(),
                                        [&](double v) { return v >= s.null_quantile; });
        s.power = static_cast<double>(hits) / static_cast<double>(cfg.trials);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<HistogramSeries> histogram_study(const MixtureConfig& cfg, std::span<const double> s_values, CPlus c_plus,
                                             double alpha, unsigned jobs) {
    std::vector<DetectorSpec> dets;
    for (double s : s_values) dets.push_back(DetectorSpec::trgof(s, c_plus));
    return histogram_study(cfg, dets, alpha, jobs);
}

void validate(const ExperimentGrid& grid) {
    require(!grid.p_values.empty() && !grid.q_values.empty(), "p and q grids must be non-empty");
    require(grid.n >= 3, "grid n must be at least 3");
    require(grid.trials >= 1, "trials must be positive");
    MixtureConfig probe{grid.n, 0.0, 1.0, grid.vocab_size, grid.ntp_mode, grid.trials, grid.seed};
    for (double p : grid.p_values) {
        probe.p = p;
        validate(probe);
    }
    probe.p = 0.0;
    for (double q : grid.q_values) {
        probe.q = q;
        validate(probe);
    }
}

std::vector<double> default_crit_grid(const DetectorSpec& family) {
    switch (family.kind) {
        case DetectorKind::TrGoF:
            return grid_R(0.0, 30.0, 1000);
        case DetectorKind::HC:
            return grid_R(0.0, 4.0, 21);
        case DetectorKind::Sum:
            switch (family.score.kind) {
                case ScoreKind::Kind::Ars:
                    return grid_R(8.0, 60.0, 1000);
                case ScoreKind::Kind::Log:
                    return grid_R(-20.0, 0.0, 1000);
                default:
                    return grid_R(-10.0, 10.0, 1000);
            }
    }
    throw InvariantError("unhandled detector kind");
}

double boundary_threshold(const DetectorSpec& family, std::size_t n, double c) {
    const double dn = static_cast<double>(n);
    switch (family.kind) {
        case DetectorKind::TrGoF:
            return c;
        case DetectorKind::HC: {
            require(n >= 3, "HC threshold needs n >= 3");
            return std::sqrt(2.0 * (1.0 + c) * std::log(std::log(dn)));
        }
        case DetectorKind::Sum:
            return dn * null_moments(family.score).mean + c * std::sqrt(dn) * std::log(dn);
    }
    throw InvariantError("unhandled detector kind");
}

ErrorSum min_error_sum(std::span<const double> h0, std::span<const double> h1, std::span<const double> thresholds) {
    require(!h0.empty() && !h1.empty(), "error sums need samples under both hypotheses");
    require(!thresholds.empty(), "error sums need at least one threshold");
    std::vector<double> a(h0.begin(), h0.end()), b(h1.begin(), h1.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    ErrorSum best{2.0, 0};
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        const double t = thresholds[k];
        const auto above0 = a.end() - std::lower_bound(a.begin(), a.end(), t);
        const auto below1 = std::lower_bound(b.begin(), b.end(), t) - b.begin();
        const double sum = static_cast<double>(above0) / static_cast<double>(a.size()) +
                           static_cast<double>(below1) / static_cast<double>(b.size());
        if (sum < best.value) best = {sum, k};
    }
    return best;
}

std::vector<BoundaryCell> boundary_grid(const ExperimentGrid& grid, const DetectorSpec& family, unsigned jobs) {
    validate(grid);
    DetectorSpec spec = family;
    spec.critical_value = 0.0;
    validate(spec);
    const DetectorStatistic stat(spec);
    const auto crit = grid.crit_grid.empty() ? default_crit_grid(spec) : grid.crit_grid;
    std::vector<double> thresholds;
    for (double c : crit) thresholds.push_back(boundary_threshold(spec, grid.n, c));

    const std::size_t N = grid.trials;
    MixtureConfig base{grid.n, 0.0, 1.0, grid.vocab_size, grid.ntp_mode, N, grid.seed};
    std::vector<double> h0(N);
    parallel_for(N, jobs, [&](std::size_t i) { h0[i] = study_statistic(stat, mixture_null(base, i)); });

    const std::size_t P = grid.p_values.size(), Q = grid.q_values.size();
    std::vector<double> h1(P * Q * N);
    parallel_for(P * Q * N, jobs, [&](std::size_t idx) {
        MixtureConfig cfg = base;
        cfg.p = grid.p_values[idx / (Q * N)];
        cfg.q = grid.q_values[(idx / N) % Q];
        h1[idx] = study_statistic(stat, mixture_alt(cfg, idx % N));
    });

    std::vector<BoundaryCell> cells;
    for (std::size_t c = 0; c < P * Q; ++c) {
        const auto e = min_error_sum(h0, std::span<const double>(h1).subspan(c * N, N), thresholds);
        cells.push_back({grid.p_values[c / Q], grid.q_values[c % Q], e.value, crit[e.best_index]});
    }
    return cells;
}

std::vector<GapRow> entropy_gap_check(const NtpDist& p, std::span<const ScoreKind> scores, std::size_t samples,
                                      std::uint64_t seed) {
    require(samples >= 2, "gap check needs at least two samples");
    require(!scores.empty(), "gap check needs at least one score");
    std::vector<ScoreFunction> fns;
    for (const auto& k : scores) {
        validate(k);
        fns.emplace_back(k);
    }
    std::vector<double> sum(scores.size(), 0.0), sum_sq(scores.size(), 0.0), null_mean(scores.size());
    for (std::size_t j = 0; j < scores.size(); ++j) null_mean[j] = null_moments(scores[j]).mean;

    Stream rng(derive_seed(seed, {tag::alt_pivots}));
    std::vector<double> xi(p.size());
    for (std::size_t i = 0; i < samples; ++i) {
        for (auto& x : xi) x = rng.uniform();
        const double y = xi[gumbel_decode(p, xi)];
        for (std::size_t j = 0; j < scores.size(); ++j) {
            const double g = fns[j](y) - null_mean[j];
            sum[j] += g;
            sum_sq[j] += g * g;
        }
    }

    const AltLaw law(p);
    const double ent = entropy_of(p);
    const double N = static_cast<double>(samples);
    std::vector<GapRow> rows;
    for (std::size_t j = 0; j < scores.size(); ++j) {
        GapRow r;
        r.score = scores[j];
        r.mc_gap = sum[j] / N;
        const double var = std::max(0.0, (sum_sq[j] - N * r.mc_gap * r.mc_gap) / (N - 1.0));
        r.std_error = std::sqrt(var / N);
        switch (scores[j].kind) {
            case ScoreKind::Kind::Log: {
                double sq = 0.0;
                for (double pw : p.probs()) sq += pw * pw;
                r.analytic = 1.0 - sq;
                break;
            }
            case ScoreKind::Kind::Ind:
                r.analytic = scores[j].param - law.cdf(scores[j].param);
                break;
            default: {
                const auto& h = fns[j];
                const auto q = integrate_unit([&](double y) { return h(y) * law.pdf(y); }, 1e-10);
                r.analytic = q.value - null_mean[j];
                break;
            }
        }
        r.pass = std::abs(r.mc_gap - r.analytic) <= 4.0 * r.std_error;
        if (scores[j].kind == ScoreKind::Kind::Ars) {
            r.lower = (std::numbers::pi * std::numbers::pi / 6.0 - 1.0) * ent;
            r.upper = ent;
            r.pass = r.pass && r.mc_gap >= r.lower && r.mc_gap <= r.upper;
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<ToleranceRow> tolerance_study(const ToleranceStudyConfig& cfg, const Key& key, unsigned jobs) {
    validate(cfg.source);
    require(cfg.n >= 1 && cfg.m >= 1, "tolerance study needs n >= 1 and m >= 1");
    require(cfg.sequences >= 1, "tolerance study needs at least one sequence");
    require(!cfg.detectors.empty() && !cfg.kinds.empty(), "tolerance study needs detectors and edit kinds");
    std::vector<SequenceDetector> dets;
    for (const auto& d : cfg.detectors) {
        validate(d);
        dets.push_back(make_sequence_detector(d, key, cfg.source.vocab_size));
    }
    const std::size_t per_seq = cfg.detectors.size() * cfg.kinds.size();
    std::vector<ToleranceRow> rows(cfg.sequences * per_seq);
    parallel_for(cfg.sequences, jobs, [&](std::size_t i) {
        Stream prompt_rng(derive_seed(cfg.seed, {tag::prompt, i}));
        std::vector<TokenId> prompt(cfg.m);
        for (auto& t : prompt) t = static_cast<TokenId>(prompt_rng.below(cfg.source.vocab_size));
        const GenConfig gen{cfg.n, cfg.m, true, derive_seed(cfg.seed, {tag::trial, i})};
        const auto seq = generate(cfg.source, key, prompt, gen);
        for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
            for (std::size_t k = 0; k < cfg.kinds.size(); ++k) {
                const auto res = tolerance_limit(seq, cfg.kinds[k], dets[d], cfg.n, cfg.source.vocab_size,
                                                 derive_seed(cfg.seed, {tag::edit, i, k}), &key);
                rows[i * per_seq + d * cfg.kinds.size() + k] = {i, cfg.detectors[d], cfg.kinds[k], res};
            }
        }
    });
    return rows;
}

}  // namespace gumbelmark
