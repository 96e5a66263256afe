// Acceptance suite: one PASS/FAIL line per criterion, exit status = number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "gumbelmark/calibrate.hpp"
#include "gumbelmark/detectors.hpp"
#include "gumbelmark/edits.hpp"
#include "gumbelmark/efficiency.hpp"
#include "gumbelmark/experiments.hpp"
#include "gumbelmark/pivotal.hpp"
#include "gumbelmark/prf.hpp"
#include "gumbelmark/rng.hpp"
#include "gumbelmark/watermark.hpp"

using namespace gumbelmark;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void run(int id, const char* name, double time_limit, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = body();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= time_limit;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%2d] %-28s %s  %s; %.1fs (limit %.0fs)%s\n", id, name, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                time_limit, in_time ? "" : " TOO SLOW");
    std::fflush(stdout);
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

Outcome hc_identity() {
    Stream rng(101);
    double worst = 0.0;
    for (std::size_t n : {1u, 10u, 400u}) {
        for (int rep = 0; rep < 1000; ++rep) {
            std::vector<double> p(n);
            for (auto& x : p) x = rng.uniform();
            for (double c : {0.0, 1.0 / static_cast<double>(n)}) {
                const double ns = static_cast<double>(n) * trgof_stat(p, 2.0, c);
                const double hc = std::max(hc_plus(p, c), 0.0);
                worst = std::max(worst, std::abs(ns - 0.5 * hc * hc) / std::max(1.0, ns));
            }
        }
    }
    return {worst <= 1e-9, fmt("max relative error %.2e (tol 1e-9)", worst)};
}

Outcome decoder_unbiased() {
    const NtpDist p = make_m2(0.4, 5);
    Stream rng(202);
    std::vector<double> counts(5, 0.0), xi(5);
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) {
        for (auto& x : xi) x = rng.uniform();
        counts[gumbel_decode(p, xi)] += 1.0;
    }
    double tv = 0.0;
    for (std::size_t w = 0; w < 5; ++w) tv += std::abs(counts[w] / draws - p[w]);
    tv *= 0.5;
    return {tv < 0.005, fmt("TV %.5f (tol 0.005)", tv)};
}

Outcome watermarked_pivot_law() {
    Stream rng(303);
    const std::vector<NtpDist> dists{make_m2(0.4, 5), make_m1(0.5, 50, ZipfShape{1.2, 0.05})};
    double worst = 0.0;
    for (const auto& p : dists) {
        const AltLaw law(p);
        std::vector<double> y, xi(p.size());
        for (int i = 0; i < 100000; ++i) {
            for (auto& x : xi) x = rng.uniform();
            y.push_back(xi[gumbel_decode(p, xi)]);
        }
        worst = std::max(worst, ks_distance(y, [&](double r) { return law.cdf(r); }));
    }
    return {worst <= 0.01, fmt("max KS %.4f over M2(0.4,5) and M1(0.5,50) (tol 0.01)", worst)};
}

Outcome type_one_control() {
    bool ok = true;
    std::string detail;
    for (double s : {1.0, 2.0}) {
        auto det = DetectorSpec::trgof(s, CPlus::inv_n());
        det.critical_value = mc_critical(det, 400, 0.01, 10000, 10, 404, 0).critical_value;
        const double rate = null_rejection_rate(det, 400, 5000, 405, 0);
        ok = ok && rate >= 0.006 && rate <= 0.014;
        detail += fmt("s=%g crit %.3f type I %.4f; ", s, det.critical_value, rate);
    }
    return {ok, detail + "band [0.006,0.014]"};
}

Outcome histogram_powers() {
    MixtureConfig cfg{10000, 0.2, 0.5, 1000, NtpMode::M1, 1000, 7};
    const std::vector<DetectorSpec> hc{DetectorSpec::hc(CPlus::inv_n())};
    const double strong = histogram_study(cfg, hc, 0.05, 0)[0].power;
    cfg.p = 0.5;
    const double weak = histogram_study(cfg, hc, 0.05, 0)[0].power;
    return {strong >= 0.9 && weak <= 0.2,
            fmt("HC power %.3f at (0.2,0.5) (need >= 0.90), %.3f at (0.5,0.5) (need <= 0.20); M1, V=1000", strong,
                weak)};
}

ExperimentGrid large_grid(std::vector<double> p_values) {
    ExperimentGrid g;
    g.p_values = std::move(p_values);
    g.q_values = {0.4};
    g.n = 10000;
    g.trials = 300;
    g.seed = 1;
    g.vocab_size = 5;
    g.ntp_mode = NtpMode::M2;
    return g;
}

Outcome phase_transition() {
    const std::vector<double> ps{0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    const auto cells = boundary_grid(large_grid(ps), DetectorSpec::trgof(2.0, CPlus::inv_n()), 0);
    std::string series;
    for (const auto& c : cells) series += fmt("%.2f:%.3f ", c.p, c.min_error_sum);
    double crossing = -1.0;
    for (std::size_t i = 1; i < cells.size() && crossing < 0; ++i) {
        const double a = cells[i - 1].min_error_sum, b = cells[i].min_error_sum;
        if (a < 0.5 && b >= 0.5) crossing = cells[i - 1].p + (0.5 - a) / (b - a) * (cells[i].p - cells[i - 1].p);
    }
    const bool ok = cells.front().min_error_sum < 0.2 && cells.back().min_error_sum > 0.8 && crossing >= 0.2 &&
                    crossing <= 0.4;
    return {ok, fmt("q=0.4 p:err %scrossing at p=%.3f", series.c_str(), crossing)};
}

Outcome sum_rule_gap() {
    const auto g = large_grid({0.25});
    const double tr = boundary_grid(g, DetectorSpec::trgof(2.0, CPlus::inv_n()), 0)[0].min_error_sum;
    bool ok = tr < 0.3;
    std::string detail = fmt("Tr-GoF(s=2) %.3f (need < 0.3)", tr);
    for (const auto& h : {ScoreKind::ars(), ScoreKind::log(), ScoreKind::ind(0.5), ScoreKind::opt(0.1)}) {
        const double e = boundary_grid(g, DetectorSpec::sum(h), 0)[0].min_error_sum;
        ok = ok && e > 0.7;
        detail += fmt(", %s %.3f", to_string(h).c_str(), e);
    }
    return {ok, detail + " (sum rules need > 0.7)"};
}

Outcome null_score_moments() {
    double worst = 0.0;
    for (const auto& k : {ScoreKind::ars(), ScoreKind::log(), ScoreKind::ind(0.2), ScoreKind::ind(0.5),
                          ScoreKind::ind(0.8)}) {
        const auto a = null_moments(k), q = null_moments_quadrature(k);
        worst = std::max({worst, std::abs(a.mean - q.mean), std::abs(a.variance - q.variance)});
    }
    bool ok = worst <= 1e-10;
    std::string detail = fmt("closed form vs quadrature max diff %.1e (tol 1e-10)", worst);
    Stream rng(808);
    for (double d0 : {0.1, 0.4, 0.7}) {
        const ScoreFunction h(ScoreKind::opt(d0));
        double sum = 0.0, sq = 0.0;
        const int n = 10000000;
        for (int i = 0; i < n; ++i) {
            const double v = h(rng.uniform());
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
        const double z = (null_moments(ScoreKind::opt(d0)).mean - mean) / se;
        ok = ok && std::abs(z) <= 3.0;
        detail += fmt("; opt(%g) z=%.2f", d0, z);
    }
    return {ok, detail + " (|z| <= 3)"};
}

Outcome expectation_gaps() {
    const std::vector<ScoreKind> scores{ScoreKind::ars(), ScoreKind::log(), ScoreKind::ind(0.5)};
    bool ok = true;
    std::string detail;
    std::uint64_t seed = 909;
    for (const auto& p : {NtpDist({0.5, 0.5}), NtpDist({0.6, 0.4})}) {
        const auto rows = entropy_gap_check(p, scores, 1000000, seed++);
        const auto& ars = rows[0];
        const bool ars_ok = ars.mc_gap >= ars.lower && ars.mc_gap <= ars.upper;
        const double zlog = (rows[1].mc_gap - rows[1].analytic) / rows[1].std_error;
        const double zind = (rows[2].mc_gap - rows[2].analytic) / rows[2].std_error;
        ok = ok && ars_ok && std::abs(zlog) <= 4 && std::abs(zind) <= 4;
        detail += fmt("P0=%.1f: ars %.4f in [%.4f,%.4f], log z=%.2f, ind z=%.2f; ", p[0], ars.mc_gap, ars.lower,
                      ars.upper, zlog, zind);
    }
    return {ok, detail + "|z| <= 4"};
}

Outcome efficiency_curve() {
    const auto grid = delta_grid(0.01, 0.9, 0.005);
    bool monotone = true;
    for (double eps : {0.5, 1.0}) {
        const auto curve = rate_curve(grid, eps);
        for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i].rate >= curve[i - 1].rate;
    }
    auto rate = [](double d, double e) { return optimal_rate(EfficiencyQuery{d, e, 1e-12}); };
    bool kinks = true;
    std::string detail = fmt("monotone %s", monotone ? "yes" : "no");
    for (double eps : {0.5, 1.0}) {
        for (double d : {0.5, 2.0 / 3.0}) {
            const double e = 1e-4, h = 1e-3;
            const double lo = rate(d - e, eps), hi = rate(d + e, eps);
            const double left = (lo - rate(d - e - h, eps)) / h;
            const double right = (rate(d + e + h, eps) - hi) / h;
            const double gap = std::abs(hi - lo), jump = std::abs(right - left);
            kinks = kinks && gap <= 1e-2 && jump >= 10 * gap;
            detail += fmt("; eps=%g D=%.3f gap %.1e slope jump %.3f", eps, d, gap, jump);
        }
    }
    bool mc_ok = true;
    Stream rng(1010);
    const std::vector<std::pair<double, double>> spots{{0.2, 1.0}, {0.4, 1.0}, {0.6, 0.5}, {0.75, 1.0}, {0.85, 0.5}};
    for (auto [d, eps] : spots) {
        const AltLaw law(least_favorable(d));
        const int n = 1000000;
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = -std::log((1 - eps) + eps * law.pdf(rng.uniform()));
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
        const double z = (rate(d, eps) - mean) / se;
        mc_ok = mc_ok && std::abs(z) <= 3.0;
        detail += fmt("; MC z(%g,%g)=%.2f", d, eps, z);
    }
    return {monotone && kinks && mc_ok, detail};
}

Outcome edit_locality() {
    const Key key = Key::from_string("locality");
    const std::uint32_t vocab = 50, m = 5;
    std::size_t worst = 0, checks = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const ToySource src{vocab, 0.3, 0.3, s};
        Stream prng(derive_seed(s, {tag::prompt}));
        std::vector<TokenId> prompt(m);
        for (auto& t : prompt) t = static_cast<TokenId>(prng.below(vocab));
        const auto seq = generate(src, key, prompt, GenConfig{100, m, true, s});
        const auto base = pivot_series(seq, key, vocab).y;
        for (std::size_t pos = 0; pos < seq.size(); ++pos) {
            TokenSeq edited = seq;
            edited.tokens[pos] = (edited.tokens[pos] + 1) % vocab;
            edited.provenance[pos] = pos < m ? Provenance::Prompt : Provenance::Edited;
            const auto y = pivot_series(edited, key, vocab).y;
            std::size_t changed = 0;
            for (std::size_t i = 0; i < y.size(); ++i) changed += y[i] != base[i];
            worst = std::max(worst, changed);
            ++checks;
        }
    }
    return {worst <= m + 1, fmt("max changed pivots %zu over %zu single substitutions (limit %u)", worst, checks, m + 1)};
}

Outcome tolerance_bisection() {
    const Key key = Key::from_string("bisection");
    Stream rng(1212);
    int agree = 0;
    const int cases = 50;
    const EditKind kinds[] = {EditKind::Substitute, EditKind::Insert, EditKind::Delete, EditKind::Adversarial};
    for (int c = 0; c < cases; ++c) {
        const ToySource src{50, 0.3, 0.3, static_cast<std::uint64_t>(c)};
        const std::vector<TokenId> prompt{1, 2, 3, 4, 5};
        const auto seq = generate(src, key, prompt, GenConfig{50, 5, true, static_cast<std::uint64_t>(c)});
        const EditKind kind = kinds[rng.below(4)];
        const std::uint64_t seed = rng();
        const EditLadder ladder(seq, kind, 50, 50, seed, &key);
        // last edit count the detector still rejects; -1 means it never rejects
        const long last = static_cast<long>(rng.below(53)) - 1;
        std::vector<TokenSeq> rungs;
        for (std::size_t k = 0; k <= ladder.n0(); ++k) rungs.push_back(ladder.at(k));
        const SequenceDetector det = [&](const TokenSeq& s) {
            const auto it = std::find(rungs.begin(), rungs.end(), s);
            return it != rungs.end() && static_cast<long>(it - rungs.begin()) <= last;
        };
        const auto got = tolerance_limit(seq, kind, det, 50, 50, seed, &key);
        std::size_t oracle = 0;
        const bool rejects = det(ladder.at(0));
        if (rejects)
            while (oracle + 1 < ladder.n0() && det(ladder.at(oracle + 1))) ++oracle;
        agree += got.unedited_rejected == rejects && got.edits == oracle && got.n0 == 50;
    }
    return {agree == cases, fmt("%d of %d cases match the linear scan (n0=50)", agree, cases)};
}

}  // namespace

int main() {
    run(1, "hc-identity", 5, hc_identity);
    run(2, "decoder-unbiasedness", 10, decoder_unbiased);
    run(3, "watermarked-pivot-law", 10, watermarked_pivot_law);
    run(4, "type-one-control", 120, type_one_control);
    run(5, "histogram-powers", 600, histogram_powers);
    run(6, "phase-transition", 1200, phase_transition);
    run(7, "sum-rule-suboptimality", 1200, sum_rule_gap);
    run(8, "null-score-moments", 600, null_score_moments);
    run(9, "expectation-gaps", 600, expectation_gaps);
    run(10, "efficiency-curve", 60, efficiency_curve);
    run(11, "edit-locality", 600, edit_locality);
    run(12, "tolerance-bisection", 600, tolerance_bisection);
    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
