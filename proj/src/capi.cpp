#include "gumbelmark/gumbelmark.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "gumbelmark/calibrate.hpp"
#include "gumbelmark/detectors.hpp"
#include "gumbelmark/edits.hpp"
#include "gumbelmark/efficiency.hpp"
#include "gumbelmark/error.hpp"
#include "gumbelmark/experiments.hpp"
#include "gumbelmark/parallel.hpp"
#include "gumbelmark/pivotal.hpp"
#include "gumbelmark/prf.hpp"
#include "gumbelmark/rng.hpp"
#include "gumbelmark/serialize.hpp"
#include "gumbelmark/watermark.hpp"

#ifndef GUMBELMARK_VERSION
#define GUMBELMARK_VERSION "0.0.0"
#endif

struct gm_key {
    gumbelmark::Key key;
};

struct gm_tokenseq {
    gumbelmark::TokenSeq seq;
};

namespace {

using namespace gumbelmark;
using nlohmann::json;

thread_local std::string last_error;

template <class F>
gm_status guard(F&& body) {
    try {
        body();
        last_error.clear();
        return GM_OK;
    } catch (const InputError& e) {
        last_error = e.what();
        return GM_ERR_INPUT;
    } catch (const DataError& e) {
        last_error = e.what();
        return GM_ERR_DATA;
    } catch (const json::exception& e) {
        last_error = std::string("configuration: ") + e.what();
        return GM_ERR_INPUT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return GM_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return GM_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return GM_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) throw InputError(std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ToySource toy(const gm_toy_source* s) {
    need(s, "source");
    return {s->vocab_size, s->delta_min, s->delta_max, s->seed};
}

GenConfig gen(const gm_gen_config* c) {
    need(c, "generation config");
    return {c->n, c->m, c->masking != 0, c->seed};
}

std::span<const TokenId> prompt_span(const std::uint32_t* prompt, std::size_t len) {
    if (len) need(prompt, "prompt");
    return {prompt, len};
}

DetectorSpec detector(const char* text) {
    need(text, "detector JSON");
    return detector_from_json(text);
}

EditKind edit_kind(gm_edit_kind k) {
    switch (k) {
        case GM_EDIT_SUBSTITUTE: return EditKind::Substitute;
        case GM_EDIT_INSERT: return EditKind::Insert;
        case GM_EDIT_DELETE: return EditKind::Delete;
        case GM_EDIT_ADVERSARIAL: return EditKind::Adversarial;
    }
    throw InputError("unknown edit kind");
}

// ---- experiment suites ----

template <class T>
T get_or(const json& j, const char* name, T fallback) {
    return j.contains(name) ? j.at(name).get<T>() : fallback;
}

std::string label(const DetectorSpec& d) {
    switch (d.kind) {
        case DetectorKind::TrGoF: return "trgof_s" + format_double(d.s);
        case DetectorKind::HC: return "hc";
        case DetectorKind::Sum: break;
    }
    const auto& k = d.score;
    if (k.kind == ScoreKind::Kind::Ind || k.kind == ScoreKind::Kind::Opt)
        return "sum_" + to_string(k) + format_double(k.param);
    return "sum_" + to_string(k);
}

std::vector<DetectorSpec> detectors_from(const json& list) {
    std::vector<DetectorSpec> out;
    for (const auto& d : list) out.push_back(detector_from_json(d.dump()));
    return out;
}

json detector_doc(const DetectorSpec& d) { return json::parse(detector_to_json(d)); }

MixtureConfig mixture_from(const json& c) {
    MixtureConfig m;
    m.n = get_or<std::size_t>(c, "n", 1000);
    m.p = get_or<double>(c, "p", 0.2);
    m.q = get_or<double>(c, "q", 0.5);
    m.vocab_size = get_or<std::uint32_t>(c, "vocab_size", 1000);
    m.ntp_mode = parse_ntp_mode(get_or<std::string>(c, "ntp_mode", "M2"));
    m.trials = get_or<std::size_t>(c, "trials", 1000);
    m.seed = get_or<std::uint64_t>(c, "seed", 0);
    return m;
}

json run_hist(json c, unsigned jobs, json& files) {
    const auto cfg = mixture_from(c);
    const double alpha = get_or<double>(c, "alpha", 0.05);
    std::vector<DetectorSpec> dets;
    if (c.contains("detectors")) {
        dets = detectors_from(c.at("detectors"));
    } else {
        const auto cp = CPlus::parse(get_or<std::string>(c, "c_plus", "1/n^2"));
        for (double s : get_or<std::vector<double>>(c, "s_values", {2.0, 1.5, 1.0, 0.5, 0.0}))
            dets.push_back(DetectorSpec::trgof(s, cp));
    }
    const auto series = histogram_study(cfg, dets, alpha, jobs);
    CsvTable samples({"detector", "hypothesis", "trial", "statistic"});
    CsvTable summary({"detector", "alpha", "null_quantile", "power"});
    for (const auto& s : series) {
        const auto name = label(s.detector);
        for (std::size_t i = 0; i < s.null_samples.size(); ++i)
            samples.row({name, "H0", std::to_string(i), format_double(s.null_samples[i])});
        for (std::size_t i = 0; i < s.alt_samples.size(); ++i)
            samples.row({name, "H1", std::to_string(i), format_double(s.alt_samples[i])});
        summary.row({name, format_double(alpha), format_double(s.null_quantile), format_double(s.power)});
    }
    files["hist_samples.csv"] = samples.str();
    files["hist_summary.csv"] = summary.str();
    json resolved = {{"n", cfg.n}, {"p", cfg.p}, {"q", cfg.q}, {"vocab_size", cfg.vocab_size},
                     {"ntp_mode", to_string(cfg.ntp_mode)}, {"trials", cfg.trials}, {"seed", cfg.seed},
                     {"alpha", alpha}};
    resolved["detectors"] = json::array();
    for (const auto& d : dets) resolved["detectors"].push_back(detector_doc(d));
    return resolved;
}

json run_boundary(json c, unsigned jobs, json& files, bool sum_rules) {
    ExperimentGrid g;
    g.n = get_or<std::size_t>(c, "n", 1000);
    g.trials = get_or<std::size_t>(c, "trials", 200);
    g.seed = get_or<std::uint64_t>(c, "seed", 0);
    g.vocab_size = get_or<std::uint32_t>(c, "vocab_size", 5);
    g.ntp_mode = parse_ntp_mode(get_or<std::string>(c, "ntp_mode", "M2"));
    const auto K = get_or<std::size_t>(c, "grid", 20);
    g.p_values = c.contains("p_values") ? c.at("p_values").get<std::vector<double>>() : grid_R(0.01, 1.0, K);
    g.q_values = c.contains("q_values") ? c.at("q_values").get<std::vector<double>>()
                                        : grid_R(q_min(g.n, g.vocab_size), 1.0, K);
    if (c.contains("crit_grid")) g.crit_grid = c.at("crit_grid").get<std::vector<double>>();

    std::vector<DetectorSpec> dets;
    if (c.contains("detectors")) {
        dets = detectors_from(c.at("detectors"));
    } else if (sum_rules) {
        dets = {DetectorSpec::sum(ScoreKind::ars()), DetectorSpec::sum(ScoreKind::log()),
                DetectorSpec::sum(ScoreKind::ind(0.5)), DetectorSpec::sum(ScoreKind::opt(0.1))};
    } else {
        const auto cp = CPlus::parse(get_or<std::string>(c, "c_plus", "1/n"));
        for (double s : get_or<std::vector<double>>(c, "s_values", {2.0}))
            dets.push_back(DetectorSpec::trgof(s, cp));
        if (get_or<bool>(c, "hc", false)) dets.push_back(DetectorSpec::hc(cp));
    }
    for (const auto& d : dets) {
        if (sum_rules != (d.kind == DetectorKind::Sum))
            throw InputError(sum_rules ? "sumboundary takes sum-rule detectors only"
                                       : "boundary takes Tr-GoF or HC detectors only");
        CsvTable t({"p", "q", "min_error_sum", "best_critical"});
        for (const auto& cell : boundary_grid(g, d, jobs))
            t.row_numbers(std::vector<double>{cell.p, cell.q, cell.min_error_sum, cell.best_critical});
        files["boundary_" + label(d) + ".csv"] = t.str();
    }
    json resolved = {{"n", g.n},
                     {"trials", g.trials},
                     {"seed", g.seed},
                     {"vocab_size", g.vocab_size},
                     {"ntp_mode", to_string(g.ntp_mode)},
                     {"p_values", g.p_values},
                     {"q_values", g.q_values}};
    if (!g.crit_grid.empty()) resolved["crit_grid"] = g.crit_grid;
    resolved["detectors"] = json::array();
    for (const auto& d : dets) resolved["detectors"].push_back(detector_doc(d));
    return resolved;
}

json run_efficiency(json c, unsigned jobs, json& files) {
    const auto eps = get_or<std::vector<double>>(c, "epsilons", {1.0, 0.5});
    const double lo = get_or<double>(c, "delta_lo", 0.01), hi = get_or<double>(c, "delta_hi", 0.9);
    const double step = get_or<double>(c, "delta_step", 0.005);
    const double tol = get_or<double>(c, "quad_tolerance", 1e-9);
    const auto deltas = delta_grid(lo, hi, step);
    std::vector<double> rates(eps.size() * deltas.size());
    parallel_for(rates.size(), jobs, [&](std::size_t i) {
        rates[i] = optimal_rate({deltas[i % deltas.size()], eps[i / deltas.size()], tol});
    });
    CsvTable t({"delta", "epsilon", "rate"});
    for (std::size_t i = 0; i < rates.size(); ++i)
        t.row_numbers(std::vector<double>{deltas[i % deltas.size()], eps[i / deltas.size()], rates[i]});
    files["efficiency.csv"] = t.str();
    return {{"epsilons", eps}, {"delta_lo", lo}, {"delta_hi", hi}, {"delta_step", step}, {"quad_tolerance", tol}};
}

json run_gapcheck(json c, unsigned, json& files) {
    const auto ntps = get_or<std::vector<std::vector<double>>>(c, "ntps", {{0.6, 0.4}, {0.5, 0.5}});
    const auto samples = get_or<std::size_t>(c, "samples", 1000000);
    const auto seed = get_or<std::uint64_t>(c, "seed", 0);
    std::vector<ScoreKind> scores;
    if (c.contains("scores")) {
        for (const auto& s : c.at("scores"))
            scores.push_back(parse_score_kind(s.at("score").get<std::string>(), get_or<double>(s, "param", 0.0)));
    } else {
        scores = {ScoreKind::ars(), ScoreKind::log(), ScoreKind::ind(0.5), ScoreKind::opt(0.1)};
    }
    CsvTable t({"ntp", "score", "param", "mc_gap", "std_error", "analytic", "lower", "upper", "pass"});
    for (std::size_t i = 0; i < ntps.size(); ++i) {
        const NtpDist p(ntps[i]);
        for (const auto& r : entropy_gap_check(p, scores, samples, derive_seed(seed, {i}))) {
            t.row({std::to_string(i), to_string(r.score),
                   format_double(r.score.param), format_double(r.mc_gap), format_double(r.std_error),
                   format_double(r.analytic), format_double(r.lower), format_double(r.upper),
                   r.pass ? "PASS" : "FAIL"});
        }
    }
    files["gapcheck.csv"] = t.str();
    json sc = json::array();
    for (const auto& s : scores) sc.push_back({{"score", to_string(s)}, {"param", s.param}});
    return {{"ntps", ntps}, {"samples", samples}, {"seed", seed}, {"scores", sc}};
}

json run_tolerance(json c, unsigned jobs, json& files) {
    if (!c.contains("key")) throw InputError("tolerance suite needs a key");
    const Key key = Key::from_hex(c.at("key").get<std::string>());
    ToleranceStudyConfig cfg;
    cfg.source.vocab_size = get_or<std::uint32_t>(c, "vocab_size", 50);
    cfg.source.delta_min = get_or<double>(c, "delta_min", get_or<double>(c, "delta", 0.3));
    cfg.source.delta_max = get_or<double>(c, "delta_max", get_or<double>(c, "delta", 0.3));
    cfg.source.seed = get_or<std::uint64_t>(c, "source_seed", 0);
    cfg.n = get_or<std::uint32_t>(c, "n", 400);
    cfg.m = get_or<std::uint32_t>(c, "m", 5);
    cfg.sequences = get_or<std::size_t>(c, "sequences", 20);
    cfg.seed = get_or<std::uint64_t>(c, "seed", 0);
    if (c.contains("kinds")) {
        cfg.kinds.clear();
        for (const auto& k : c.at("kinds")) cfg.kinds.push_back(parse_edit_kind(k.get<std::string>()));
    }
    cfg.detectors = c.contains("detectors")
                        ? detectors_from(c.at("detectors"))
                        : std::vector<DetectorSpec>{DetectorSpec::trgof(2.0, CPlus::inv_n()),
                                                    DetectorSpec::sum(ScoreKind::ars())};
    const double alpha = get_or<double>(c, "alpha", 0.01);
    const auto reps = get_or<std::size_t>(c, "reps", 2000);
    const auto outer = get_or<std::size_t>(c, "outer", 1);
    for (auto& d : cfg.detectors) {
        if (d.critical_value == 0.0)
            d.critical_value = mc_critical(d, cfg.n, alpha, reps, outer, cfg.seed, jobs).critical_value;
    }
    CsvTable t({"sequence", "detector", "kind", "fraction", "edits", "n0", "unedited_rejected"});
    for (const auto& r : tolerance_study(cfg, key, jobs)) {
        t.row({std::to_string(r.sequence), label(r.detector), to_string(r.kind), format_double(r.result.fraction),
               std::to_string(r.result.edits), std::to_string(r.result.n0),
               r.result.unedited_rejected ? "true" : "false"});
    }
    files["tolerance.csv"] = t.str();
    json kinds = json::array();
    for (auto k : cfg.kinds) kinds.push_back(to_string(k));
    json resolved = {{"vocab_size", cfg.source.vocab_size}, {"delta_min", cfg.source.delta_min},
                     {"delta_max", cfg.source.delta_max}, {"source_seed", cfg.source.seed},
                     {"n", cfg.n}, {"m", cfg.m}, {"sequences", cfg.sequences}, {"seed", cfg.seed},
                     {"kinds", kinds}, {"alpha", alpha}, {"reps", reps}, {"outer", outer}};
    resolved["detectors"] = json::array();
    for (const auto& d : cfg.detectors) resolved["detectors"].push_back(detector_doc(d));
    return resolved;
}

}  // namespace

extern "C" {

const char* gm_last_error(void) { return last_error.c_str(); }

const char* gm_version(void) { return GUMBELMARK_VERSION; }

void gm_string_free(char* s) { std::free(s); }

uint64_t gm_derive_seed(uint64_t seed, const uint64_t* path, size_t len) {
    return path ? derive_seed(seed, std::span<const std::uint64_t>(path, len)) : derive_seed(seed, {});
}

gm_status gm_random_prompt(uint32_t vocab_size, size_t len, uint64_t seed, uint32_t* out) {
    return guard([&] {
        if (len) need(out, "out");
        require(vocab_size >= 2, "vocabulary size must be at least 2");
        Stream rng(derive_seed(seed, {tag::prompt}));
        for (std::size_t i = 0; i < len; ++i) out[i] = static_cast<uint32_t>(rng.below(vocab_size));
    });
}

gm_status gm_key_from_hex(const char* hex, gm_key** out) {
    return guard([&] {
        need(hex, "hex");
        need(out, "out");
        *out = new gm_key{Key::from_hex(hex)};
    });
}

gm_status gm_key_from_string(const char* text, gm_key** out) {
    return guard([&] {
        need(text, "text");
        need(out, "out");
        *out = new gm_key{Key::from_string(text)};
    });
}

void gm_key_free(gm_key* key) { delete key; }

gm_status gm_prf_uniform(const gm_key* key, const uint32_t* window, size_t m, uint32_t token, uint32_t vocab_size,
                         double* out) {
    return guard([&] {
        need(key, "key");
        need(out, "out");
        if (m) need(window, "window");
        *out = prf_uniform(key->key, {window, m}, token, vocab_size);
    });
}

gm_status gm_generate(const gm_toy_source* source, const gm_key* key, const uint32_t* prompt, size_t prompt_len,
                      const gm_gen_config* cfg, gm_tokenseq** out) {
    return guard([&] {
        need(key, "key");
        need(out, "out");
        *out = new gm_tokenseq{generate(toy(source), key->key, prompt_span(prompt, prompt_len), gen(cfg))};
    });
}

gm_status gm_generate_null(const gm_toy_source* source, const uint32_t* prompt, size_t prompt_len,
                           const gm_gen_config* cfg, gm_tokenseq** out) {
    return guard([&] {
        need(out, "out");
        *out = new gm_tokenseq{generate_null(toy(source), prompt_span(prompt, prompt_len), gen(cfg))};
    });
}

gm_status gm_tokenseq_from_json(const char* text, gm_tokenseq** out) {
    return guard([&] {
        need(text, "JSON");
        need(out, "out");
        *out = new gm_tokenseq{tokenseq_from_json(text)};
    });
}

gm_status gm_tokenseq_to_json(const gm_tokenseq* seq, char** out) {
    return guard([&] {
        need(seq, "sequence");
        need(out, "out");
        *out = dup(tokenseq_to_json(seq->seq));
    });
}

size_t gm_tokenseq_size(const gm_tokenseq* seq) { return seq ? seq->seq.size() : 0; }

size_t gm_tokenseq_prompt_length(const gm_tokenseq* seq) { return seq ? seq->seq.prompt_length() : 0; }

void gm_tokenseq_free(gm_tokenseq* seq) { delete seq; }

gm_status gm_parse_edit_kind(const char* name, gm_edit_kind* out) {
    return guard([&] {
        need(name, "name");
        need(out, "out");
        switch (parse_edit_kind(name)) {
            case EditKind::Substitute: *out = GM_EDIT_SUBSTITUTE; break;
            case EditKind::Insert: *out = GM_EDIT_INSERT; break;
            case EditKind::Delete: *out = GM_EDIT_DELETE; break;
            case EditKind::Adversarial: *out = GM_EDIT_ADVERSARIAL; break;
        }
    });
}

gm_status gm_edit(const gm_tokenseq* seq, gm_edit_kind kind, double fraction, uint32_t vocab_size, uint64_t seed,
                  const gm_key* key, gm_tokenseq** out) {
    return guard([&] {
        need(seq, "sequence");
        need(out, "out");
        const EditSpec spec{edit_kind(kind), fraction, seed, vocab_size};
        *out = new gm_tokenseq{apply_edit(seq->seq, spec, key ? &key->key : nullptr)};
    });
}

gm_status gm_pivots(const gm_tokenseq* seq, const gm_key* key, uint32_t vocab_size, double* y, size_t capacity,
                    size_t* count) {
    return guard([&] {
        need(seq, "sequence");
        need(key, "key");
        need(count, "count");
        const auto piv = pivot_series(seq->seq, key->key, vocab_size);
        if (capacity) need(y, "output buffer");
        for (std::size_t i = 0; i < piv.size() && i < capacity; ++i) y[i] = piv.y[i];
        *count = piv.size();
    });
}

gm_status gm_pivots_csv(const gm_tokenseq* seq, const gm_key* key, uint32_t vocab_size, char** out) {
    return guard([&] {
        need(seq, "sequence");
        need(key, "key");
        need(out, "out");
        *out = dup(pivots_to_csv(pivot_series(seq->seq, key->key, vocab_size), seq->seq.m));
    });
}

gm_status gm_detector_validate(const char* detector_json) {
    return guard([&] {
        try {
            detector(detector_json);
        } catch (const DataError& e) {
            throw InputError(e.what());
        }
    });
}

gm_status gm_detect(const char* detector_json, const gm_tokenseq* seq, const gm_key* key, uint32_t vocab_size,
                    char** verdict_json) {
    return guard([&] {
        need(seq, "sequence");
        need(key, "key");
        need(verdict_json, "out");
        const auto spec = detector(detector_json);
        *verdict_json = dup(verdict_to_json(detect(spec, pivot_series(seq->seq, key->key, vocab_size))));
    });
}

gm_status gm_detector_statistic(const char* detector_json, const double* y, size_t n, double* out) {
    return guard([&] {
        need(out, "out");
        if (n) need(y, "pivots");
        *out = DetectorStatistic(detector(detector_json))({y, n});
    });
}

gm_status gm_mc_critical(const char* detector_json, size_t n, double alpha, size_t reps, size_t outer, uint64_t seed,
                         unsigned jobs, const char* cache_dir, char** calibration_json) {
    return guard([&] {
        need(calibration_json, "out");
        const auto spec = detector(detector_json);
        const auto r = cache_dir ? mc_critical_cached(cache_dir, spec, n, alpha, reps, outer, seed, jobs)
                                 : mc_critical(spec, n, alpha, reps, outer, seed, jobs);
        *calibration_json = dup(calibration_to_json(r));
    });
}

gm_status gm_clt_critical(const char* score, double param, size_t n, double alpha, double* out) {
    return guard([&] {
        need(score, "score");
        need(out, "out");
        *out = clt_critical(parse_score_kind(score, param), n, alpha);
    });
}

gm_status gm_null_rejection_rate(const char* detector_json, size_t n, size_t trials, uint64_t seed, unsigned jobs,
                                 double* out) {
    return guard([&] {
        need(out, "out");
        *out = null_rejection_rate(detector(detector_json), n, trials, seed, jobs);
    });
}

gm_status gm_optimal_rate(double delta, double epsilon, double quad_tolerance, double* out) {
    return guard([&] {
        need(out, "out");
        *out = optimal_rate({delta, epsilon, quad_tolerance});
    });
}

gm_status gm_experiment_run(const char* suite, const char* config_json, unsigned jobs, char** bundle_json) {
    return guard([&] {
        need(suite, "suite");
        need(bundle_json, "out");
        json cfg = config_json && *config_json ? json::parse(config_json) : json::object();
        if (!cfg.is_object()) throw InputError("experiment config must be a JSON object");
        json files = json::object();
        json resolved;
        const std::string name = suite;
        if (name == "hist")
            resolved = run_hist(cfg, jobs, files);
        else if (name == "boundary")
            resolved = run_boundary(cfg, jobs, files, false);
        else if (name == "sumboundary")
            resolved = run_boundary(cfg, jobs, files, true);
        else if (name == "efficiency")
            resolved = run_efficiency(cfg, jobs, files);
        else if (name == "gapcheck")
            resolved = run_gapcheck(cfg, jobs, files);
        else if (name == "tolerance")
            resolved = run_tolerance(cfg, jobs, files);
        else
            throw InputError("unknown suite '" + name +
                             "' (expected hist, boundary, sumboundary, efficiency, gapcheck or tolerance)");
        *bundle_json = dup(json{{"suite", name}, {"config", resolved}, {"files", files}}.dump());
    });
}

}  // extern "C"
