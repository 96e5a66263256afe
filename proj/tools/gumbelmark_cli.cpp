#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gumbelmark/gumbelmark.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { ok = 0, usage = 2, data = 3, internal = 4 };

struct Failure {
    int code;
    std::string message;
};

int exit_for(gm_status s) {
    switch (s) {
        case GM_OK: return ok;
        case GM_ERR_INPUT: return usage;
        case GM_ERR_DATA: return data;
        default: return internal;
    }
}

void check(gm_status s, const std::string& what) {
    if (s != GM_OK) throw Failure{exit_for(s), what + ": " + gm_last_error()};
}

// Owning wrappers around the C handles.
struct KeyHandle {
    gm_key* p = nullptr;
    ~KeyHandle() { gm_key_free(p); }
};
struct SeqHandle {
    gm_tokenseq* p = nullptr;
    SeqHandle() = default;
    SeqHandle(SeqHandle&& o) noexcept : p(std::exchange(o.p, nullptr)) {}
    SeqHandle(const SeqHandle&) = delete;
    SeqHandle& operator=(const SeqHandle&) = delete;
    ~SeqHandle() { gm_tokenseq_free(p); }
};
struct CString {
    char* p = nullptr;
    ~CString() { gm_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{data, "cannot read '" + path + "'"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw Failure{data, "cannot write '" + path.string() + "'"};
}

// Output goes to a file when a path is given, else to stdout.
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text << (text.empty() || text.back() == '\n' ? "" : "\n");
    else
        write_file(path, text);
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Manifest {
    std::string command;
    json config = json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const fs::path& path) const {
        json j;
        j["command"] = command;
        j["config"] = config;
        j["seed"] = seed;
        j["tool_version"] = gm_version();
        j["outputs"] = outputs;
        j["started_at"] = utc_now();
        j["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_file(path, j.dump(2) + "\n");
    }
};

// Manifest sits next to a file output; stdout outputs get one only when asked.
void finish_manifest(Manifest& m, const std::string& out, const std::string& manifest_path) {
    if (!out.empty() && out != "-") m.outputs.push_back(out);
    std::string path = manifest_path;
    if (path.empty() && !out.empty() && out != "-") path = out + ".manifest.json";
    if (!path.empty()) m.write(path);
}

struct KeyOptions {
    std::string hex;

    void add(CLI::App* app) {
        app->add_option("--key", hex, "Watermark key as hex (default: $GUMBELMARK_KEY)");
    }
    bool present() const { return !hex.empty() || std::getenv("GUMBELMARK_KEY"); }
    void load(KeyHandle& key) const {
        std::string h = hex;
        if (h.empty()) {
            const char* env = std::getenv("GUMBELMARK_KEY");
            if (!env || !*env) throw Failure{usage, "a key is required: pass --key or set GUMBELMARK_KEY"};
            h = env;
        }
        check(gm_key_from_hex(h.c_str(), &key.p), "key");
    }
};

struct DetectorOptions {
    std::string kind = "trgof";
    double s = 2.0;
    std::string c_plus = "1/n";
    std::string score = "ars";
    double param = 0.1;

    void add(CLI::App* app) {
        app->add_option("--detector", kind, "trgof, hc or sum")->check(CLI::IsMember({"trgof", "hc", "sum"}));
        app->add_option("--s", s, "Tr-GoF divergence index s in [-1,2]");
        app->add_option("--c-plus", c_plus, "Truncation point: a number, 1/n or 1/n^2");
        app->add_option("--score", score, "Sum-rule score: ars, log, ind or opt")
            ->check(CLI::IsMember({"ars", "log", "ind", "opt"}));
        app->add_option("--param", param, "delta for ind, Delta0 for opt");
    }

    json to_json(std::optional<double> critical) const {
        json j{{"kind", kind}, {"s", s}, {"score", score}, {"delta0", param}};
        if (c_plus == "1/n" || c_plus == "1/n^2" || c_plus == "1/n2") {
            j["c_plus"] = c_plus;
        } else {
            try {
                std::size_t used = 0;
                j["c_plus"] = std::stod(c_plus, &used);
                if (used != c_plus.size()) throw std::invalid_argument(c_plus);
            } catch (const std::exception&) {
                throw Failure{usage, "--c-plus must be a number, 1/n or 1/n^2"};
            }
        }
        if (critical) j["critical_value"] = *critical;
        const auto text = j.dump();
        check(gm_detector_validate(text.c_str()), "detector");
        return j;
    }
};

struct CalibrationOptions {
    double alpha = 0.01;
    std::size_t reps = 10000;
    std::size_t outer = 10;
    std::string cache_dir;

    void add(CLI::App* app) {
        app->add_option("--alpha", alpha, "Significance level");
        app->add_option("--reps", reps, "Null replicates per round");
        app->add_option("--outer", outer, "Rounds averaged");
        app->add_option("--cache-dir", cache_dir, "Directory for cached critical values");
    }

    json run(const json& detector, std::size_t n, std::uint64_t seed, unsigned jobs) const {
        CString out;
        const auto text = detector.dump();
        check(gm_mc_critical(text.c_str(), n, alpha, reps, outer, seed, jobs,
                             cache_dir.empty() ? nullptr : cache_dir.c_str(), &out.p),
              "calibration");
        return json::parse(out.str());
    }
};

std::vector<std::uint32_t> parse_tokens(const std::string& text) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(item, &used);
            if (used != item.size() || v > UINT32_MAX) throw std::out_of_range(item);
            out.push_back(static_cast<std::uint32_t>(v));
        } catch (const std::exception&) {
            throw Failure{usage, "--prompt must be comma-separated token ids"};
        }
    }
    return out;
}

SeqHandle load_seq(const std::string& path) {
    SeqHandle seq;
    check(gm_tokenseq_from_json(read_file(path).c_str(), &seq.p), "reading '" + path + "'");
    return seq;
}

std::string seq_json(const gm_tokenseq* seq) {
    CString out;
    check(gm_tokenseq_to_json(seq, &out.p), "serializing sequence");
    return out.str() + "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gumbel-max watermark generation, editing, detection and experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(gm_version()));
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    app.add_option("--seed", seed, "Master seed; every random draw derives from it")->capture_default_str();
    app.add_option("--jobs", jobs, "Worker threads (0 = all cores); results do not depend on it")
        ->capture_default_str();

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a watermarked (or plain) token sequence");
    KeyOptions gen_key;
    gen_key.add(gen);
    std::uint32_t gen_n = 400, gen_m = 5, gen_vocab = 50;
    double gen_delta = 0.3;
    std::optional<double> gen_dmin, gen_dmax;
    std::string gen_prompt, gen_out, gen_manifest;
    bool gen_null = false, gen_no_mask = false;
    gen->add_option("--n", gen_n, "Tokens to generate after the prompt")->check(CLI::PositiveNumber);
    gen->add_option("--m", gen_m, "Context window size")->check(CLI::PositiveNumber);
    gen->add_option("--vocab", gen_vocab, "Toy-source vocabulary size");
    gen->add_option("--delta", gen_delta, "Regularity Delta of every step (1 - top probability)");
    gen->add_option("--delta-min", gen_dmin, "Lower end of a per-context Delta range");
    gen->add_option("--delta-max", gen_dmax, "Upper end of a per-context Delta range");
    gen->add_option("--prompt", gen_prompt, "Comma-separated prompt token ids (default: m random tokens)");
    gen->add_flag("--null", gen_null, "Plain multinomial sampling, no watermark");
    gen->add_flag("--no-masking", gen_no_mask, "Watermark repeated contexts too");
    gen->add_option("-o,--out", gen_out, "Output TokenSeq JSON (default stdout)");
    gen->add_option("--manifest", gen_manifest, "Manifest path (default <out>.manifest.json)");

    // edit
    auto* edit = app.add_subcommand("edit", "Apply random or adversarial edits to a sequence");
    KeyOptions edit_key;
    edit_key.add(edit);
    std::string edit_in, edit_out, edit_manifest, edit_kind = "sub";
    double edit_fraction = 0.1;
    std::uint32_t edit_vocab = 50;
    edit->add_option("-i,--in", edit_in, "Input TokenSeq JSON")->required();
    edit->add_option("--kind,--edit", edit_kind, "sub, ins, del or adv");
    edit->add_option("--fraction", edit_fraction, "Fraction of generated tokens to edit");
    edit->add_option("--vocab", edit_vocab, "Vocabulary size for replacement tokens");
    edit->add_option("-o,--out", edit_out, "Output TokenSeq JSON (default stdout)");
    edit->add_option("--manifest", edit_manifest, "Manifest path (default <out>.manifest.json)");

    // detect
    auto* det = app.add_subcommand("detect", "Test a sequence for the watermark");
    KeyOptions det_key;
    det_key.add(det);
    DetectorOptions det_opts;
    det_opts.add(det);
    CalibrationOptions det_cal;
    det_cal.add(det);
    std::string det_in, det_out, det_manifest, det_pivots;
    std::uint32_t det_vocab = 50;
    std::optional<double> det_critical;
    bool det_calibrate = false;
    det->add_option("-i,--in", det_in, "Input TokenSeq JSON")->required();
    det->add_option("--vocab", det_vocab, "Vocabulary size");
    det->add_option("--critical", det_critical, "Critical value of the decision statistic");
    det->add_flag("--calibrate", det_calibrate, "Compute the critical value by Monte Carlo at --alpha");
    det->add_option("--pivots-csv", det_pivots, "Also write the pivotal statistics as CSV");
    det->add_option("-o,--out", det_out, "Verdict JSON (default stdout)");
    det->add_option("--manifest", det_manifest, "Manifest path (default <out>.manifest.json)");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Critical value of a detector at level alpha");
    DetectorOptions cal_opts;
    cal_opts.add(cal);
    CalibrationOptions cal_cal;
    cal_cal.add(cal);
    std::size_t cal_n = 400;
    bool cal_clt = false;
    std::string cal_out, cal_manifest;
    cal->add_option("--n", cal_n, "Number of scored pivots")->check(CLI::PositiveNumber);
    cal->add_flag("--clt", cal_clt, "Normal approximation (sum rules only)");
    cal->add_option("-o,--out", cal_out, "Calibration JSON (default stdout)");
    cal->add_option("--manifest", cal_manifest, "Manifest path (default <out>.manifest.json)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run a synthetic experiment suite");
    std::string exp_suite, exp_config, exp_dir = ".";
    exp->add_option("suite", exp_suite, "hist, boundary, sumboundary, efficiency, gapcheck or tolerance")
        ->required()
        ->check(CLI::IsMember({"hist", "boundary", "sumboundary", "efficiency", "gapcheck", "tolerance"}));
    exp->add_option("--config", exp_config, "JSON config file; flags override its fields");
    exp->add_option("--out-dir", exp_dir, "Directory for CSV outputs and manifest.json");
    std::optional<std::size_t> x_n, x_grid, x_trials, x_samples, x_sequences;
    std::optional<double> x_p, x_q, x_alpha;
    std::optional<std::uint32_t> x_vocab;
    std::optional<std::string> x_ntp;
    std::vector<double> x_eps;
    KeyOptions exp_key;
    exp_key.add(exp);
    exp->add_option("--n", x_n, "Sample size n");
    exp->add_option("--grid", x_grid, "Points per axis of the default (p,q) grids");
    exp->add_option("--trials", x_trials, "Trials per hypothesis (per cell)");
    exp->add_option("--p", x_p, "Sparsity exponent p (hist)");
    exp->add_option("--q", x_q, "Regularity exponent q (hist)");
    exp->add_option("--alpha", x_alpha, "Level for histogram powers or tolerance calibration");
    exp->add_option("--vocab", x_vocab, "Vocabulary size");
    exp->add_option("--ntp", x_ntp, "NTP construction M1 or M2");
    exp->add_option("--eps", x_eps, "Epsilon values of the efficiency curve");
    exp->add_option("--samples", x_samples, "Monte Carlo samples (gapcheck)");
    exp->add_option("--sequences", x_sequences, "Watermarked texts (tolerance)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        Manifest manifest;
        manifest.seed = seed;

        if (*gen) {
            if (gen_dmin.has_value() != gen_dmax.has_value())
                throw Failure{usage, "--delta-min and --delta-max go together"};
            gm_toy_source source{gen_vocab, gen_dmin.value_or(gen_delta), gen_dmax.value_or(gen_delta),
                                 gm_derive_seed(seed, nullptr, 0)};
            std::vector<std::uint32_t> prompt;
            if (gen_prompt.empty()) {
                prompt.resize(gen_m);
                check(gm_random_prompt(gen_vocab, prompt.size(), seed, prompt.data()), "prompt");
            } else {
                prompt = parse_tokens(gen_prompt);
            }
            const gm_gen_config cfg{gen_n, gen_m, gen_no_mask ? 0 : 1, seed};
            SeqHandle seq;
            if (gen_null) {
                check(gm_generate_null(&source, prompt.data(), prompt.size(), &cfg, &seq.p), "generate");
            } else {
                KeyHandle key;
                gen_key.load(key);
                check(gm_generate(&source, key.p, prompt.data(), prompt.size(), &cfg, &seq.p), "generate");
            }
            emit(gen_out, seq_json(seq.p));
            manifest.command = "generate";
            manifest.config = {{"n", gen_n},          {"m", gen_m},
                               {"vocab_size", gen_vocab}, {"delta_min", source.delta_min},
                               {"delta_max", source.delta_max}, {"masking", !gen_no_mask},
                               {"null", gen_null},    {"prompt", prompt}};
            finish_manifest(manifest, gen_out, gen_manifest);
        } else if (*edit) {
            gm_edit_kind kind;
            check(gm_parse_edit_kind(edit_kind.c_str(), &kind), "--kind");
            auto seq = load_seq(edit_in);
            KeyHandle key;
            if (kind == GM_EDIT_ADVERSARIAL) edit_key.load(key);
            SeqHandle out;
            check(gm_edit(seq.p, kind, edit_fraction, edit_vocab, seed, key.p, &out.p), "edit");
            emit(edit_out, seq_json(out.p));
            manifest.command = "edit";
            manifest.config = {{"input", edit_in}, {"kind", edit_kind}, {"fraction", edit_fraction},
                               {"vocab_size", edit_vocab}};
            finish_manifest(manifest, edit_out, edit_manifest);
        } else if (*det) {
            if (!det_critical && !det_calibrate)
                throw Failure{usage, "detect needs --critical or --calibrate"};
            if (det_critical && det_calibrate) throw Failure{usage, "--critical and --calibrate are exclusive"};
            auto seq = load_seq(det_in);
            KeyHandle key;
            det_key.load(key);
            json detector = det_opts.to_json(det_critical);
            json calibration;
            if (det_calibrate) {
                std::size_t n_scored = 0;
                check(gm_pivots(seq.p, key.p, det_vocab, nullptr, 0, &n_scored), "pivots");
                if (n_scored == 0) throw Failure{data, "sequence has no scored positions"};
                calibration = det_cal.run(detector, n_scored, seed, jobs);
                detector["critical_value"] = calibration.at("critical_value");
            }
            CString verdict;
            check(gm_detect(detector.dump().c_str(), seq.p, key.p, det_vocab, &verdict.p), "detect");
            emit(det_out, verdict.str() + "\n");
            if (!det_pivots.empty()) {
                CString csv;
                check(gm_pivots_csv(seq.p, key.p, det_vocab, &csv.p), "pivots");
                write_file(det_pivots, csv.str());
                manifest.outputs.push_back(det_pivots);
            }
            manifest.command = "detect";
            manifest.config = {{"input", det_in}, {"vocab_size", det_vocab}, {"detector", detector}};
            if (det_calibrate) manifest.config["calibration"] = calibration;
            finish_manifest(manifest, det_out, det_manifest);
        } else if (*cal) {
            json detector = cal_opts.to_json(std::nullopt);
            json result;
            if (cal_clt) {
                if (cal_opts.kind != "sum") throw Failure{usage, "--clt applies to sum rules only"};
                double c = 0.0;
                check(gm_clt_critical(cal_opts.score.c_str(), cal_opts.param, cal_n, cal_cal.alpha, &c), "clt");
                detector["critical_value"] = c;
                result = {{"detector", detector}, {"n", cal_n}, {"alpha", cal_cal.alpha}, {"critical_value", c},
                          {"method", "clt"}};
            } else {
                result = cal_cal.run(detector, cal_n, seed, jobs);
            }
            emit(cal_out, result.dump(2) + "\n");
            manifest.command = "calibrate";
            manifest.config = {{"detector", detector}, {"n", cal_n}, {"alpha", cal_cal.alpha},
                               {"reps", cal_cal.reps}, {"outer", cal_cal.outer}, {"clt", cal_clt}};
            finish_manifest(manifest, cal_out, cal_manifest);
        } else if (*exp) {
            json config = json::object();
            if (!exp_config.empty()) {
                try {
                    config = json::parse(read_file(exp_config));
                } catch (const json::exception& e) {
                    throw Failure{data, "config '" + exp_config + "': " + e.what()};
                }
            }
            config["seed"] = seed;
            if (x_n) config["n"] = *x_n;
            if (x_grid) config["grid"] = *x_grid;
            if (x_trials) config["trials"] = *x_trials;
            if (x_p) config["p"] = *x_p;
            if (x_q) config["q"] = *x_q;
            if (x_alpha) config["alpha"] = *x_alpha;
            if (x_vocab) config["vocab_size"] = *x_vocab;
            if (x_ntp) config["ntp_mode"] = *x_ntp;
            if (!x_eps.empty()) config["epsilons"] = x_eps;
            if (x_samples) config["samples"] = *x_samples;
            if (x_sequences) config["sequences"] = *x_sequences;
            if (exp_suite == "tolerance" && exp_key.present() && !config.contains("key")) {
                KeyHandle probe;
                exp_key.load(probe);
                config["key"] = exp_key.hex.empty() ? std::string(std::getenv("GUMBELMARK_KEY")) : exp_key.hex;
            }
            CString bundle;
            check(gm_experiment_run(exp_suite.c_str(), config.dump().c_str(), jobs, &bundle.p), exp_suite);
            const json b = json::parse(bundle.str());
            const fs::path dir(exp_dir);
            for (const auto& [name, text] : b.at("files").items()) {
                write_file(dir / name, text.get<std::string>());
                manifest.outputs.push_back((dir / name).string());
                std::cout << (dir / name).string() << "\n";
            }
            manifest.command = "experiment " + exp_suite;
            manifest.config = b.at("config");
            if (manifest.config.contains("key")) manifest.config.erase("key");
            manifest.write(dir / ("manifest_" + exp_suite + ".json"));
        }
        return ok;
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return data;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return internal;
    }
}
