#include "gumbelmark/serialize.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "gumbelmark/error.hpp"

namespace gumbelmark {
namespace {

using nlohmann::json;

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid JSON: ") + e.what());
    }
}

template <class T>
T field(const json& j, const char* name) {
    if (!j.contains(name)) throw DataError(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception& e) {
        throw DataError(std::string("bad field '") + name + "': " + e.what());
    }
}

json detector_json(const DetectorSpec& spec) {
    json j;
    j["kind"] = to_string(spec.kind);
    j["s"] = spec.s;
    if (spec.c_plus.rule == CPlus::Rule::Fixed)
        j["c_plus"] = spec.c_plus.value;
    else
        j["c_plus"] = spec.c_plus.to_string();
    j["score"] = to_string(spec.score);
    j["delta0"] = spec.score.param;
    j["critical_value"] = spec.critical_value;
    return j;
}

DetectorSpec detector_from(const json& j) {
    DetectorSpec spec;
    const auto kind = field<std::string>(j, "kind");
    if (kind == "trgof")
        spec.kind = DetectorKind::TrGoF;
    else if (kind == "hc")
        spec.kind = DetectorKind::HC;
    else if (kind == "sum")
        spec.kind = DetectorKind::Sum;
    else
        throw DataError("unknown detector kind '" + kind + "'");
    if (j.contains("s")) spec.s = field<double>(j, "s");
    if (j.contains("c_plus")) {
        const auto& c = j.at("c_plus");
        try {
            spec.c_plus = c.is_string() ? CPlus::parse(c.get<std::string>()) : CPlus::fixed(c.get<double>());
        } catch (const InputError& e) {
            throw DataError(e.what());
        }
    }
    if (j.contains("score")) {
        const double param = j.contains("delta0") ? field<double>(j, "delta0") : 0.0;
        try {
            spec.score = parse_score_kind(field<std::string>(j, "score"), param);
        } catch (const InputError& e) {
            throw DataError(e.what());
        }
    }
    if (j.contains("critical_value")) spec.critical_value = field<double>(j, "critical_value");
    try {
        validate(spec);
    } catch (const InputError& e) {
        throw DataError(e.what());
    }
    return spec;
}

}  // namespace

std::string tokenseq_to_json(const TokenSeq& seq) {
    json j;
    j["tokens"] = seq.tokens;
    json prov = json::array();
    for (auto p : seq.provenance) prov.push_back(std::string(1, static_cast<char>(p)));
    j["provenance"] = std::move(prov);
    j["m"] = seq.m;
    return j.dump();
}

TokenSeq tokenseq_from_json(const std::string& text) {
    const json j = parse(text);
    TokenSeq seq;
    seq.tokens = field<std::vector<TokenId>>(j, "tokens");
    seq.m = field<std::uint32_t>(j, "m");
    for (const auto& s : field<std::vector<std::string>>(j, "provenance")) {
        if (s.size() != 1) throw DataError("provenance entries must be single characters");
        switch (s[0]) {
            case 'W': seq.provenance.push_back(Provenance::Watermarked); break;
            case 'S': seq.provenance.push_back(Provenance::Sampled); break;
            case 'P': seq.provenance.push_back(Provenance::Prompt); break;
            case 'E': seq.provenance.push_back(Provenance::Edited); break;
            default: throw DataError("unknown provenance flag '" + s + "'");
        }
    }
    try {
        validate(seq);
    } catch (const InputError& e) {
        throw DataError(e.what());
    }
    return seq;
}

std::string detector_to_json(const DetectorSpec& spec) { return detector_json(spec).dump(); }

DetectorSpec detector_from_json(const std::string& text) { return detector_from(parse(text)); }

std::string ntp_to_json(const NtpDist& p) { return json(std::vector<double>(p.probs().begin(), p.probs().end())).dump(); }

NtpDist ntp_from_json(const std::string& text) {
    const json j = parse(text);
    try {
        return NtpDist(j.get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw DataError(std::string("NTP distribution must be an array of numbers: ") + e.what());
    } catch (const InputError& e) {
        throw DataError(e.what());
    }
}

std::string calibration_to_json(const CalibrationResult& r) {
    json j;
    j["detector"] = detector_json(r.detector);
    j["n"] = r.n;
    j["alpha"] = r.alpha;
    j["critical_value"] = r.critical_value;
    j["reps"] = r.reps;
    j["outer"] = r.outer;
    j["seed"] = r.seed;
    j["unstable"] = r.unstable;
    return j.dump(2);
}

CalibrationResult calibration_from_json(const std::string& text) {
    const json j = parse(text);
    CalibrationResult r;
    if (!j.contains("detector")) throw DataError("missing field 'detector'");
    r.detector = detector_from(j.at("detector"));
    r.n = field<std::size_t>(j, "n");
    r.alpha = field<double>(j, "alpha");
    r.critical_value = field<double>(j, "critical_value");
    r.reps = field<std::size_t>(j, "reps");
    r.outer = field<std::size_t>(j, "outer");
    r.seed = field<std::uint64_t>(j, "seed");
    if (j.contains("unstable")) r.unstable = field<bool>(j, "unstable");
    return r;
}

std::string calibration_cache_key(const DetectorSpec& detector, std::size_t n, double alpha, std::size_t reps,
                                  std::size_t outer, std::uint64_t seed) {
    DetectorSpec d = detector;
    d.critical_value = 0.0;
    const std::string canonical = detector_json(d).dump() + "|" + std::to_string(n) + "|" + format_double(alpha) +
                                  "|" + std::to_string(reps) + "|" + std::to_string(outer) + "|" + std::to_string(seed);
    // 64-bit FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << "calib_" << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

std::string verdict_to_json(const Verdict& v) {
    json j;
    j["statistic"] = v.statistic;
    j["n_scored"] = v.n_scored;
    j["critical_value"] = v.critical_value;
    j["reject"] = v.reject;
    j["detector"] = detector_json(v.detector);
    return j.dump(2);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw InvariantError("to_chars failed");
    return std::string(buf, end);
}

std::string pivots_to_csv(const PivotSeries& pivots, std::size_t first_position) {
    CsvTable table({"t", "y", "p"});
    for (std::size_t t = 0; t < pivots.size(); ++t)
        table.row({std::to_string(first_position + t), format_double(pivots.y[t]), format_double(pivots.p[t])});
    return table.str();
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
    text_ += '\n';
}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw InvariantError("CSV row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += '\n';
    ++rows_;
    return *this;
}

CsvTable& CsvTable::row_numbers(std::span<const double> values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    return row(cells);
}

}  // namespace gumbelmark
