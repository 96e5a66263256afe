#include "gumbelmark/watermark.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "gumbelmark/error.hpp"

namespace gumbelmark {
namespace {

TokenSeq start_sequence(const ToySource& source, std::span<const TokenId> prompt, const GenConfig& cfg) {
    validate(source);
    require(cfg.n >= 1, "n must be at least 1");
    require(cfg.m >= 1, "window size m must be at least 1");
    require(prompt.size() >= cfg.m, "prompt must supply at least m tokens");
    TokenSeq seq;
    seq.m = cfg.m;
    seq.tokens.reserve(prompt.size() + cfg.n);
    seq.provenance.reserve(prompt.size() + cfg.n);
    for (TokenId id : prompt) {
        require(id < source.vocab_size, "prompt token id out of vocabulary range");
        seq.push_back(id, Provenance::Prompt);
    }
    return seq;
}

std::span<const TokenId> window_before(const TokenSeq& seq, std::size_t t) {
    return std::span<const TokenId>(seq.tokens).subspan(t - seq.m, seq.m);
}

}  // namespace

std::size_t TokenSeq::prompt_length() const noexcept {
    std::size_t k = 0;
    while (k < provenance.size() && provenance[k] == Provenance::Prompt) ++k;
    return k;
}

void validate(const TokenSeq& seq) {
    require(seq.m >= 1, "window size m must be at least 1");
    require(seq.provenance.size() == seq.tokens.size(), "provenance length must equal token length");
    for (std::size_t t = 0; t < seq.size() && t < seq.m; ++t)
        require(seq.provenance[t] != Provenance::Watermarked, "the first m positions cannot be watermarked");
}

TokenId gumbel_decode(const NtpDist& p, std::span<const double> xi) {
    require(xi.size() == p.size(), "pseudorandom vector length must equal vocabulary size");
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = p.size();
    for (std::size_t w = 0; w < p.size(); ++w) {
        if (p[w] <= 0.0) continue;
        require(xi[w] > 0.0 && xi[w] < 1.0, "pseudorandom uniforms must lie in (0,1)");
        const double score = std::log(xi[w]) / p[w];
        if (arg == p.size() || score > best) {
            best = score;
            arg = w;
        }
    }
    if (arg == p.size()) throw InvariantError("NTP distribution has no positive entry");
    return static_cast<TokenId>(arg);
}

TokenId sample_multinomial(const NtpDist& p, Stream& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t w = 0; w < p.size(); ++w) {
        if (p[w] <= 0.0) continue;
        last_positive = w;
        cum += p[w];
        if (u < cum) return static_cast<TokenId>(w);
    }
    // u landed in the rounding gap above the accumulated sum
    return static_cast<TokenId>(last_positive);
}

TokenSeq generate(const ToySource& source, const Key& key, std::span<const TokenId> prompt, const GenConfig& cfg) {
    TokenSeq seq = start_sequence(source, prompt, cfg);
    Stream fallback(derive_seed(cfg.seed, {tag::fallback}));
    std::set<std::vector<TokenId>> seen;
    if (cfg.masking) {
        for (std::size_t t = cfg.m; t < seq.size(); ++t) {
            auto w = window_before(seq, t);
            seen.emplace(w.begin(), w.end());
        }
    }
    for (std::uint32_t step = 0; step < cfg.n; ++step) {
        const std::size_t t = seq.size();
        const auto window = window_before(seq, t);
        const NtpDist p = toy_next_dist(source, seq.tokens);
        bool repeated = false;
        if (cfg.masking) repeated = !seen.emplace(window.begin(), window.end()).second;
        if (repeated) {
            seq.push_back(sample_multinomial(p, fallback), Provenance::Sampled);
        } else {
            const auto xi = prf_vector(key, window, source.vocab_size);
            seq.push_back(gumbel_decode(p, xi), Provenance::Watermarked);
        }
    }
    return seq;
}

TokenSeq generate_null(const ToySource& source, std::span<const TokenId> prompt, const GenConfig& cfg) {
    TokenSeq seq = start_sequence(source, prompt, cfg);
    Stream fallback(derive_seed(cfg.seed, {tag::fallback}));
    for (std::uint32_t step = 0; step < cfg.n; ++step) {
        const NtpDist p = toy_next_dist(source, seq.tokens);
        seq.push_back(sample_multinomial(p, fallback), Provenance::Sampled);
    }
    return seq;
}

}  // namespace gumbelmark
