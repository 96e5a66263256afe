#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gumbelmark/prf.hpp"
#include "gumbelmark/rng.hpp"
#include "gumbelmark/tokensource.hpp"

namespace gumbelmark {

/// Where a token came from. Diagnostics only; detectors never read it.
enum class Provenance : char {
    Watermarked = 'W',
    Sampled = 'S',
    Prompt = 'P',
    Edited = 'E',
};

struct TokenSeq {
    std::vector<TokenId> tokens;
    std::vector<Provenance> provenance;
    std::uint32_t m = 5;

    std::size_t size() const noexcept { return tokens.size(); }
    std::size_t prompt_length() const noexcept;
    void push_back(TokenId id, Provenance p) {
        tokens.push_back(id);
        provenance.push_back(p);
    }
    friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

/// Throws InputError unless provenance matches tokens and no position before m is Watermarked.
void validate(const TokenSeq& seq);

struct GenConfig {
    std::uint32_t n = 400;
    std::uint32_t m = 5;
    bool masking = true;
    std::uint64_t seed = 0;
};

/// argmax_w log(U_w)/P_w over tokens with P_w > 0; ties go to the lowest index.
TokenId gumbel_decode(const NtpDist& p, std::span<const double> xi);

/// Inverse-CDF draw from p with one uniform from `rng`.
TokenId sample_multinomial(const NtpDist& p, Stream& rng);

/// Watermarked autoregressive generation of cfg.n tokens after `prompt`.
/// With masking on, a step whose m-window was already seen (prompt contexts
/// included) falls back to plain sampling from the cfg.seed stream.
TokenSeq generate(const ToySource& source, const Key& key, std::span<const TokenId> prompt, const GenConfig& cfg);

/// Unwatermarked control: every generated token is plain multinomial sampling.
TokenSeq generate_null(const ToySource& source, std::span<const TokenId> prompt, const GenConfig& cfg);

}  // namespace gumbelmark
