#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace gumbelmark {

using TokenId = std::uint32_t;

/// Secret watermark key: 1 to 64 opaque bytes.
class Key {
public:
    static constexpr std::size_t max_size = 64;

    explicit Key(std::vector<std::uint8_t> bytes);
    static Key from_hex(std::string_view hex);
    static Key from_string(std::string_view text);

    std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
    std::string to_hex() const;

    friend bool operator==(const Key&, const Key&) = default;

private:
    std::vector<std::uint8_t> bytes_;
};

/// Keyed pseudorandom uniform U_{t,w} in (0,1) for token `token` under the
/// m-token context `window`.
///
/// digest = SHA-256(key || le32(window[0]) || ... || le32(window[m-1]) || le32(token));
/// the top 53 bits of the first 8 digest bytes (big-endian) give x, and the
/// result is (x + 0.5) / 2^53.
double prf_uniform(const Key& key, std::span<const TokenId> window, TokenId token, std::uint32_t vocab_size);

/// All vocab_size uniforms for one context; element w equals prf_uniform(key, window, w).
std::vector<double> prf_vector(const Key& key, std::span<const TokenId> window, std::uint32_t vocab_size);

}  // namespace gumbelmark
