#include "gumbelmark/prf.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <memory>

#include "gumbelmark/error.hpp"

namespace gumbelmark {
namespace {

struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const noexcept { EVP_MD_CTX_free(ctx); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

MdCtx new_ctx() {
    MdCtx ctx(EVP_MD_CTX_new());
    if (!ctx) throw InvariantError("EVP_MD_CTX_new failed");
    return ctx;
}

std::array<std::uint8_t, 4> le32(std::uint32_t v) {
    return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v >> 16),
            static_cast<std::uint8_t>(v >> 24)};
}

void update(EVP_MD_CTX* ctx, const void* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx, data, len) != 1) throw InvariantError("EVP_DigestUpdate failed");
}

/// Digest context primed with key || window, cloned once per token.
MdCtx prefix_ctx(const Key& key, std::span<const TokenId> window, std::uint32_t vocab_size) {
    auto ctx = new_ctx();
    if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw InvariantError("EVP_DigestInit_ex failed");
    update(ctx.get(), key.bytes().data(), key.bytes().size());
    for (TokenId id : window) {
        require(id < vocab_size, "window token id out of vocabulary range");
        auto b = le32(id);
        update(ctx.get(), b.data(), b.size());
    }
    return ctx;
}

double finish(const EVP_MD_CTX* prefix, EVP_MD_CTX* scratch, TokenId token) {
    if (EVP_MD_CTX_copy_ex(scratch, prefix) != 1) throw InvariantError("EVP_MD_CTX_copy_ex failed");
    auto b = le32(token);
    update(scratch, b.data(), b.size());
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(scratch, digest.data(), &len) != 1 || len < 8) throw InvariantError("EVP_DigestFinal_ex failed");
    std::uint64_t head = 0;
    for (int i = 0; i < 8; ++i) head = (head << 8) | digest[i];
    const double u = (static_cast<double>(head >> 11) + 0.5) * 0x1.0p-53;
    // x = 2^53-1 rounds up to exactly 1.0
    return u < 1.0 ? u : std::nextafter(1.0, 0.0);
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Key::Key(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
    require(!bytes_.empty(), "key must not be empty");
    require(bytes_.size() <= max_size, "key longer than 64 bytes");
}

Key Key::from_hex(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    require(hex.size() % 2 == 0, "key hex must have an even number of digits");
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]), lo = hex_nibble(hex[i + 1]);
        require(hi >= 0 && lo >= 0, "key hex contains a non-hex character");
        out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
    }
    return Key(std::move(out));
}

Key Key::from_string(std::string_view text) { return Key(std::vector<std::uint8_t>(text.begin(), text.end())); }

std::string Key::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes_.size() * 2);
    for (auto b : bytes_) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

double prf_uniform(const Key& key, std::span<const TokenId> window, TokenId token, std::uint32_t vocab_size) {
    require(token < vocab_size, "token id out of vocabulary range");
    auto prefix = prefix_ctx(key, window, vocab_size);
    auto scratch = new_ctx();
    return finish(prefix.get(), scratch.get(), token);
}

std::vector<double> prf_vector(const Key& key, std::span<const TokenId> window, std::uint32_t vocab_size) {
    require(vocab_size >= 2, "vocab_size must be at least 2");
    auto prefix = prefix_ctx(key, window, vocab_size);
    auto scratch = new_ctx();
    std::vector<double> out(vocab_size);
    for (std::uint32_t w = 0; w < vocab_size; ++w) out[w] = finish(prefix.get(), scratch.get(), w);
    return out;
}

}  // namespace gumbelmark
