#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "gumbelmark/detectors.hpp"
#include "gumbelmark/prf.hpp"
#include "gumbelmark/watermark.hpp"

namespace gumbelmark {

enum class EditKind { Substitute, Insert, Delete, Adversarial };

std::string to_string(EditKind kind);
/// Accepts sub, ins, del, adv (and the long names).
EditKind parse_edit_kind(const std::string& name);

struct EditSpec {
    EditKind kind = EditKind::Substitute;
    double fraction = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t vocab_size = 0;
};

/// ceil(fraction * len), robust to fractions like 0.1 * 400 landing a hair above an integer.
std::size_t edit_count(double fraction, std::size_t len);

/// Random substitution, insertion or deletion of ceil(fraction * len) tokens
/// of the generated region (the prompt is never touched). Replacement and
/// inserted tokens are uniform over the vocabulary and marked Edited.
TokenSeq apply_random_edit(const TokenSeq& seq, const EditSpec& spec);

/// Replaces the ceil(fraction * len) generated tokens with the largest pivotal
/// statistics under `key` by uniform vocabulary draws.
TokenSeq apply_adversarial_edit(const TokenSeq& seq, double fraction, const Key& key, std::uint32_t vocab_size,
                                std::uint64_t seed);

/// Dispatches on spec.kind; `key` is only read for Adversarial.
TokenSeq apply_edit(const TokenSeq& seq, const EditSpec& spec, const Key* key);

/// Decides whether a (prompt + n_test tokens) sequence is watermarked.
using SequenceDetector = std::function<bool(const TokenSeq&)>;

/// Pivots under `key`, then the detector's statistic against its critical value.
SequenceDetector make_sequence_detector(const DetectorSpec& spec, const Key& key, std::uint32_t vocab_size);

struct ToleranceResult {
    double fraction = 0.0;       // largest edit count known to reject, over n0
    std::size_t edits = 0;
    std::size_t n0 = 0;
    bool unedited_rejected = false;  // false: the detector missed the clean text and fraction is 0
    std::size_t evaluations = 0;
};

/// Edit-tolerance limit by bisection over the edit count. Edits hit the
/// generated positions in a fixed order: a seeded random permutation for random
/// edits, descending pivotal statistic for Adversarial (needs `key`). The
/// detector sees the prompt plus the first n_test generated tokens.
ToleranceResult tolerance_limit(const TokenSeq& seq, EditKind kind, const SequenceDetector& detector,
                                std::size_t n_test, std::uint32_t vocab_size, std::uint64_t seed,
                                const Key* key = nullptr);

/// Sequence with the first `edits` positions of the fixed edit order corrupted,
/// truncated to prompt + n_test tokens. Exposed so callers can scan edit counts directly.
class EditLadder {
public:
    EditLadder(const TokenSeq& seq, EditKind kind, std::size_t n_test, std::uint32_t vocab_size, std::uint64_t seed,
               const Key* key = nullptr);
    TokenSeq at(std::size_t edits) const;
    std::size_t n0() const noexcept { return order_.size(); }

private:
    TokenSeq base_;
    EditKind kind_;
    std::size_t n_test_;
    std::size_t prompt_;
    std::vector<std::size_t> order_;        // generated positions in edit order
    std::vector<TokenId> replacement_;      // token used when order_[i] is substituted or inserted
};

}  // namespace gumbelmark
