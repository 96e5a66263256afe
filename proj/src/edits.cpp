#include "gumbelmark/edits.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "gumbelmark/error.hpp"
#include "gumbelmark/pivotal.hpp"
#include "gumbelmark/rng.hpp"

namespace gumbelmark {
namespace {

TokenId uniform_token(Stream& rng, std::uint32_t vocab_size) { return static_cast<TokenId>(rng.below(vocab_size)); }

/// `count` distinct indices from [first, last), uniformly, in draw order.
std::vector<std::size_t> choose_positions(std::size_t first, std::size_t last, std::size_t count, Stream& rng) {
    std::vector<std::size_t> pool(last - first);
    std::iota(pool.begin(), pool.end(), first);
    for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    pool.resize(count);
    return pool;
}

void check_fraction(double fraction) { require(fraction >= 0.0 && fraction <= 1.0, "edit fraction must lie in [0,1]"); }

/// Generated positions ordered by descending pivot (ties by position).
std::vector<std::size_t> adversarial_order(const TokenSeq& seq, const Key& key, std::uint32_t vocab_size) {
    const auto pivots = pivot_series(seq, key, vocab_size);
    const std::size_t first = std::max<std::size_t>(seq.prompt_length(), seq.m);
    std::vector<std::size_t> order(seq.size() - std::min(first, seq.size()));
    std::iota(order.begin(), order.end(), first);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pivots.y[a - seq.m] > pivots.y[b - seq.m]; });
    return order;
}

}  // namespace

std::string to_string(EditKind kind) {
    switch (kind) {
        case EditKind::Substitute: return "sub";
        case EditKind::Insert: return "ins";
        case EditKind::Delete: return "del";
        case EditKind::Adversarial: return "adv";
    }
    throw InvariantError("unknown edit kind");
}

EditKind parse_edit_kind(const std::string& name) {
    if (name == "sub" || name == "substitute") return EditKind::Substitute;
    if (name == "ins" || name == "insert") return EditKind::Insert;
    if (name == "del" || name == "delete") return EditKind::Delete;
    if (name == "adv" || name == "adversarial") return EditKind::Adversarial;
    throw InputError("unknown edit kind '" + name + "' (expected sub, ins, del or adv)");
}

std::size_t edit_count(double fraction, std::size_t len) {
    check_fraction(fraction);
    const double raw = fraction * static_cast<double>(len);
    return std::min(len, static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw))));
}

TokenSeq apply_random_edit(const TokenSeq& seq, const EditSpec& spec) {
    validate(seq);
    require(spec.kind != EditKind::Adversarial, "adversarial edits need a key; use apply_adversarial_edit");
    require(spec.vocab_size >= 2, "edit vocab_size must be at least 2");
    const std::size_t prompt = seq.prompt_length();
    const std::size_t len = seq.size() - prompt;
    const std::size_t count = edit_count(spec.fraction, len);
    Stream rng(derive_seed(spec.seed, {tag::edit, static_cast<std::uint64_t>(spec.kind)}));
    TokenSeq out = seq;
    switch (spec.kind) {
        case EditKind::Substitute:
            for (std::size_t pos : choose_positions(prompt, seq.size(), count, rng)) {
                out.tokens[pos] = uniform_token(rng, spec.vocab_size);
                out.provenance[pos] = Provenance::Edited;
            }
            break;
        case EditKind::Insert:
            for (std::size_t i = 0; i < count; ++i) {
                const auto at = static_cast<std::ptrdiff_t>(prompt + rng.below(out.size() - prompt + 1));
                out.tokens.insert(out.tokens.begin() + at, uniform_token(rng, spec.vocab_size));
                out.provenance.insert(out.provenance.begin() + at, Provenance::Edited);
            }
            break;
        case EditKind::Delete: {
            require(seq.size() - count >= static_cast<std::size_t>(seq.m) + 1,
                    "deletion would leave fewer than m+1 tokens");
            auto doomed = choose_positions(prompt, seq.size(), count, rng);
            std::sort(doomed.begin(), doomed.end(), std::greater<>());
            for (std::size_t pos : doomed) {
                out.tokens.erase(out.tokens.begin() + static_cast<std::ptrdiff_t>(pos));
                out.provenance.erase(out.provenance.begin() + static_cast<std::ptrdiff_t>(pos));
            }
            break;
        }
        case EditKind::Adversarial: break;
    }
    return out;
}

TokenSeq apply_adversarial_edit(const TokenSeq& seq, double fraction, const Key& key, std::uint32_t vocab_size,
                                std::uint64_t seed) {
    validate(seq);
    check_fraction(fraction);
    require(vocab_size >= 2, "edit vocab_size must be at least 2");
    const auto order = adversarial_order(seq, key, vocab_size);
    const std::size_t count = edit_count(fraction, order.size());
    Stream rng(derive_seed(seed, {tag::edit, static_cast<std::uint64_t>(EditKind::Adversarial)}));
    TokenSeq out = seq;
    for (std::size_t i = 0; i < count; ++i) {
        out.tokens[order[i]] = uniform_token(rng, vocab_size);
        out.provenance[order[i]] = Provenance::Edited;
    }
    return out;
}

TokenSeq apply_edit(const TokenSeq& seq, const EditSpec& spec, const Key* key) {
    if (spec.kind != EditKind::Adversarial) return apply_random_edit(seq, spec);
    require(key != nullptr, "adversarial edits need the watermark key");
    return apply_adversarial_edit(seq, spec.fraction, *key, spec.vocab_size, spec.seed);
}

SequenceDetector make_sequence_detector(const DetectorSpec& spec, const Key& key, std::uint32_t vocab_size) {
    auto statistic = std::make_shared<DetectorStatistic>(spec);
    return [statistic, key, vocab_size](const TokenSeq& seq) {
        const auto pivots = pivot_series(seq, key, vocab_size);
        if (pivots.size() == 0) return false;
        return (*statistic)(pivots.y) >= statistic->spec().critical_value;
    };
}

EditLadder::EditLadder(const TokenSeq& seq, EditKind kind, std::size_t n_test, std::uint32_t vocab_size,
                       std::uint64_t seed, const Key* key)
    : base_(seq), kind_(kind), n_test_(n_test), prompt_(seq.prompt_length()) {
    validate(seq);
    require(vocab_size >= 2, "edit vocab_size must be at least 2");
    require(n_test >= 1, "n_test must be positive");
    if (kind == EditKind::Adversarial) {
        require(key != nullptr, "adversarial edits need the watermark key");
        order_ = adversarial_order(seq, *key, vocab_size);
    } else {
        Stream rng(derive_seed(seed, {tag::permutation}));
        order_ = choose_positions(prompt_, seq.size(), seq.size() - prompt_, rng);
    }
    Stream rng(derive_seed(seed, {tag::edit, static_cast<std::uint64_t>(kind)}));
    replacement_.resize(order_.size());
    for (auto& r : replacement_) r = uniform_token(rng, vocab_size);
}

TokenSeq EditLadder::at(std::size_t edits) const {
    require(edits <= order_.size(), "more edits than generated tokens");
    TokenSeq out = base_;
    if (kind_ == EditKind::Delete || kind_ == EditKind::Insert) {
        // rebuild position by position so every edit refers to an original index
        std::vector<char> hit(base_.size(), 0);
        std::vector<TokenId> inserted(base_.size());
        for (std::size_t i = 0; i < edits; ++i) {
            hit[order_[i]] = 1;
            inserted[order_[i]] = replacement_[i];
        }
        out.tokens.clear();
        out.provenance.clear();
        for (std::size_t pos = 0; pos < base_.size(); ++pos) {
            if (kind_ == EditKind::Delete && hit[pos]) continue;
            out.push_back(base_.tokens[pos], base_.provenance[pos]);
            if (kind_ == EditKind::Insert && hit[pos]) out.push_back(inserted[pos], Provenance::Edited);
        }
    } else {
        for (std::size_t i = 0; i < edits; ++i) {
            out.tokens[order_[i]] = replacement_[i];
            out.provenance[order_[i]] = Provenance::Edited;
        }
    }
    const std::size_t keep = std::min(out.size(), prompt_ + n_test_);
    out.tokens.resize(keep);
    out.provenance.resize(keep);
    return out;
}

ToleranceResult tolerance_limit(const TokenSeq& seq, EditKind kind, const SequenceDetector& detector,
                                std::size_t n_test, std::uint32_t vocab_size, std::uint64_t seed, const Key* key) {
    const EditLadder ladder(seq, kind, n_test, vocab_size, seed, key);
    ToleranceResult result;
    result.n0 = ladder.n0();
    require(result.n0 >= 2, "tolerance search needs at least two generated tokens");
    result.unedited_rejected = detector(ladder.at(0));
    result.evaluations = 1;
    if (!result.unedited_rejected) return result;
    std::size_t lo = 0, hi = result.n0;
    while (hi - lo >= 2) {
        const std::size_t mid = (lo + hi) / 2;
        ++result.evaluations;
        if (detector(ladder.at(mid)))
            lo = mid;
        else
            hi = mid;
    }
    result.edits = lo;
    result.fraction = static_cast<double>(lo) / static_cast<double>(result.n0);
    return result;
}

}  // namespace gumbelmark
