#include <doctest.h>

#include <algorithm>
#include <array>
#include <vector>

#include "gumbelmark/error.hpp"
#include "gumbelmark/pivotal.hpp"
#include "gumbelmark/prf.hpp"
#include "gumbelmark/watermark.hpp"

using namespace gumbelmark;

TEST_CASE("gumbel_decode examples") {
    const std::array<double, 3> xi3{0.1, 0.99, 0.5};
    CHECK(gumbel_decode(NtpDist({1.0, 0.0, 0.0}), xi3) == 0);
    const std::array<double, 2> xi{0.9, 0.2};
    CHECK(gumbel_decode(NtpDist({0.5, 0.5}), xi) == 0);
    const std::array<double, 2> tie{0.5, 0.5};
    CHECK(gumbel_decode(NtpDist({0.5, 0.5}), tie) == 0);
    CHECK_THROWS_AS(gumbel_decode(NtpDist({0.5, 0.5}), xi3), InputError);
}

TEST_CASE("generate") {
    const ToySource src{50, 0.3, 0.3, 4};
    const Key key = Key::from_string("key");
    const std::vector<TokenId> prompt{1, 2, 3, 4, 5};
    GenConfig cfg{200, 5, false, 9};
    const auto a = generate(src, key, prompt, cfg);
    CHECK(a.size() == 205);
    CHECK(a.prompt_length() == 5);
    CHECK(std::count(a.provenance.begin() + 5, a.provenance.end(), Provenance::Watermarked) == 200);
    CHECK(generate(src, key, prompt, cfg) == a);

    cfg.masking = true;
    const auto b = generate(src, key, prompt, cfg);
    CHECK(std::count(b.provenance.begin(), b.provenance.end(), Provenance::Prompt) == 5);

    const std::vector<TokenId> short_prompt{1, 2};
    CHECK_THROWS_AS(generate(src, key, short_prompt, cfg), InputError);
}

TEST_CASE("watermarked pivots are larger than uniform, wrong key is not") {
    const ToySource src{50, 0.3, 0.3, 4};
    const Key key = Key::from_string("key");
    const std::vector<TokenId> prompt{7, 7, 1, 9, 3};
    const auto seq = generate(src, key, prompt, GenConfig{2000, 5, true, 2});
    double right = 0.0, wrong = 0.0;
    const auto pr = pivot_series(seq, key, 50);
    const auto pw = pivot_series(seq, Key::from_string("other"), 50);
    for (double y : pr.y) right += y;
    for (double y : pw.y) wrong += y;
    right /= static_cast<double>(pr.size());
    wrong /= static_cast<double>(pw.size());
    CHECK(right > 0.6);
    CHECK(wrong == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("generate_null") {
    const ToySource src{50, 0.3, 0.3, 4};
    const std::vector<TokenId> prompt{1, 2, 3, 4, 5};
    const auto seq = generate_null(src, prompt, GenConfig{300, 5, true, 1});
    CHECK(std::count(seq.provenance.begin(), seq.provenance.end(), Provenance::Watermarked) == 0);
    CHECK(std::count(seq.provenance.begin(), seq.provenance.end(), Provenance::Sampled) == 300);
    CHECK(generate_null(src, prompt, GenConfig{300, 5, true, 1}) == seq);
}

TEST_CASE("TokenSeq validation") {
    TokenSeq s;
    s.m = 2;
    s.push_back(1, Provenance::Watermarked);
    s.push_back(1, Provenance::Sampled);
    CHECK_THROWS_AS(validate(s), InputError);
}
