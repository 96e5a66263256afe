#include <doctest.h>

#include <array>

#include "gumbelmark/error.hpp"
#include "gumbelmark/prf.hpp"

using namespace gumbelmark;

TEST_CASE("prf golden values") {
    const Key k = Key::from_string("k");
    const std::array<TokenId, 5> w{1, 2, 3, 4, 5};
    const std::array<TokenId, 5> w2{1, 2, 3, 4, 6};
    CHECK(prf_uniform(k, w, 7, 50) == 0.8888511923925577);
    CHECK(prf_uniform(k, w2, 7, 50) == 0.7899940605745508);
    CHECK(prf_uniform(k, w, 0, 50) == 0.19341243327480623);
    const std::array<TokenId, 5> zeros{};
    CHECK(prf_uniform(Key::from_hex("00ff10"), zeros, 1, 2) == 0.005798801932289377);
}

TEST_CASE("prf is deterministic and matches prf_vector") {
    const Key k = Key::from_string("another key");
    const std::array<TokenId, 3> w{9, 8, 7};
    const auto v = prf_vector(k, w, 20);
    REQUIRE(v.size() == 20);
    for (TokenId t = 0; t < 20; ++t) {
        CHECK(v[t] == prf_uniform(k, w, t, 20));
        CHECK(v[t] > 0.0);
        CHECK(v[t] < 1.0);
    }
}

TEST_CASE("prf input errors") {
    const Key k = Key::from_string("k");
    const std::array<TokenId, 1> w{0};
    CHECK_THROWS_AS(prf_uniform(k, w, 5, 5), InputError);
    CHECK_THROWS_AS(prf_vector(k, w, 1), InputError);
    CHECK_THROWS_AS(Key::from_hex("abc"), InputError);
    CHECK_THROWS_AS(Key::from_hex("zz"), InputError);
    CHECK_THROWS_AS(Key::from_string(""), InputError);
    CHECK(Key::from_hex("00FF10").to_hex() == "00ff10");
}
