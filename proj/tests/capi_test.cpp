#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "gumbelmark/gumbelmark.h"

using nlohmann::json;

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    gm_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("keys and prf") {
    gm_key* key = nullptr;
    REQUIRE(gm_key_from_string("k", &key) == GM_OK);
    const uint32_t w[5] = {1, 2, 3, 4, 5};
    double u = 0;
    REQUIRE(gm_prf_uniform(key, w, 5, 7, 50, &u) == GM_OK);
    CHECK(u == 0.8888511923925577);
    CHECK(gm_prf_uniform(key, w, 5, 50, 50, &u) == GM_ERR_INPUT);
    CHECK(std::strlen(gm_last_error()) > 0);
    gm_key_free(key);
    CHECK(gm_key_from_hex("xyz", &key) == GM_ERR_INPUT);
    CHECK(std::string(gm_version()).size() > 0);
}

TEST_CASE("generate, edit, detect") {
    gm_key* key = nullptr;
    REQUIRE(gm_key_from_hex("00ff10", &key) == GM_OK);
    gm_toy_source src{50, 0.3, 0.3, 1};
    gm_gen_config cfg{400, 5, 1, 2};
    uint32_t prompt[5];
    REQUIRE(gm_random_prompt(50, 5, 2, prompt) == GM_OK);
    gm_tokenseq* seq = nullptr;
    REQUIRE(gm_generate(&src, key, prompt, 5, &cfg, &seq) == GM_OK);
    CHECK(gm_tokenseq_size(seq) == 405);
    CHECK(gm_tokenseq_prompt_length(seq) == 5);

    char* text = nullptr;
    REQUIRE(gm_tokenseq_to_json(seq, &text) == GM_OK);
    const std::string doc = take(text);
    gm_tokenseq* back = nullptr;
    REQUIRE(gm_tokenseq_from_json(doc.c_str(), &back) == GM_OK);
    CHECK(gm_tokenseq_size(back) == 405);
    gm_tokenseq_free(back);
    CHECK(gm_tokenseq_from_json("{\"tokens\":", &back) == GM_ERR_DATA);

    size_t count = 0;
    REQUIRE(gm_pivots(seq, key, 50, nullptr, 0, &count) == GM_OK);
    CHECK(count == 400);
    std::vector<double> y(count);
    REQUIRE(gm_pivots(seq, key, 50, y.data(), y.size(), &count) == GM_OK);

    const char* det = R"({"kind":"trgof","s":2,"c_plus":"1/n"})";
    REQUIRE(gm_detector_validate(det) == GM_OK);
    CHECK(gm_detector_validate(R"({"kind":"trgof","s":"two"})") == GM_ERR_INPUT);
    char* calib = nullptr;
    REQUIRE(gm_mc_critical(det, 400, 0.01, 500, 1, 3, 1, nullptr, &calib) == GM_OK);
    const auto cal = json::parse(take(calib));
    json spec = json::parse(det);
    spec["critical_value"] = cal["critical_value"];
    char* verdict = nullptr;
    REQUIRE(gm_detect(spec.dump().c_str(), seq, key, 50, &verdict) == GM_OK);
    const auto v = json::parse(take(verdict));
    CHECK(v["reject"] == true);
    double stat = 0;
    REQUIRE(gm_detector_statistic(spec.dump().c_str(), y.data(), y.size(), &stat) == GM_OK);
    CHECK(stat == v["statistic"].get<double>());

    gm_edit_kind kind;
    REQUIRE(gm_parse_edit_kind("del", &kind) == GM_OK);
    gm_tokenseq* edited = nullptr;
    REQUIRE(gm_edit(seq, kind, 0.1, 50, 1, nullptr, &edited) == GM_OK);
    CHECK(gm_tokenseq_size(edited) == 365);
    gm_tokenseq_free(edited);
    CHECK(gm_edit(seq, GM_EDIT_ADVERSARIAL, 0.1, 50, 1, nullptr, &edited) == GM_ERR_INPUT);

    gm_tokenseq_free(seq);
    gm_key_free(key);
}

TEST_CASE("critical values and experiments") {
    double crit = 0;
    REQUIRE(gm_clt_critical("ars", 0, 400, 0.01, &crit) == GM_OK);
    CHECK(crit == doctest::Approx(446.5269574808168));
    double r = 0;
    REQUIRE(gm_optimal_rate(0.4, 1.0, 1e-10, &r) == GM_OK);
    CHECK(r == doctest::Approx(0.248420682698998).epsilon(1e-9));
    char* bundle = nullptr;
    REQUIRE(gm_experiment_run("efficiency", R"({"epsilons":[1.0]})", 1, &bundle) == GM_OK);
    const auto b = json::parse(take(bundle));
    CHECK(b["suite"] == "efficiency");
    CHECK(b["files"].contains("efficiency.csv"));
    CHECK(gm_experiment_run("nope", "{}", 1, &bundle) == GM_ERR_INPUT);
    const uint64_t path[2] = {1, 2};
    CHECK(gm_derive_seed(5, path, 2) == gm_derive_seed(5, path, 2));
    CHECK(gm_derive_seed(5, path, 2) != gm_derive_seed(5, path, 1));
}
