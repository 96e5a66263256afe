#ifndef GUMBELMARK_H
#define GUMBELMARK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GM_API __declspec(dllexport)
#else
#define GM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gm_status {
    GM_OK = 0,
    GM_ERR_INPUT = 1,    /* invalid argument or configuration */
    GM_ERR_DATA = 2,     /* malformed document or data that cannot be processed */
    GM_ERR_INTERNAL = 3, /* invariant breach or unexpected failure */
} gm_status;

/* Message of the last failed call on this thread; never NULL. */
GM_API const char* gm_last_error(void);
GM_API const char* gm_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
GM_API void gm_string_free(char* s);

/* Seed of the named substream `path` under `seed`. */
GM_API uint64_t gm_derive_seed(uint64_t seed, const uint64_t* path, size_t len);

/* Keys */
typedef struct gm_key gm_key;

GM_API gm_status gm_key_from_hex(const char* hex, gm_key** out);
GM_API gm_status gm_key_from_string(const char* text, gm_key** out);
GM_API void gm_key_free(gm_key* key);

GM_API gm_status gm_prf_uniform(const gm_key* key, const uint32_t* window, size_t m, uint32_t token,
                                uint32_t vocab_size, double* out);

/* Token sequences */
typedef struct gm_tokenseq gm_tokenseq;

typedef struct gm_toy_source {
    uint32_t vocab_size;
    double delta_min;
    double delta_max;
    uint64_t seed;
} gm_toy_source;

typedef struct gm_gen_config {
    uint32_t n;
    uint32_t m;
    int masking;
    uint64_t seed;
} gm_gen_config;

GM_API gm_status gm_generate(const gm_toy_source* source, const gm_key* key, const uint32_t* prompt,
                             size_t prompt_len, const gm_gen_config* cfg, gm_tokenseq** out);
GM_API gm_status gm_generate_null(const gm_toy_source* source, const uint32_t* prompt, size_t prompt_len,
                                  const gm_gen_config* cfg, gm_tokenseq** out);
/* len uniform token ids below vocab_size from the prompt substream of seed. */
GM_API gm_status gm_random_prompt(uint32_t vocab_size, size_t len, uint64_t seed, uint32_t* out);
GM_API gm_status gm_tokenseq_from_json(const char* json, gm_tokenseq** out);
GM_API gm_status gm_tokenseq_to_json(const gm_tokenseq* seq, char** out);
GM_API size_t gm_tokenseq_size(const gm_tokenseq* seq);
GM_API size_t gm_tokenseq_prompt_length(const gm_tokenseq* seq);
GM_API void gm_tokenseq_free(gm_tokenseq* seq);

/* Edits */
typedef enum gm_edit_kind {
    GM_EDIT_SUBSTITUTE = 0,
    GM_EDIT_INSERT = 1,
    GM_EDIT_DELETE = 2,
    GM_EDIT_ADVERSARIAL = 3,
} gm_edit_kind;

GM_API gm_status gm_parse_edit_kind(const char* name, gm_edit_kind* out);

/* key may be NULL except for GM_EDIT_ADVERSARIAL. */
GM_API gm_status gm_edit(const gm_tokenseq* seq, gm_edit_kind kind, double fraction, uint32_t vocab_size,
                         uint64_t seed, const gm_key* key, gm_tokenseq** out);

/* Pivotal statistics of every position t >= m. Writes up to `capacity`
 * values; *count receives the full number. */
GM_API gm_status gm_pivots(const gm_tokenseq* seq, const gm_key* key, uint32_t vocab_size, double* y,
                           size_t capacity, size_t* count);
GM_API gm_status gm_pivots_csv(const gm_tokenseq* seq, const gm_key* key, uint32_t vocab_size, char** out);

/* Detection. Detectors are JSON objects:
 * {"kind": "trgof"|"hc"|"sum", "s": 2, "c_plus": 0.001|"1/n"|"1/n^2",
 *  "score": "ars"|"log"|"ind"|"opt", "delta0": 0.1, "critical_value": 12.3} */
/* GM_ERR_INPUT when the detector JSON is malformed or out of range. */
GM_API gm_status gm_detector_validate(const char* detector_json);
GM_API gm_status gm_detect(const char* detector_json, const gm_tokenseq* seq, const gm_key* key,
                           uint32_t vocab_size, char** verdict_json);
GM_API gm_status gm_detector_statistic(const char* detector_json, const double* y, size_t n, double* out);

/* Monte Carlo critical value; cache_dir may be NULL. Returns calibration JSON. */
GM_API gm_status gm_mc_critical(const char* detector_json, size_t n, double alpha, size_t reps, size_t outer,
                                uint64_t seed, unsigned jobs, const char* cache_dir, char** calibration_json);
GM_API gm_status gm_clt_critical(const char* score, double param, size_t n, double alpha, double* out);
GM_API gm_status gm_null_rejection_rate(const char* detector_json, size_t n, size_t trials, uint64_t seed,
                                        unsigned jobs, double* out);

GM_API gm_status gm_optimal_rate(double delta, double epsilon, double quad_tolerance, double* out);

/* Runs an experiment suite ("hist", "boundary", "sumboundary", "efficiency",
 * "gapcheck", "tolerance") from a JSON config. *bundle_json receives
 * {"files": {"<name>.csv": "<csv text>", ...}, "config": {...resolved config}}. */
GM_API gm_status gm_experiment_run(const char* suite, const char* config_json, unsigned jobs, char** bundle_json);

#ifdef __cplusplus
}
#endif

#endif
