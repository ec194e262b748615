#ifndef PERFHOM_H
#define PERFHOM_H

/* C interface to the perforated-homogenization core. All functions return a
 * ph_status; PH_OK means the out parameters are valid. On any failure the
 * message is retrievable with ph_last_error() on the same thread. Strings
 * returned through char** out parameters are heap-allocated and must be
 * released with ph_string_free. Handles are opaque; free them with their
 * matching *_free function. All calls are thread-safe as long as each handle
 * is used by one thread at a time. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PH_API __declspec(dllexport)
#else
#define PH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ph_status {
    PH_OK = 0,
    PH_ERR_DOMAIN = 1,      /* invalid value or state for the operation */
    PH_ERR_SHAPE = 2,       /* degenerate or malformed hole shape */
    PH_ERR_RESOLUTION = 3,  /* grid too coarse for the requested geometry */
    PH_ERR_CONVERGENCE = 4, /* iterative solver missed its tolerance */
    PH_ERR_CONFIG = 5,      /* malformed document, JSON, or parameter set */
    PH_ERR_ARGUMENT = 6,    /* null pointer or out-of-range C argument */
    PH_ERR_INTERNAL = 7
} ph_status;

/* Message for the most recent failing call on the calling thread. Never NULL;
 * empty string when no failure happened yet. */
PH_API const char* ph_last_error(void);

PH_API void ph_string_free(char* s);

PH_API const char* ph_version(void);

/* The seed-derivation mixer: realization i of a study draws from
 * ph_mix64(base_seed, i). Bit-exact contract documented in docs/FORMATS.md. */
PH_API uint64_t ph_mix64(uint64_t seed, uint64_t index);

/* ---- capacity ----------------------------------------------------------- */

/* shape: JSON {"kind":...,"params":{...}} or shorthand (ball:R,
 * axis_box:HX:HY:HZ, union_of_balls:CX:CY:CZ:R[:...]).
 * whole_space != 0: estimate Cap(F) by the truncation schedule
 * (2,4,8)*circumradius and ignore domain_radius. Otherwise solve at the given
 * domain_radius > circumradius. n is nodes per axis (n >= 33); extrapolate !=
 * 0 enables two-grid extrapolation. out_json receives a CapacityEstimate. */
PH_API ph_status ph_capacity(const char* shape, double domain_radius, int whole_space, int n,
                             int extrapolate, char** out_json);

/* ---- point process ------------------------------------------------------ */

/* generator_json: {"kind":"poisson"|"lattice"|"perturbed_lattice"|
 * "matern_hardcore"|"mixture", ...}.
 * window: {lo.x, lo.y, lo.z, hi.x, hi.y, hi.z}. out_json: realization. */
PH_API ph_status ph_sample(const char* generator_json, const double window[6], uint64_t seed,
                           char** out_json);

/* Splits a realization into (close part, far part) at distance delta. */
PH_API ph_status ph_thin(const char* realization_json, double delta, char** out_close_json,
                         char** out_far_json);

PH_API ph_status ph_estimate_c0(const char* realization_json, double* out_c0);

/* Good/bad decomposition summary with exact invariant checks. */
PH_API ph_status ph_decompose(const char* realization_json, double epsilon, double alpha, double M,
                              char** out_json);

/* ---- configuration ------------------------------------------------------ */

typedef struct ph_config ph_config;

PH_API ph_status ph_config_parse(const char* text, ph_config** out);
PH_API ph_status ph_config_render(const ph_config* cfg, char** out_text);
PH_API void ph_config_free(ph_config* cfg);

/* Override the worker count after parsing (used for PERFHOM_WORKERS). */
PH_API ph_status ph_config_set_workers(ph_config* cfg, int workers);

/* ---- single-row pipelines ----------------------------------------------- */

/* Each runs the pipeline for one (epsilon, seed) pair from the config:
 * epsilon <= 0 selects the config's first epsilon; seed_index selects
 * ph_mix64(base_seed, seed_index). Field dumps follow the config's
 * dump_fields/output_dir settings. out_json carries the scalar results. */
PH_API ph_status ph_solve(const ph_config* cfg, double epsilon, uint64_t seed_index,
                          char** out_json);
PH_API ph_status ph_corrector(const ph_config* cfg, double epsilon, uint64_t seed_index,
                              char** out_json);
PH_API ph_status ph_heat(const ph_config* cfg, double epsilon, uint64_t seed_index,
                         char** out_json);

/* ---- studies ------------------------------------------------------------ */

typedef struct ph_study ph_study;

PH_API ph_status ph_study_run(const ph_config* cfg, ph_study** out);
PH_API ph_status ph_study_csv(const ph_study* study, char** out_csv);
PH_API ph_status ph_study_manifest(const ph_study* study, char** out_json);
PH_API void ph_study_free(ph_study* study);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PERFHOM_H */
