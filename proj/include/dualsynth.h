/* C interface to the dualsynth controller synthesizer. */
#ifndef DUALSYNTH_H
#define DUALSYNTH_H

#include <stddef.h>
#include <stdint.h>

#if defined(DUALSYNTH_BUILDING)
#define DS_API __attribute__((visibility("default")))
#else
#define DS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ds_status {
    DS_OK = 0,
    DS_ERR_INPUT = 1,      /* malformed problem, controller or argument value */
    DS_ERR_IO = 2,         /* file could not be read or written */
    DS_ERR_REFUSED = 3,    /* controller asked to act outside its winning region */
    DS_ERR_INTERNAL = 4,   /* soundness check failed; a bug */
    DS_ERR_ARGUMENT = 5,   /* null handle or pointer */
    DS_ERR_BUFFER = 6      /* output buffer too small; *needed says how much */
} ds_status;

typedef enum ds_outcome {
    DS_REALIZABLE = 0,
    DS_UNREALIZABLE = 1,
    DS_UNKNOWN = 2
} ds_outcome;

typedef struct ds_problem ds_problem;
typedef struct ds_result ds_result;
typedef struct ds_trace ds_trace;
typedef struct ds_report ds_report;

typedef struct ds_options {
    int m;                /* split factor; 0 = problem file value, else 2^n */
    int max_iters;        /* 0 = problem file value */
    double min_cell;      /* < 0 = problem file value */
    unsigned threads;     /* reachability workers, >= 1 */
    int rebuild_check;    /* nonzero: cross-check seeded solves from scratch */
} ds_options;

DS_API void ds_options_init(ds_options* opts);

/* Message for the last failing call on this thread; never NULL. */
DS_API const char* ds_last_error(void);
DS_API const char* ds_version(void);

DS_API ds_status ds_problem_load_file(const char* path, ds_problem** out);
DS_API ds_status ds_problem_load_string(const char* json, ds_problem** out);
DS_API void ds_problem_free(ds_problem* p);
DS_API ds_status ds_problem_canonical_json(const ds_problem* p, char* buf, size_t cap, size_t* needed);
DS_API ds_status ds_problem_hash(const ds_problem* p, char* buf, size_t cap, size_t* needed);

/* opts may be NULL for defaults. */
DS_API ds_status ds_synthesize(const ds_problem* p, const ds_options* opts, ds_result** out);
DS_API ds_outcome ds_result_outcome(const ds_result* r);
DS_API int ds_result_iterations(const ds_result* r);
DS_API ds_status ds_result_verdict_json(const ds_result* r, char* buf, size_t cap, size_t* needed);
/* DS_ERR_REFUSED if the result is not realizable. */
DS_API ds_status ds_result_controller_json(const ds_result* r, char* buf, size_t cap, size_t* needed);
DS_API ds_status ds_result_write_artifacts(const ds_result* r, const char* dir, int with_fts);
DS_API void ds_result_free(ds_result* r);

/* Simulates a controller (JSON as written by ds_result_controller_json) on
 * its problem. env[t] is the environment valuation index at step t, the last
 * one held; env may be NULL when the alphabet has a single valuation. */
DS_API ds_status ds_simulate(const ds_problem* p, const char* controller_json, const double* s0, size_t s0_len,
                             const uint32_t* env, size_t env_len, int steps, ds_trace** out);
DS_API size_t ds_trace_length(const ds_trace* t);
/* State at row `row` into out[0..n); returns the state dimension. */
DS_API size_t ds_trace_state(const ds_trace* t, size_t row, double* out, size_t n);
DS_API ds_status ds_trace_csv(const ds_trace* t, char* buf, size_t cap, size_t* needed);
DS_API void ds_trace_free(ds_trace* t);

DS_API ds_status ds_report_load(const char* run_dir, ds_report** out);
DS_API int ds_report_partial(const ds_report* r);
DS_API ds_status ds_report_json(const ds_report* r, char* buf, size_t cap, size_t* needed);
DS_API ds_status ds_report_text(const ds_report* r, char* buf, size_t cap, size_t* needed);
DS_API void ds_report_free(ds_report* r);

#ifdef __cplusplus
}
#endif

#endif
