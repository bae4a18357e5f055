/*
 * ramanpd.h - C interface to the Raman power-profile design library.
 *
 * Every fallible call returns an rpd_status; on failure rpd_last_error()
 * gives a thread-local message valid until the next failing call on the same
 * thread. Objects are opaque handles released with the matching *_free call
 * (NULL is accepted). Strings returned through char** are released with
 * rpd_string_free. Powers are mW, distances km, profiles dBm, row-major
 * (channel, distance).
 */
#ifndef RAMANPD_H
#define RAMANPD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RPD_API __declspec(dllexport)
#else
#define RPD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define RPD_PUMP_COUNT 8

typedef enum rpd_status {
  RPD_OK = 0,
  RPD_ERR_INVALID_ARGUMENT = 1,
  RPD_ERR_INVALID_STATE = 2,
  RPD_ERR_NOT_FOUND = 3,
  RPD_ERR_IO = 4,
  RPD_ERR_NOT_CONVERGED = 5,
  RPD_ERR_RUNTIME = 6
} rpd_status;

typedef struct rpd_config rpd_config;
typedef struct rpd_profile rpd_profile;
typedef struct rpd_model rpd_model;
typedef struct rpd_trace rpd_trace;

RPD_API const char* rpd_last_error(void);
RPD_API const char* rpd_version(void);
RPD_API void rpd_string_free(char* s);
RPD_API void rpd_doubles_free(double* p);

/* ---- configuration ---- */

RPD_API rpd_status rpd_config_default(rpd_config** out);
RPD_API rpd_status rpd_config_load(const char* path, rpd_config** out);
RPD_API rpd_status rpd_config_from_json(const char* json, rpd_config** out);
RPD_API void rpd_config_free(rpd_config* cfg);
RPD_API rpd_status rpd_config_to_json(const rpd_config* cfg, char** out_json);
/* Overrides one field. key is a dotted path ("de.max_evaluations", "seed");
 * value is JSON text ("1000", "[8,16]", "\"out\""). The result is revalidated. */
RPD_API rpd_status rpd_config_set(rpd_config* cfg, const char* key, const char* json_value);
/* Writes 16 hex digits plus NUL. */
RPD_API rpd_status rpd_config_hash(const rpd_config* cfg, char out[17]);
RPD_API rpd_status rpd_config_apply_seed_env(rpd_config* cfg, int* applied);
RPD_API rpd_status rpd_config_seed(const rpd_config* cfg, uint64_t* seed);
/* Pointer owned by cfg, valid until the next change. */
RPD_API const char* rpd_config_out_dir(const rpd_config* cfg);

/* ---- forward model ---- */

typedef struct rpd_solve_info {
  int converged;
  int iterations;
  double final_residual;
  size_t clamp_count;
} rpd_solve_info;

RPD_API rpd_status rpd_solve(const rpd_config* cfg, const double pumps_mw[RPD_PUMP_COUNT], rpd_profile** out,
                             rpd_solve_info* info);
RPD_API rpd_status rpd_target_flat(const rpd_config* cfg, double level_dbm, rpd_profile** out);
/* 4 sin(pi z / L + pi) dBm on every channel. */
RPD_API rpd_status rpd_target_symmetric(const rpd_config* cfg, rpd_profile** out);
RPD_API void rpd_profile_free(rpd_profile* p);
RPD_API rpd_status rpd_profile_shape(const rpd_profile* p, size_t* rows, size_t* cols);
/* Copies rows*cols values; n must be at least that. */
RPD_API rpd_status rpd_profile_values(const rpd_profile* p, double* out, size_t n);
RPD_API rpd_status rpd_profile_write_csv(const rpd_profile* p, const char* path, const char* config_hash);
RPD_API rpd_status rpd_profile_write_pgm(const rpd_profile* p, const char* path, const char* config_hash);

/* ---- objectives ---- */

typedef struct rpd_costs {
  double j0_db;
  double j1_db;
  double j2_db;
  double weighted_db; /* 0 when no weights were given */
  double max_asymmetry;
} rpd_costs;

/* weights may be NULL; otherwise three non-negative values summing to 1.
 * asymmetry_out may be NULL or hold one value per channel. */
RPD_API rpd_status rpd_profile_costs(const rpd_profile* p, const double* weights, rpd_costs* out,
                                     double* asymmetry_out);
RPD_API rpd_status rpd_profile_costs_json(const rpd_profile* p, const double* weights, const char* config_hash,
                                          char** out_json);
/* Per-channel max-minus-min over distance, one value per channel. */
RPD_API rpd_status rpd_profile_channel_excursion(const rpd_profile* p, double* out, size_t n);
/* Largest absolute difference between two profiles on the same grid. */
RPD_API rpd_status rpd_profile_emax(const rpd_profile* a, const rpd_profile* b, double* out);

/* ---- dataset ---- */

/* count 0 uses the config value. Records are independent of jobs. */
RPD_API rpd_status rpd_dataset_generate(const rpd_config* cfg, const char* dir, uint64_t count, unsigned jobs,
                                        uint64_t* redraws);
/* train, val, test */
RPD_API rpd_status rpd_dataset_counts(const char* dir, uint64_t counts[3]);

/* ---- surrogate ---- */

typedef void (*rpd_epoch_callback)(size_t epoch, double train_mse, double val_mse, void* user);

/* train_limit 0 uses the whole training split, otherwise its first records. */
RPD_API rpd_status rpd_model_train(const rpd_config* cfg, const char* dataset_dir, uint64_t train_limit,
                                   rpd_epoch_callback cb, void* user, rpd_model** out);
RPD_API rpd_status rpd_model_save(const rpd_model* m, const char* dir, const char* config_hash);
RPD_API rpd_status rpd_model_load(const char* dir, rpd_model** out);
RPD_API void rpd_model_free(rpd_model* m);
RPD_API rpd_status rpd_model_predict(const rpd_model* m, const rpd_profile* target, double pumps_mw[RPD_PUMP_COUNT]);
/* Learning curve of a freshly trained model (empty after load). */
RPD_API rpd_status rpd_model_write_curve_csv(const rpd_model* m, const char* path, const char* config_hash);
RPD_API rpd_status rpd_model_training_summary(const rpd_model* m, size_t* epochs_run, size_t* best_epoch,
                                              double* best_val_mse);

typedef struct rpd_eval_metrics {
  size_t samples;
  double mse;
  double r2[RPD_PUMP_COUNT];
  int r2_defined[RPD_PUMP_COUNT];
  double emax_mean_db;
  double emax_std_db;
} rpd_eval_metrics;

/* split: "train", "val", "test" or "all"; limit 0 means the whole split.
 * E_max re-solves every predicted pump set. emax_out (may be NULL) receives
 * a malloc'd array of metrics.samples values, released with rpd_doubles_free. */
RPD_API rpd_status rpd_model_evaluate(const rpd_model* m, const rpd_config* cfg, const char* dataset_dir,
                                      const char* split, uint64_t limit, unsigned jobs, rpd_eval_metrics* out,
                                      double** emax_out);

/* ---- design ---- */

typedef enum rpd_target_kind { RPD_TARGET_FLAT = 0, RPD_TARGET_SYMMETRIC = 1 } rpd_target_kind;
typedef enum rpd_objective_kind { RPD_OBJECTIVE_WEIGHTED = 0, RPD_OBJECTIVE_ASYMMETRY = 1 } rpd_objective_kind;

typedef struct rpd_design_options {
  rpd_target_kind target;
  double flat_level_dbm;
  rpd_objective_kind objective;
  double weights[3];
  int use_surrogate; /* 0: DE over the full pump table ranges */
  uint64_t seed;
  unsigned jobs; /* parallel solves for the initial population */
} rpd_design_options;

RPD_API void rpd_design_options_init(rpd_design_options* o);

typedef struct rpd_design_summary {
  size_t evaluations;
  size_t rejected_trials;
  size_t generations;
  int generation_cap_hit;
  double best_pumps_mw[RPD_PUMP_COUNT];
  rpd_costs best;
  double best_cost;
  int has_prediction;
  double prediction_pumps_mw[RPD_PUMP_COUNT];
  rpd_costs prediction;
  double prediction_cost;
  double lower_mw[RPD_PUMP_COUNT];
  double upper_mw[RPD_PUMP_COUNT];
} rpd_design_summary;

/* model may be NULL only when use_surrogate is 0. */
RPD_API rpd_status rpd_design_run(const rpd_config* cfg, const rpd_model* model, const rpd_design_options* opts,
                                  rpd_trace** out);
/* Runs one design per seed (opts->seed ignored); trials run over jobs
 * workers. out must hold n_trials pointers. */
RPD_API rpd_status rpd_design_trials(const rpd_config* cfg, const rpd_model* model, const rpd_design_options* opts,
                                     const uint64_t* seeds, size_t n_trials, unsigned jobs, rpd_trace** out);
RPD_API void rpd_trace_free(rpd_trace* t);
RPD_API rpd_status rpd_trace_summary(const rpd_trace* t, rpd_design_summary* out);
RPD_API rpd_status rpd_trace_length(const rpd_trace* t, size_t* n);
RPD_API rpd_status rpd_trace_best_so_far(const rpd_trace* t, double* out, size_t n);
RPD_API rpd_status rpd_trace_write_csv(const rpd_trace* t, const char* path, const char* config_hash);
/* Profiles of the best individual and of the surrogate prediction (if any). */
RPD_API rpd_status rpd_trace_best_profile(const rpd_trace* t, rpd_profile** out);
RPD_API rpd_status rpd_trace_prediction_profile(const rpd_trace* t, rpd_profile** out);

/* Mean/sample-std best-cost curves over n >= 2 traces, written as CSV. */
RPD_API rpd_status rpd_trials_write_stats(const rpd_trace* const* traces, size_t n, const char* path,
                                          const char* config_hash, double* final_mean, double* final_std);

#ifdef __cplusplus
}
#endif

#endif /* RAMANPD_H */
