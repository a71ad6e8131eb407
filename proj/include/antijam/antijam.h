/* C interface of the anti-jamming simulation library.
 *
 * Every function returns an aj_status. On failure the message of the last
 * error on the calling thread is available from aj_last_error() until the
 * next failing call on that thread. Handles are opaque and owned by the
 * caller; release them with the matching *_free function (NULL is accepted).
 * Strings returned through char** are released with aj_string_free. */
#ifndef ANTIJAM_H
#define ANTIJAM_H

#include <stddef.h>
#include <stdint.h>

#if defined(ANTIJAM_BUILDING_LIBRARY)
#define AJ_API __attribute__((visibility("default")))
#else
#define AJ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aj_status {
  AJ_OK = 0,
  AJ_ERR_INVALID_ARGUMENT = 1,
  AJ_ERR_GEOMETRY = 2,
  AJ_ERR_INFEASIBLE = 3,
  AJ_ERR_NOT_FOUND = 4,
  AJ_ERR_IO = 5,
  AJ_ERR_PARSE = 6,
  AJ_ERR_STATE = 7,
  AJ_ERR_INTERNAL = 99
} aj_status;

typedef struct aj_config aj_config;
typedef struct aj_scenario aj_scenario;
typedef struct aj_model aj_model;
typedef struct aj_report aj_report;

typedef struct aj_metrics {
  double total_interference;
  uint64_t completion_steps;
  double path_length;
  double jammer_rmse; /* meaningful only if has_rmse */
  int has_rmse;
  uint64_t jammer_misses;
  int completed;
  int triggered;
} aj_metrics;

typedef enum aj_sweep_kind {
  AJ_SWEEP_REGIONS = 0,     /* regions x jammers of the config */
  AJ_SWEEP_JAMMERS = 1,     /* jammers at fixed_regions */
  AJ_SWEEP_LOCALIZATION = 2 /* aif only, jammers at fixed_regions, localization_seeds */
} aj_sweep_kind;

AJ_API const char* aj_version(void);
AJ_API const char* aj_last_error(void);
AJ_API void aj_string_free(char* s);

/* ---- configuration ---- */
AJ_API aj_status aj_config_default(aj_config** out);
AJ_API aj_status aj_config_load(const char* path, aj_config** out);
/* Applies a JSON merge patch, then revalidates; the config is unchanged on error. */
AJ_API aj_status aj_config_merge(aj_config* cfg, const char* json_patch);
AJ_API aj_status aj_config_to_json(const aj_config* cfg, char** out);
AJ_API aj_status aj_config_out_dir(const aj_config* cfg, char** out);
AJ_API void aj_config_free(aj_config* cfg);

/* ---- scenarios ---- */
AJ_API uint64_t aj_scenario_seed(uint64_t base, int n_regions, int n_jammers, int replicate);
AJ_API aj_status aj_scenario_generate(const aj_config* cfg, int n_regions, int n_jammers,
                                      uint64_t seed, aj_scenario** out);
AJ_API aj_status aj_scenario_load(const char* path, aj_scenario** out);
AJ_API aj_status aj_scenario_save(const aj_scenario* s, const char* path);
AJ_API aj_status aj_scenario_counts(const aj_scenario* s, int* n_regions, int* n_jammers,
                                    uint64_t* seed);
AJ_API void aj_scenario_free(aj_scenario* s);
/* One file per (regions, jammers, replicate) of the config, named
 * scenario_N<n>_J<j>_<seed>.json, seeds as used by the sweeps. */
AJ_API aj_status aj_gen_scenarios(const aj_config* cfg, const char* dir, size_t* count);

/* ---- demonstrations and world model ---- */
/* Expert H0/H1 pairs on maps sharing the regions of `s`, written to
 * dir/d0.jsonl and dir/d1.jsonl (one demonstration per line). count
 * receives the number of pairs. */
AJ_API aj_status aj_demos_generate(const aj_config* cfg, const aj_scenario* s, const char* dir,
                                   size_t* count);
AJ_API aj_status aj_model_train(const aj_config* cfg, const char* d0_path, const char* d1_path,
                                aj_model** out);
AJ_API aj_status aj_model_load(const char* path, aj_model** out);
AJ_API aj_status aj_model_save(const aj_model* m, const char* path);
AJ_API void aj_model_free(aj_model* m);

/* ---- missions ---- */
/* method is "expert", "aif" or "qlearning". For aif, `model` may be NULL, in
 * which case one is trained for the scenario. */
AJ_API aj_status aj_run_mission(const aj_config* cfg, const aj_scenario* s, const char* method,
                                const aj_model* model, aj_report** out);
AJ_API aj_status aj_report_metrics(const aj_report* r, aj_metrics* out);
/* Writes the report with its scenario embedded. */
AJ_API aj_status aj_report_save(const aj_report* r, const char* path);
AJ_API void aj_report_free(aj_report* r);

/* ---- experiments ---- */
/* Writes runs.csv, aggregate.csv, trajectories/ (and localization.csv for
 * the localization kind) under out_dir. all_completed may be NULL. */
AJ_API aj_status aj_sweep(const aj_config* cfg, aj_sweep_kind kind, const char* out_dir,
                          int* all_completed);
AJ_API aj_status aj_audit(const char* dir, size_t* mismatches);

/* Trains the Q-table of `s`, stores it in cache_dir under the key the sweeps
 * look up, and writes the episode returns, one per line, to returns_path.
 * Both paths may be NULL. */
AJ_API aj_status aj_baseline_train(const aj_config* cfg, const aj_scenario* s,
                                   const char* cache_dir, const char* returns_path,
                                   size_t* stored_states);

#ifdef __cplusplus
}
#endif

#endif
