#ifndef AERO_ORCH_H
#define AERO_ORCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AeroStatus {
  AERO_STATUS_OK = 0,
  AERO_STATUS_NULL_POINTER = 1,
  AERO_STATUS_INVALID_STRING = 2,
  AERO_STATUS_DIMENSION = 3,
  AERO_STATUS_ARGUMENT = 4,
  AERO_STATUS_STRUCTURAL = 5,
  AERO_STATUS_SIZE = 6,
  AERO_STATUS_NO_VALID_ACTION = 7,
  AERO_STATUS_CONFIG = 8,
  AERO_STATUS_IO = 9,
  AERO_STATUS_PARSE = 10,
  AERO_STATUS_SERIALIZE = 11,
  AERO_STATUS_OUT_OF_RANGE = 12,
  AERO_STATUS_PANIC = 13,
} AeroStatus;

typedef enum AeroPolicy {
  AERO_POLICY_PERFECT = 0,
  AERO_POLICY_RANDOM = 1,
  AERO_POLICY_ORACLE_REPLAY = 2,
} AeroPolicy;

// A scenario instance.
typedef struct AeroInstance AeroInstance;

// The aggregated result of a run.
typedef struct AeroReport AeroReport;

// A run configuration.
typedef struct AeroRunConfig AeroRunConfig;

// An exact solution of a micro instance.
typedef struct AeroSolution AeroSolution;

typedef struct AeroObjective {
  size_t accepted_count;
  double total_energy;
  double objective_value;
  double alpha;
} AeroObjective;

// One line of the metrics table. `oracle_ratio` is NaN when absent.
typedef struct AeroMetricsRow {
  double scenario_point;
  enum AeroPolicy policy;
  double acceptance_mean;
  double acceptance_std;
  double energy_mean;
  double energy_std;
  double latency_mean;
  double latency_std;
  double oracle_ratio;
} AeroMetricsRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call on the same thread.
const char *aero_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or come from this library and not be freed twice.
void aero_string_free(char *s);

// Generates a micro instance, small enough for the exact solver.
//
// # Safety
// `out_instance` must be a valid pointer.
enum AeroStatus aero_instance_generate_micro(uint64_t seed, struct AeroInstance **out_instance);

// Generates a toy instance (one row of five areas, two UAVs).
//
// # Safety
// `out_instance` must be a valid pointer.
enum AeroStatus aero_instance_generate_toy(uint64_t seed, struct AeroInstance **out_instance);

// Loads an instance from a TOML file.
//
// # Safety
// `path` must be a NUL-terminated string and `out_instance` a valid pointer.
enum AeroStatus aero_instance_load(const char *path, struct AeroInstance **out_instance);

// # Safety
// `instance` must come from this library; `path` must be NUL-terminated.
enum AeroStatus aero_instance_save(const struct AeroInstance *instance, const char *path);

// Node, request and frame counts of an instance. Any output may be null.
//
// # Safety
// `instance` must come from this library.
enum AeroStatus aero_instance_shape(const struct AeroInstance *instance,
                                    size_t *nodes,
                                    size_t *requests,
                                    size_t *frames);

// # Safety
// `instance` must be null or come from this library.
void aero_instance_free(struct AeroInstance *instance);

// Solves an instance exactly. Only micro-sized instances are admitted;
// larger ones fail with `Size`.
//
// # Safety
// `instance` must come from this library and `out_solution` be valid.
enum AeroStatus aero_oracle_solve(const struct AeroInstance *instance,
                                  double alpha,
                                  struct AeroSolution **out_solution);

// # Safety
// `solution` must come from this library and `objective` be valid.
enum AeroStatus aero_solution_objective(const struct AeroSolution *solution,
                                        struct AeroObjective *objective);

// Counts the constraint violations of a solution's allocation on an
// instance.
//
// # Safety
// Both handles must come from this library and `violations` be valid.
enum AeroStatus aero_solution_check(const struct AeroSolution *solution,
                                    const struct AeroInstance *instance,
                                    size_t *violations);

// Allocation of a solution as a TOML string; release with
// [`aero_string_free`].
//
// # Safety
// `solution` must come from this library and `out_toml` be valid.
enum AeroStatus aero_solution_allocation_toml(const struct AeroSolution *solution, char **out_toml);

// # Safety
// `solution` must be null or come from this library.
void aero_solution_free(struct AeroSolution *solution);

// Loads a run configuration from a TOML file.
//
// # Safety
// `path` must be NUL-terminated and `out_config` valid.
enum AeroStatus aero_run_config_load(const char *path, struct AeroRunConfig **out_config);

// Built-in configuration: `toy`, `requests-sweep`, `network-sweep` or
// `channels-sweep`.
//
// # Safety
// `name` must be NUL-terminated and `out_config` valid.
enum AeroStatus aero_run_config_preset(const char *name, struct AeroRunConfig **out_config);

// Restricts a configuration to the seeds `first .. first + count` and,
// when `frames` is nonzero, shortens the horizon.
//
// # Safety
// `config` must come from this library.
enum AeroStatus aero_run_config_limit(struct AeroRunConfig *config,
                                      uint64_t first,
                                      uint64_t count,
                                      size_t frames);

// # Safety
// `config` must be null or come from this library.
void aero_run_config_free(struct AeroRunConfig *config);

// Runs every policy over every sweep point and seed of a configuration.
//
// # Safety
// `config` must come from this library and `out_report` be valid.
enum AeroStatus aero_run(const struct AeroRunConfig *config, struct AeroReport **out_report);

// Number of metrics rows, or 0 for a null report.
//
// # Safety
// `report` must be null or come from this library.
size_t aero_report_row_count(const struct AeroReport *report);

// # Safety
// `report` must come from this library and `row` be valid.
enum AeroStatus aero_report_row(const struct AeroReport *report,
                                size_t index,
                                struct AeroMetricsRow *row);

// The full report, including per-episode measurements, as JSON; release
// with [`aero_string_free`].
//
// # Safety
// `report` must come from this library and `out_json` be valid.
enum AeroStatus aero_report_json(const struct AeroReport *report, char **out_json);

// # Safety
// `report` must be null or come from this library.
void aero_report_free(struct AeroReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AERO_ORCH_H */
