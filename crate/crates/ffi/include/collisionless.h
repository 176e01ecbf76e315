#ifndef COLLISIONLESS_H
#define COLLISIONLESS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible call.
typedef enum {
  COLLISIONLESS_STATUS_OK = 0,
  COLLISIONLESS_STATUS_NULL_POINTER = 1,
  COLLISIONLESS_STATUS_INVALID_ARGUMENT = 2,
  // The top constrained eigenvalue is not positive.
  COLLISIONLESS_STATUS_NO_EXISTENCE = 3,
  // No root of the impact equations converged in the search window.
  COLLISIONLESS_STATUS_NO_ROOT = 4,
  // Any other numerical failure.
  COLLISIONLESS_STATUS_NUMERICAL = 5,
  COLLISIONLESS_STATUS_BUFFER_TOO_SMALL = 6,
  COLLISIONLESS_STATUS_PANIC = 7,
} CollisionlessStatus;

// A validated model together with its spectral data.
typedef struct CollisionlessModel CollisionlessModel;

// One converged root with its mode weights.
typedef struct CollisionlessSolution CollisionlessSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread. The pointer stays valid until
// the next failing call on the same thread.
const char *collisionless_last_error(void);

// Library version as a static NUL-terminated string.
const char *collisionless_version(void);

// Builds the armed biped with leg angle `theta` and unit masses and lengths.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
CollisionlessStatus collisionless_model_armed_biped(double theta, CollisionlessModel **out);

// Parses a model from its JSON file format.
//
// # Safety
// `json` must be a NUL-terminated string and `out` valid for one write.
CollisionlessStatus collisionless_model_from_json(const char *json, CollisionlessModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must come from this library and not be used afterwards.
void collisionless_model_free(CollisionlessModel *model);

// Number of degrees of freedom, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
uintptr_t collisionless_model_dimension(const CollisionlessModel *model);

// Copies `λ` (N values) and `λ'` (N−1 values) into caller buffers.
//
// # Safety
// The buffers must hold at least the stated capacities.
CollisionlessStatus collisionless_model_spectra(const CollisionlessModel *model,
                                                double *lambda,
                                                uintptr_t lambda_capacity,
                                                double *lambda_prime,
                                                uintptr_t lambda_prime_capacity);

// Scans `(0, o_max] × (0, o_prime_max]` with spacing `step`, refines every
// seed and returns the leftmost root of the lowest row.
//
// # Safety
// `model` must be a live handle and `out` valid for one write.
CollisionlessStatus collisionless_solve(const CollisionlessModel *model,
                                        double o_max,
                                        double o_prime_max,
                                        double step,
                                        CollisionlessSolution **out);

// Releases a solution. Null is ignored.
//
// # Safety
// `solution` must come from this library and not be used afterwards.
void collisionless_solution_free(CollisionlessSolution *solution);

// Half-durations of the unconstrained (`tau`) and constrained (`tau_prime`)
// phases.
//
// # Safety
// All pointers must be valid.
CollisionlessStatus collisionless_solution_times(const CollisionlessSolution *solution,
                                                 double *tau,
                                                 double *tau_prime);

// `σ_min/σ_max` of the impact system at the root.
//
// # Safety
// `solution` must be a live handle.
double collisionless_solution_rank_gap(const CollisionlessSolution *solution);

// Copies the weights `q` (N values) and `q'` (N−1 values).
//
// # Safety
// The buffers must hold at least the stated capacities.
CollisionlessStatus collisionless_solution_weights(const CollisionlessSolution *solution,
                                                   double *q,
                                                   uintptr_t q_capacity,
                                                   double *q_prime,
                                                   uintptr_t q_prime_capacity);

// Samples the trajectory and runs the physical checks with default
// tolerances. `passed` receives 1 or 0 and `energy_variation` the relative
// energy drift.
//
// # Safety
// All pointers must be valid; `solution` must belong to `model`.
CollisionlessStatus collisionless_solution_validate(const CollisionlessModel *model,
                                                    const CollisionlessSolution *solution,
                                                    uintptr_t samples_per_phase,
                                                    int32_t *passed,
                                                    double *energy_variation);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLLISIONLESS_H */
