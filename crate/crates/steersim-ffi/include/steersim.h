/* C interface of the steersim steering-analysis library. */

#ifndef STEERSIM_H
#define STEERSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible API call.
typedef enum SteersimStatus {
  // Success.
  STEERSIM_STATUS_OK = 0,
  // A required pointer argument was null.
  STEERSIM_STATUS_NULL_ARGUMENT = 1,
  // Malformed state specifier or other unparsable input.
  STEERSIM_STATUS_PARSE_ERROR = 2,
  // Underlying file could not be read.
  STEERSIM_STATUS_IO_ERROR = 3,
  // Counts too sparse for a stable estimate.
  STEERSIM_STATUS_STATISTICAL_ERROR = 4,
  // Argument outside its domain (party index, probability, ...).
  STEERSIM_STATUS_INVALID_ARGUMENT = 5,
  // Numerical validation failed (non-physical state, ...).
  STEERSIM_STATUS_NUMERICAL_ERROR = 6,
  // Internal panic; the library state is still consistent.
  STEERSIM_STATUS_PANIC = 7,
} SteersimStatus;

// Opaque state handle: a density matrix plus the specifier and noise
// level it was built from.
typedef struct SteersimState SteersimState;

// Static name of a status code; never null, do not free.
const char *steersim_status_name(enum SteersimStatus status);

// Detail message of the most recent failure on this thread. The
// pointer stays valid until the next failing call on the same thread;
// do not free it.
const char *steersim_last_error_message(void);

// Parses a state specifier (w:a,b,g | wn:N | ghz:mu,nu | prep:t1,t2 |
// file:path), applies depolarizing noise of strength `noise`, and
// writes a new handle to `out_state`.
//
// # Safety
//
// `spec` must point to a NUL-terminated string and `out_state` to a
// writable pointer slot. The handle must be released with
// [`steersim_state_free`].
enum SteersimStatus steersim_state_parse(const char *spec,
                                         double noise,
                                         struct SteersimState **out_state);

// Releases a handle created by [`steersim_state_parse`]. Null is a
// no-op.
//
// # Safety
//
// `state` must be null or a pointer previously returned by
// [`steersim_state_parse`] that has not been freed yet.
void steersim_state_free(struct SteersimState *state);

// Writes the number of qubits of the state to `out_count`.
//
// # Safety
//
// `state` must be a live handle and `out_count` writable.
enum SteersimStatus steersim_state_qubit_count(const struct SteersimState *state,
                                               uint32_t *out_count);

// Writes the three-setting steering parameter of the ordered pair
// (steerer, steered) to `out_value`; values below 2 certify steering.
//
// # Safety
//
// `state` must be a live handle and `out_value` writable.
enum SteersimStatus steersim_steering_parameter(const struct SteersimState *state,
                                                uint32_t steerer,
                                                uint32_t steered,
                                                double *out_value);

// Writes the W-projector witness value (negative certifies genuine
// tripartite entanglement) to `out_value`; three-qubit states only.
//
// # Safety
//
// `state` must be a live handle and `out_value` writable.
enum SteersimStatus steersim_witness_value(const struct SteersimState *state, double *out_value);

// Writes the full analytic report (steering matrix, classification,
// witness and shareability verdicts) as a JSON string to `out_json`.
//
// # Safety
//
// `state` must be a live handle and `out_json` writable; release the
// string with [`steersim_string_free`].
enum SteersimStatus steersim_analyze_json(const struct SteersimState *state,
                                          double epsilon,
                                          char **out_json);

// Simulates counts for all settings, estimates the steering matrix
// with bootstrap error bars, and writes the report as a JSON string to
// `out_json`. `shots` = 0 uses analytic probabilities.
//
// # Safety
//
// `state` must be a live handle and `out_json` writable; release the
// string with [`steersim_string_free`].
enum SteersimStatus steersim_simulate_json(const struct SteersimState *state,
                                           uint64_t shots,
                                           uint64_t seed,
                                           uint32_t resamples,
                                           double epsilon,
                                           double sigma_k,
                                           char **out_json);

// Releases a string returned by this library. Null is a no-op.
//
// # Safety
//
// `text` must be null or a pointer obtained from this library that has
// not been freed yet.
void steersim_string_free(char *text);

#endif  /* STEERSIM_H */
