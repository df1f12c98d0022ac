#ifndef KLEIN_BILLIARDS_H
#define KLEIN_BILLIARDS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define KB_OK 0

#define KB_ERR_NULL -1

#define KB_ERR_UTF8 -2

#define KB_ERR_PANIC -3

#define KB_ERR_RANGE -4

// Boundary quadric `Σ x_i²/(b_i − c) = 1` of a family.
typedef struct KbBoundary KbBoundary;

// Confocal family `b_1 > … > b_d > 0`.
typedef struct KbFamily KbFamily;

// Traced chord billiard.
typedef struct KbTrajectory KbTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *kb_last_error_message(void);

// Creates a family from a comma-separated list such as `"5,3,1"` or
// `"7/2,2,1/3"`.
//
// # Safety
// `b` must be a nul-terminated string and `out` a valid pointer.
int32_t kb_family_new(const char *b, struct KbFamily **out);

// # Safety
// `family` must come from [`kb_family_new`] and not be used afterwards.
void kb_family_free(struct KbFamily *family);

// Dimension `d`, or 0 for a null handle.
//
// # Safety
// `family` must be null or a live handle.
size_t kb_family_dim(const struct KbFamily *family);

// Elliptic coordinates of `x` (length `d`) into `lambda` (length `d`).
//
// # Safety
// Pointers must be valid for `d` doubles, `d` the family dimension.
int32_t kb_to_elliptic(const struct KbFamily *family, const double *x, double *lambda);

// Caustic parameters of the line `x + t v` into `params` (length `d − 1`).
//
// # Safety
// `x`, `v` must be valid for `d` doubles and `params` for `d − 1`.
int32_t kb_line_caustics(const struct KbFamily *family,
                         const double *x,
                         const double *v,
                         double *params);

// Boundary member `c` (a number such as `"1/2"`) of `family`.
//
// # Safety
// `family` must be live, `c` nul-terminated and `out` valid.
int32_t kb_boundary_new(const struct KbFamily *family, const char *c, struct KbBoundary **out);

// # Safety
// `boundary` must come from [`kb_boundary_new`] and not be used afterwards.
void kb_boundary_free(struct KbBoundary *boundary);

// Chord billiard with `bounces` reflections from `(x0, v0)`.
//
// # Safety
// `x0`, `v0` must be valid for `d` doubles and `out` valid.
int32_t kb_trace_chords(const struct KbBoundary *boundary,
                        const double *x0,
                        const double *v0,
                        size_t bounces,
                        struct KbTrajectory **out);

// # Safety
// `traj` must come from [`kb_trace_chords`] and not be used afterwards.
void kb_trajectory_free(struct KbTrajectory *traj);

// Number of bounces, or 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
size_t kb_trajectory_len(const struct KbTrajectory *traj);

// Position and unit direction after `n` bounces (`n = 0` is the launch).
//
// # Safety
// `x`, `p` must be valid for `d` doubles.
int32_t kb_trajectory_state(const struct KbTrajectory *traj, size_t n, double *x, double *p);

// `|x_n − x_0| + |p̂_n − p̂_0|` into `residual`.
//
// # Safety
// `residual` must be a valid pointer.
int32_t kb_trajectory_closure(const struct KbTrajectory *traj, size_t n, double *residual);

// Exact periodicity verdict. `periodic` receives 1, 0, or −1 when the test
// does not apply (degenerate caustic).
//
// # Safety
// `a`, `mu` must be nul-terminated and `periodic` valid.
int32_t kb_cayley(const char *a, const char *mu, size_t n, int32_t *periodic);

// Continuous period indicator for `a` (length `d + 1`) and `mu` (length
// `d − 1`).
//
// # Safety
// Pointers must be valid for the stated lengths.
int32_t kb_period_indicator(const double *a, const double *mu, size_t d, size_t n, double *value);

// Runs the command-line harness on `argc` arguments (without the program
// name). The printed output is returned in `output` (release it with
// [`kb_string_free`]); the return value is the harness exit status.
//
// # Safety
// `argv` must hold `argc` nul-terminated strings and `output` be valid.
int32_t kb_run(size_t argc, const char *const *argv, char **output);

// # Safety
// `s` must come from this library and not be used afterwards.
void kb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KLEIN_BILLIARDS_H */
