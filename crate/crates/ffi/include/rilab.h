#ifndef RILAB_H
#define RILAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum RilabStatus {
  RILAB_STATUS_OK = 0,
  RILAB_STATUS_INVALID_ARGUMENT = 1,
  RILAB_STATUS_NUMERICAL = 2,
  RILAB_STATUS_GUARD = 3,
  RILAB_STATUS_NULL_POINTER = 4,
  RILAB_STATUS_PANIC = 5,
  RILAB_STATUS_IO = 6,
} RilabStatus;

/**
 * Sampling kernel for the window `B(0, radius)` in `Z^d`.
 */
typedef struct RilabKernel RilabKernel;

/**
 * One interlacement sample restricted to a window.
 */
typedef struct RilabSample RilabSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into the library from this thread.
 */
const char *rilab_last_error(void);

/**
 * Library version as a static string.
 */
const char *rilab_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void rilab_string_free(char *s);

/**
 * Green function `G(0, x)` of simple random walk on `Z^d`.
 *
 * # Safety
 * `x` points to `d` integers; `out` is writable.
 */
enum RilabStatus rilab_green(size_t d, const int32_t *x, double tol, double *out);

/**
 * Capacity of the set of `n` points given row-major in `points`.
 *
 * # Safety
 * `points` holds `n * d` integers; `out` is writable.
 */
enum RilabStatus rilab_capacity(size_t d, const int32_t *points, size_t n, double tol, double *out);

/**
 * Probability that walk from a corner of `{0,1}^d` never returns to the cube.
 *
 * # Safety
 * `out` is writable.
 */
enum RilabStatus rilab_escape_probability(size_t d, double tol, double *out);

/**
 * Decoupling error `ε(u, L0, l0)` in dimension `d`.
 *
 * # Safety
 * `out` is writable.
 */
enum RilabStatus rilab_epsilon_error(double u, uint32_t base, uint32_t l0, size_t d, double *out);

/**
 * Trigger certificate: `*pass` is 1 when `(2l0+1)^{2d}(p+ε1+ε2) < 1/2`,
 * `*lhs` receives the left-hand side.
 *
 * # Safety
 * `pass` and `lhs` are writable.
 */
enum RilabStatus rilab_trigger(double p_upper,
                               uint32_t l0,
                               double eps1,
                               double eps2,
                               size_t d,
                               int32_t *pass,
                               double *lhs);

/**
 * Builds a kernel with exact re-entry. Release with [`rilab_kernel_free`].
 *
 * # Safety
 * `out` is writable.
 */
enum RilabStatus rilab_kernel_new(size_t d, uint32_t radius, double tol, struct RilabKernel **out);

/**
 * # Safety
 * `k` comes from [`rilab_kernel_new`] and is not used afterwards.
 */
void rilab_kernel_free(struct RilabKernel *k);

/**
 * Capacity of the window box.
 *
 * # Safety
 * `k` is a live kernel; `out` is writable.
 */
enum RilabStatus rilab_kernel_capacity(const struct RilabKernel *k, double *out);

/**
 * Number of sites in the window, `(2 radius + 1)^d`.
 *
 * # Safety
 * `k` is a live kernel; `out` is writable.
 */
enum RilabStatus rilab_kernel_sites(const struct RilabKernel *k, size_t *out);

/**
 * Samples at level `u` on stream `stream` of `seed`. Equal arguments give
 * equal samples. Release with [`rilab_sample_free`].
 *
 * # Safety
 * `k` is a live kernel; `out` is writable.
 */
enum RilabStatus rilab_sample_new(const struct RilabKernel *k,
                                  double u,
                                  uint64_t seed,
                                  uint64_t stream,
                                  struct RilabSample **out);

/**
 * # Safety
 * `s` comes from [`rilab_sample_new`] and is not used afterwards.
 */
void rilab_sample_free(struct RilabSample *s);

/**
 * Number of trajectories that hit the window.
 *
 * # Safety
 * `s` is a live sample; `out` is writable.
 */
enum RilabStatus rilab_sample_trajectories(const struct RilabSample *s, uint64_t *out);

/**
 * Writes one byte per site (1 occupied, 0 vacant), sites in row-major
 * order with the last coordinate fastest. `len` must equal the window's
 * site count.
 *
 * # Safety
 * `s` is a live sample; `buf` holds `len` writable bytes.
 */
enum RilabStatus rilab_sample_occupancy(const struct RilabSample *s, uint8_t *buf, size_t len);

/**
 * Whether the site `x` (d integers) is occupied.
 *
 * # Safety
 * `s` is a live sample; `x` points to `d` integers; `out` is writable.
 */
enum RilabStatus rilab_sample_is_occupied(const struct RilabSample *s,
                                          const int32_t *x,
                                          int32_t *out);

/**
 * Writes the sample in the binary container format.
 *
 * # Safety
 * `s` is a live sample; `path` is a NUL-terminated string.
 */
enum RilabStatus rilab_sample_write(const struct RilabSample *s, const char *path);

/**
 * Reads a container file and returns it as JSON in `*out`; free with
 * [`rilab_string_free`].
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum RilabStatus rilab_container_to_json(const char *path, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RILAB_H */
