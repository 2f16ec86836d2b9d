#ifndef SHIFTCODE_H
#define SHIFTCODE_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum ShcStatus {
  SHC_STATUS_OK = 0,
  SHC_STATUS_NULL_POINTER = 1,
  SHC_STATUS_INVALID_UTF8 = 2,
  SHC_STATUS_PARSE = 3,
  SHC_STATUS_INVALID_INPUT = 4,
  SHC_STATUS_NOT_IRREDUCIBLE = 5,
  SHC_STATUS_EMPTY_SHIFT = 6,
  SHC_STATUS_NOT_FINITE_TO_ONE = 7,
  SHC_STATUS_RESOURCE_LIMIT = 8,
  SHC_STATUS_INCONCLUSIVE = 9,
  SHC_STATUS_SOLVER_FAILED = 10,
  SHC_STATUS_IO = 11,
  SHC_STATUS_INTERNAL = 12,
} ShcStatus;

// A sliding block code.
typedef struct ShcCode ShcCode;

// A verified factorization of a code.
typedef struct ShcDecomposition ShcDecomposition;

// A shift presented by a labeled graph.
typedef struct ShcPresentation ShcPresentation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static string.
const char *shc_version(void);

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library on the same thread.
const char *shc_last_error(void);

// Releases a string returned by the library.
//
// # Safety
// `s` is NULL or a string from this library not yet freed.
void shc_string_free(char *s);

// # Safety
// `json` is a NUL-terminated string; `out` is writable.
enum ShcStatus shc_presentation_from_json(const char *json, struct ShcPresentation **out);

// # Safety
// `p` is a live handle; `out` is writable.
enum ShcStatus shc_presentation_to_json(const struct ShcPresentation *p, char **out);

// # Safety
// `p` is NULL or a handle not yet freed.
void shc_presentation_free(struct ShcPresentation *p);

// Parses a code whose domain is given inline.
//
// # Safety
// `json` is a NUL-terminated string; `out` is writable.
enum ShcStatus shc_code_from_json(const char *json, struct ShcCode **out);

// One of the built-in codes: `merge`, `xor`, `golden-mean-identity`, ...
//
// # Safety
// `name` is a NUL-terminated string; `out` is writable.
enum ShcStatus shc_code_fixture(const char *name, struct ShcCode **out);

// # Safety
// `c` is a live handle; `out` is writable.
enum ShcStatus shc_code_to_json(const struct ShcCode *c, char **out);

// A copy of the domain of `c`.
//
// # Safety
// `c` is a live handle; `out` is writable.
enum ShcStatus shc_code_domain(const struct ShcCode *c, struct ShcPresentation **out);

// # Safety
// `c` is NULL or a handle not yet freed.
void shc_code_free(struct ShcCode *c);

// # Safety
// `c` is a live handle; `config` is NULL or a NUL-terminated string; `out` is writable.
enum ShcStatus shc_code_is_finite_to_one(const struct ShcCode *c, const char *config, bool *out);

// Degree of a finite-to-one code on an irreducible domain, which may be
// sofic for 1-block codes.
//
// # Safety
// `c` is a live handle; `config` is NULL or a NUL-terminated string; `out` is writable.
enum ShcStatus shc_code_degree(const struct ShcCode *c, const char *config, uintptr_t *out);

// Class degree with its witness; `report` may be NULL.
//
// # Safety
// `c` is a live handle; `config` is NULL or a NUL-terminated string;
// `out` is writable; `report` is NULL or writable.
enum ShcStatus shc_code_class_degree(const struct ShcCode *c,
                                     const char *config,
                                     uintptr_t *out,
                                     char **report);

// Factors `c` and verifies the factorization. Succeeds even when a check
// fails; inspect `shc_decomposition_report`.
//
// # Safety
// `c` is a live handle; `config` is NULL or a NUL-terminated string; `out` is writable.
enum ShcStatus shc_decompose(const struct ShcCode *c,
                             const char *config,
                             struct ShcDecomposition **out);

// # Safety
// `d` is a live handle; `all_passed` is NULL or writable; `report` is NULL or writable.
enum ShcStatus shc_decomposition_report(const struct ShcDecomposition *d,
                                        bool *all_passed,
                                        char **report);

// The class-degree-one factor, defined on the domain of the original code.
//
// # Safety
// `d` is a live handle; `out` is writable.
enum ShcStatus shc_decomposition_pi1(const struct ShcDecomposition *d, struct ShcCode **out);

// The finite-to-one factor, a 1-block code on the intermediate shift.
//
// # Safety
// `d` is a live handle; `out` is writable.
enum ShcStatus shc_decomposition_pi2(const struct ShcDecomposition *d, struct ShcCode **out);

// The intermediate shift with its symbol decorations.
//
// # Safety
// `d` is a live handle; `out` is writable.
enum ShcStatus shc_decomposition_ytilde_json(const struct ShcDecomposition *d, char **out);

// # Safety
// `d` is NULL or a handle not yet freed.
void shc_decomposition_free(struct ShcDecomposition *d);

// Topological pressure of `phi` (JSON, NULL for zero) on `x`.
//
// # Safety
// `x` is a live handle; `phi` and `config` are NULL or NUL-terminated strings; `out` is writable.
enum ShcStatus shc_pressure(const struct ShcPresentation *x,
                            const char *phi,
                            const char *config,
                            double *out);

// Equilibrium state of `phi` on `x` as JSON. Sofic shifts report the
// measure on their cover together with the cover labels.
//
// # Safety
// `x` is a live handle; `phi` and `config` are NULL or NUL-terminated strings; `out` is writable.
enum ShcStatus shc_equilibrium(const struct ShcPresentation *x,
                               const char *phi,
                               const char *config,
                               char **out);

// Maximizes relative pressure over lifts of the Markov measure `nu` at
// the given order, from `seeds` starting points.
//
// # Safety
// `c` is a live handle; `nu` is a NUL-terminated string; `phi` and `config`
// are NULL or NUL-terminated strings; `out` is writable.
enum ShcStatus shc_max_relative_pressure(const struct ShcCode *c,
                                         const char *nu,
                                         const char *phi,
                                         uintptr_t order,
                                         uintptr_t seeds,
                                         const char *config,
                                         char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHIFTCODE_H */
