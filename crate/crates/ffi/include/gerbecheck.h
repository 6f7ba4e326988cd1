#ifndef GERBECHECK_H
#define GERBECHECK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible call.
typedef enum GerbeStatus {
  GERBE_STATUS_OK = 0,
  GERBE_STATUS_NULL_POINTER = 1,
  GERBE_STATUS_INVALID_UTF8 = 2,
  GERBE_STATUS_IO = 3,
  GERBE_STATUS_INVALID_BUNDLE = 4,
  GERBE_STATUS_UNKNOWN_SUITE = 5,
  GERBE_STATUS_PARSE_ERROR = 6,
  GERBE_STATUS_EVAL_ERROR = 7,
  GERBE_STATUS_INVALID_ARGUMENT = 8,
  GERBE_STATUS_PANIC = 9,
} GerbeStatus;

// Loaded geometry bundle.
typedef struct GerbeBundle GerbeBundle;

// Parsed scalar expression.
typedef struct GerbeExpr GerbeExpr;

// Result of a suite run.
typedef struct GerbeReport GerbeReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Loads a bundle from a JSON file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum GerbeStatus gerbe_bundle_load(const char *path, struct GerbeBundle **out);

// Parses a bundle from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum GerbeStatus gerbe_bundle_parse(const char *json, struct GerbeBundle **out);

// Releases a bundle. Null is ignored.
//
// # Safety
// `bundle` must come from `gerbe_bundle_load` or `gerbe_bundle_parse` and not be used afterwards.
void gerbe_bundle_free(struct GerbeBundle *bundle);

// Runs a named suite with the given sampling parameters.
//
// # Safety
// `bundle` must be a live handle, `suite` a NUL-terminated string and `out` a writable pointer.
enum GerbeStatus gerbe_run_suite(const struct GerbeBundle *bundle,
                                 const char *suite,
                                 size_t samples,
                                 double tol,
                                 uint64_t seed,
                                 struct GerbeReport **out);

// Returns 1 if every check passed or was skipped, 0 otherwise or for null.
//
// # Safety
// `report` must be null or a live handle.
int32_t gerbe_report_passed(const struct GerbeReport *report);

// Number of checks in a report, 0 for null.
//
// # Safety
// `report` must be null or a live handle.
size_t gerbe_report_len(const struct GerbeReport *report);

// Renders a report as text (`structured` = 0) or JSON lines (`structured` != 0).
//
// # Safety
// `report` must be a live handle and `out` a writable pointer.
enum GerbeStatus gerbe_report_text(const struct GerbeReport *report,
                                   int32_t structured,
                                   char **out);

// Releases a report. Null is ignored.
//
// # Safety
// `report` must come from `gerbe_run_suite` and not be used afterwards.
void gerbe_report_free(struct GerbeReport *report);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void gerbe_string_free(char *s);

// Parses a scalar expression.
//
// # Safety
// `src` must be a NUL-terminated string and `out` a writable pointer.
enum GerbeStatus gerbe_expr_parse(const char *src, struct GerbeExpr **out);

// Evaluates an expression at the point `names[i] = values[i]` for `i < len`.
//
// # Safety
// `expr` must be a live handle, `names` and `values` arrays of `len` entries
// (either may be null when `len` is 0) and `out` a writable pointer.
enum GerbeStatus gerbe_expr_eval(const struct GerbeExpr *expr,
                                 const char *const *names,
                                 const double *values,
                                 size_t len,
                                 double *out);

// Renders an expression in its canonical text form.
//
// # Safety
// `expr` must be a live handle and `out` a writable pointer.
enum GerbeStatus gerbe_expr_text(const struct GerbeExpr *expr, char **out);

// Releases an expression. Null is ignored.
//
// # Safety
// `expr` must come from `gerbe_expr_parse` and not be used afterwards.
void gerbe_expr_free(struct GerbeExpr *expr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GERBECHECK_H */
