/* ghlab C API: problem files in, deterministic reports out.
 *
 * Handles are opaque; every function returns a ghlab_status. Error text for
 * the last failing call on the current thread is available through
 * ghlab_last_error(). Reports are byte-identical across runs for identical
 * inputs and seeds.
 */
#ifndef GHLAB_H
#define GHLAB_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ghlab_problem ghlab_problem;
typedef struct ghlab_report ghlab_report;

typedef enum ghlab_status {
  GHLAB_OK = 0,
  GHLAB_ERR_SPEC = 2,    /* schema violation, dimension mismatch, bad command */
  GHLAB_ERR_NUMERIC = 3, /* precision exhaustion or internal numeric failure */
  GHLAB_ERR_IO = 4,      /* file cannot be read or written */
  GHLAB_ERR_USAGE = 5    /* null handle or bad argument */
} ghlab_status;

const char* ghlab_version(void);

/* Message for the last failing call on this thread; never NULL. */
const char* ghlab_last_error(void);

ghlab_status ghlab_problem_parse_file(const char* path, ghlab_problem** out);
ghlab_status ghlab_problem_parse_string(const char* text, ghlab_problem** out);

/* Override an analysis parameter after parsing. Supported keys:
 * "lambda_max" (rational string) and "radius" (integer string). */
ghlab_status ghlab_problem_override(ghlab_problem* p, const char* key, const char* value);

void ghlab_problem_free(ghlab_problem* p);

/* Commands: "check-system", "analyze-operator", "diophantine",
 * "counterexample", "inequalities". */
ghlab_status ghlab_run(const ghlab_problem* p, const char* command, ghlab_report** out);

/* The report as JSON text (stable key order, trailing newline). The pointer
 * stays valid until the report is freed. */
const char* ghlab_report_json(const ghlab_report* r);

/* Write the report to a file; format is "json" or "csv". */
ghlab_status ghlab_report_write(const ghlab_report* r, const char* path, const char* format);

void ghlab_report_free(ghlab_report* r);

#ifdef __cplusplus
}
#endif

#endif /* GHLAB_H */
