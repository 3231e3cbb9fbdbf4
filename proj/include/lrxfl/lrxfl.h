/*
 * C interface to the LR-XFL experiment library.
 *
 * All functions return lrxfl_status; LRXFL_OK means success. On failure a
 * human-readable message is available from lrxfl_last_error() until the
 * next call on the same thread. Objects returned through out-parameters
 * are owned by the caller and released with the matching *_free function.
 */

#ifndef LRXFL_H
#define LRXFL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lrxfl_status {
    LRXFL_OK = 0,
    LRXFL_ERR_INVALID_ARGUMENT = 1,
    LRXFL_ERR_SCHEMA = 2,
    LRXFL_ERR_PARSE = 3,
    LRXFL_ERR_IO = 4,
    LRXFL_ERR_CONTRADICTION = 5,
    LRXFL_ERR_DIVERGENCE = 6,
    LRXFL_ERR_INTERNAL = 7
} lrxfl_status;

/* Opaque experiment configuration. */
typedef struct lrxfl_config lrxfl_config;

unsigned lrxfl_abi_version(void);

/* Thread-local message describing the most recent failure. */
const char* lrxfl_last_error(void);

lrxfl_status lrxfl_config_load(const char* path, lrxfl_config** out_config);
lrxfl_status lrxfl_config_parse(const char* json_text,
                                lrxfl_config** out_config);

/* Sets `dotted_key` (for example "rules.theta") to `value`; the value is
 * interpreted as JSON when it parses, as a string otherwise. */
lrxfl_status lrxfl_config_override(lrxfl_config* config,
                                   const char* dotted_key, const char* value);

/* Effective configuration as a JSON document. */
lrxfl_status lrxfl_config_dump(const lrxfl_config* config, char** out_json);

void lrxfl_config_free(lrxfl_config* config);

/* Runs the configured method, writes the result bundle under the config's
 * output_dir and returns the results document. `workers` <= 1 runs
 * single-threaded. */
lrxfl_status lrxfl_run(const lrxfl_config* config, int workers,
                       char** out_results_json);

/* Runs every configured method at each noise level; NULL levels selects
 * the default grid {0, 0.2, 0.4, 0.6, 0.8}. Returns the summary table. */
lrxfl_status lrxfl_sweep_noise(const lrxfl_config* config,
                               const double* levels, size_t num_levels,
                               int workers, char** out_summary_csv);

/* Renders the rule report of a written results.json; `class_filter` may be
 * NULL or empty for all classes. */
lrxfl_status lrxfl_inspect_rules(const char* results_path,
                                 const char* class_filter, char** out_report);

void lrxfl_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* LRXFL_H */
