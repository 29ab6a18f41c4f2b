#ifndef STEPSQL_H
#define STEPSQL_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every C entry point.
 */
typedef enum StepsqlStatus {
  STEPSQL_STATUS_OK = 0,
  STEPSQL_STATUS_NULL_ARGUMENT = 1,
  STEPSQL_STATUS_INVALID_UTF8 = 2,
  STEPSQL_STATUS_IO = 3,
  STEPSQL_STATUS_INVALID_SCHEMA = 4,
  STEPSQL_STATUS_INVALID_CONFIG = 5,
  STEPSQL_STATUS_INVALID_SQL = 6,
  STEPSQL_STATUS_STAGE_FAILED = 7,
  STEPSQL_STATUS_PANIC = 8,
} StepsqlStatus;

/**
 * A pipeline with heuristic backends over one schema.
 */
typedef struct StepsqlPipeline StepsqlPipeline;

/**
 * A loaded database schema.
 */
typedef struct StepsqlSchema StepsqlSchema;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next stepsql call on the same thread.
 */
const char *stepsql_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *stepsql_version(void);

/**
 * Loads a schema JSON file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
enum StepsqlStatus stepsql_schema_load(const char *path, struct StepsqlSchema **out);

/**
 * Parses a schema from JSON text.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum StepsqlStatus stepsql_schema_from_json(const char *json, struct StepsqlSchema **out);

/**
 * Number of tables in the schema, or 0 for NULL.
 *
 * # Safety
 * `schema` must be NULL or a live handle.
 */
size_t stepsql_schema_table_count(const struct StepsqlSchema *schema);

/**
 * # Safety
 * `schema` must be NULL or a handle not yet freed.
 */
void stepsql_schema_free(struct StepsqlSchema *schema);

/**
 * Builds a pipeline over a copy of `schema`. `config_json` is NULL for
 * defaults or a JSON object with pipeline settings; bridge backends are not
 * available here.
 *
 * # Safety
 * `schema` must be a live handle; `config_json` NULL or NUL-terminated;
 * `out` writable.
 */
enum StepsqlStatus stepsql_pipeline_new(const struct StepsqlSchema *schema,
                                        const char *config_json,
                                        struct StepsqlPipeline **out);

/**
 * # Safety
 * `pipeline` must be NULL or a handle not yet freed.
 */
void stepsql_pipeline_free(struct StepsqlPipeline *pipeline);

/**
 * Translates `question`. On success `*out_sql` receives a string to release
 * with [`stepsql_string_free`]; on a stage failure the status is
 * `STEPSQL_STATUS_STAGE_FAILED` and the last error names the stage.
 *
 * # Safety
 * `pipeline` must be a live handle; `question` NUL-terminated; `out_sql`
 * writable.
 */
enum StepsqlStatus stepsql_pipeline_ask(const struct StepsqlPipeline *pipeline,
                                        const char *question,
                                        char **out_sql);

/**
 * Compares two queries by logic form (order-insensitive select list and
 * conjuncts) after resolving both against `schema`.
 *
 * # Safety
 * `schema` must be a live handle; `a`, `b` NUL-terminated; `out_equal`
 * writable.
 */
enum StepsqlStatus stepsql_logic_form_equal(const struct StepsqlSchema *schema,
                                            const char *a,
                                            const char *b,
                                            bool *out_equal);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void stepsql_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEPSQL_H */
