#ifndef RFCW_H
#define RFCW_H

/* C interface to the RFCW metastability library.
 *
 * A session wraps a parsed configuration.  Commands return JSON; strings
 * handed out by the library must be released with rfcw_free_string.
 * Return codes: 0 success, 1 internal error, 2 domain/model error.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef struct rfcw_session rfcw_session;

/* Parse a configuration (key = value lines with [section] headers).
 * Returns NULL on parse failure; call rfcw_last_error(NULL) for details. */
rfcw_session* rfcw_open(const char* config_text);

/* Convenience: read the configuration from a file. */
rfcw_session* rfcw_open_file(const char* path);

void rfcw_close(rfcw_session* s);

/* Override a single configuration value. Returns 0 on success. */
int rfcw_set(rfcw_session* s, const char* section, const char* key,
             const char* value);

/* Run a command (landscape, predict, exact, bounds, simulate, validate,
 * report).  *json_out receives a malloc'd JSON string (also on error, when
 * it describes the failure).  Returns 0/1/2. */
int rfcw_run(rfcw_session* s, const char* command, char** json_out);

/* Message of the last failure on this session (or of rfcw_open when s is
 * NULL).  Owned by the library; valid until the next call. */
const char* rfcw_last_error(const rfcw_session* s);

void rfcw_free_string(char* p);

/* Library version tag. */
const char* rfcw_version(void);

#ifdef __cplusplus
}
#endif

#endif /* RFCW_H */
