#ifndef SHDOA_C_H
#define SHDOA_C_H

/* C interface to the shdoa library: opaque handles, integer status codes,
 * thread-local error messages. All functions return SHDOA_OK (0) on success;
 * shdoa_last_error() describes the most recent failure on this thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SHDOA_API __declspec(dllexport)
#else
#define SHDOA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  SHDOA_OK = 0,
  SHDOA_ERR_RUNTIME = 1,    /* I/O, numerical or internal failures */
  SHDOA_ERR_VALIDATION = 2, /* config or input validation failures */
};

typedef struct shdoa_config shdoa_config;

SHDOA_API const char* shdoa_version(void);

/* Most recent error message on the calling thread; empty string if none. */
SHDOA_API const char* shdoa_last_error(void);

/* Parse a config file. On success stores a handle in *out. */
SHDOA_API int shdoa_config_load(const char* path, shdoa_config** out);

SHDOA_API void shdoa_config_free(shdoa_config* cfg);

/* Override scalar settings after load: "seed", "trials", "jobs", "out". */
SHDOA_API int shdoa_config_set(shdoa_config* cfg, const char* key, const char* value);

/* Cross-field validation only. Warnings (if any) are written to `warnings`
 * (NUL-terminated, truncated to cap). */
SHDOA_API int shdoa_config_validate(const shdoa_config* cfg, char* warnings, size_t cap);

/* Run the full experiment described by the config; writes results.json,
 * results.csv and config_resolved.toml under out_dir (NULL = config's out). */
SHDOA_API int shdoa_run_experiment(const shdoa_config* cfg, const char* out_dir, int jobs);

/* Effective-rank study (config's [erank] section). */
SHDOA_API int shdoa_run_erank(const shdoa_config* cfg, const char* out_dir);

/* Synthesize microphone signals; writes synth.wav and trajectory.csv. */
SHDOA_API int shdoa_run_synth(const shdoa_config* cfg, const char* out_dir);

/* Run the estimation pipeline on provided audio + trajectory files. */
SHDOA_API int shdoa_run_estimate(const shdoa_config* cfg, const char* wav_path,
                                 const char* trajectory_csv, const char* out_dir, int jobs);

#ifdef __cplusplus
}
#endif

#endif
