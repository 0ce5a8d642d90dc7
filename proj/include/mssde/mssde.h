/* SPDX-License-Identifier: Apache-2.0 */
#ifndef MSSDE_MSSDE_H
#define MSSDE_MSSDE_H

#include <stddef.h>

#if defined(_WIN32)
#define MSSDE_API __declspec(dllexport)
#else
#define MSSDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values double as process exit codes. */
typedef enum mssde_status {
  MSSDE_OK = 0,
  MSSDE_ERR_INTERNAL = 1,
  MSSDE_ERR_USAGE = 2,
  MSSDE_ERR_DATA = 3,
  MSSDE_ERR_NUMERICAL = 4
} mssde_status;

typedef struct mssde_config mssde_config;
typedef struct mssde_dataset mssde_dataset;

typedef void (*mssde_log_fn)(const char* line, void* user);

typedef struct mssde_run_options {
  const char* out_dir; /* NULL means "." */
  size_t threads;      /* 0: MSSDE_THREADS or 1 */
  int resume;          /* train: continue from <out_dir>/last.ckpt */
  mssde_log_fn log;    /* may be NULL */
  void* log_user;
} mssde_run_options;

MSSDE_API const char* mssde_version(void);

/* Message of the last failed call on this thread; "" after success. */
MSSDE_API const char* mssde_last_error(void);

/* Strings are copied into buf (NUL-terminated, truncated to cap); *needed,
   when non-NULL, receives the full length plus one. */

MSSDE_API mssde_status mssde_config_create(mssde_config** out);
MSSDE_API void mssde_config_destroy(mssde_config* cfg);
MSSDE_API mssde_status mssde_config_load(mssde_config* cfg, const char* path);
MSSDE_API mssde_status mssde_config_parse(mssde_config* cfg, const char* text);
MSSDE_API mssde_status mssde_config_set(mssde_config* cfg, const char* key, const char* value);
MSSDE_API mssde_status mssde_config_get(const mssde_config* cfg, const char* key, char* buf, size_t cap,
                                        size_t* needed);
MSSDE_API mssde_status mssde_config_resolved(const mssde_config* cfg, char* buf, size_t cap, size_t* needed);
/* One "key\tdefault\thelp" line per known key. */
MSSDE_API mssde_status mssde_config_keys(char* buf, size_t cap, size_t* needed);

MSSDE_API mssde_status mssde_generate(const mssde_config* cfg, const mssde_run_options* opt);
MSSDE_API mssde_status mssde_train(const mssde_config* cfg, const mssde_run_options* opt);
MSSDE_API mssde_status mssde_predict(const mssde_config* cfg, const mssde_run_options* opt);
MSSDE_API mssde_status mssde_evaluate(const mssde_config* cfg, const mssde_run_options* opt);
MSSDE_API mssde_status mssde_baseline(const mssde_config* cfg, const mssde_run_options* opt);

MSSDE_API mssde_status mssde_dataset_open(const char* path, mssde_dataset** out);
MSSDE_API void mssde_dataset_close(mssde_dataset* ds);
MSSDE_API mssde_status mssde_dataset_shape(const mssde_dataset* ds, size_t* n_traj, size_t* n_t, size_t* n_y);
/* Copies trajectory `traj` at observation `t` (n_y values). */
MSSDE_API mssde_status mssde_dataset_state(const mssde_dataset* ds, size_t traj, size_t t, double* out, size_t cap);
MSSDE_API mssde_status mssde_dataset_time(const mssde_dataset* ds, size_t traj, size_t t, double* out);

#ifdef __cplusplus
}
#endif

#endif
