// Copyright 2026 The DPSRG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the dpsrg library. All objects are opaque handles owned by
 * the caller and released with the matching *_free function. Functions
 * return a dpsrg_status; on failure dpsrg_last_error() describes the most
 * recent error on the calling thread. Strings returned through char** out
 * parameters must be released with dpsrg_string_free. */

#ifndef DPSRG_DPSRG_H_
#define DPSRG_DPSRG_H_

#include <stddef.h>

#if defined(_WIN32)
#define DPSRG_API __declspec(dllexport)
#else
#define DPSRG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  DPSRG_OK = 0,
  DPSRG_INVALID_ARGUMENT = 1,
  DPSRG_NOT_FOUND = 2,
  DPSRG_FAILED_PRECONDITION = 3,
  DPSRG_OUT_OF_RANGE = 4,
  DPSRG_DATA_LOSS = 5,
  DPSRG_UNAVAILABLE = 6,
  DPSRG_INTERNAL = 7,
} dpsrg_status;

typedef struct dpsrg_spec dpsrg_spec;
typedef struct dpsrg_result dpsrg_result;
typedef struct dpsrg_strategy dpsrg_strategy;

DPSRG_API const char* dpsrg_version(void);
DPSRG_API const char* dpsrg_last_error(void);
DPSRG_API void dpsrg_string_free(char* s);

/* Experiment specs: flat key=value text with '#' comments. */
DPSRG_API dpsrg_status dpsrg_spec_parse(const char* text, dpsrg_spec** out);
DPSRG_API dpsrg_status dpsrg_spec_load(const char* path, dpsrg_spec** out);
/* Overrides one key; the spec is unchanged when the result is invalid. */
DPSRG_API dpsrg_status dpsrg_spec_set(dpsrg_spec* spec, const char* key,
                                      const char* value);
DPSRG_API dpsrg_status dpsrg_spec_serialize(const dpsrg_spec* spec,
                                            char** out);
/* Output directory named by the spec. */
DPSRG_API const char* dpsrg_spec_output(const dpsrg_spec* spec);
DPSRG_API int dpsrg_spec_trajectories(const dpsrg_spec* spec);
DPSRG_API void dpsrg_spec_free(dpsrg_spec* spec);

/* Runs a sweep. Individual run aborts are recorded in the result, not
 * returned as errors. */
DPSRG_API dpsrg_status dpsrg_run(const dpsrg_spec* spec, dpsrg_result** out);
DPSRG_API int dpsrg_result_failures(const dpsrg_result* result);
DPSRG_API size_t dpsrg_result_num_rows(const dpsrg_result* result);
DPSRG_API dpsrg_status dpsrg_result_write(const dpsrg_result* result,
                                          const char* dir, int trajectories);
DPSRG_API dpsrg_status dpsrg_result_report(const dpsrg_result* result,
                                           int all_rows, char** out);
DPSRG_API void dpsrg_result_free(dpsrg_result* result);

/* Aggregates summary.csv files (or directories containing one). */
DPSRG_API dpsrg_status dpsrg_report(const char* const* paths, size_t count,
                                    int all_rows, char** out);

/* Strategy matrices. workload is "ones", "momentum" or "momentum_decay". */
DPSRG_API dpsrg_status dpsrg_factorize(const char* workload, int epochs,
                                       int batches, double gamma,
                                       double decay, int iterations,
                                       dpsrg_strategy** out);
DPSRG_API dpsrg_status dpsrg_strategy_load(const char* path,
                                           dpsrg_strategy** out);
DPSRG_API dpsrg_status dpsrg_strategy_save(const dpsrg_strategy* strategy,
                                           const char* path);
DPSRG_API int dpsrg_strategy_size(const dpsrg_strategy* strategy);
DPSRG_API double dpsrg_strategy_objective(const dpsrg_strategy* strategy);
/* Objective of the binary-tree factorisation of the same workload. */
DPSRG_API double dpsrg_strategy_tree_objective(const dpsrg_strategy* strategy);
DPSRG_API double dpsrg_strategy_sensitivity(const dpsrg_strategy* strategy);
DPSRG_API int dpsrg_strategy_converged(const dpsrg_strategy* strategy);
DPSRG_API void dpsrg_strategy_free(dpsrg_strategy* strategy);

/* Acceptance criteria 1..dpsrg_num_criteria(). `line` receives a one-line
 * summary; `passed` / `skipped` are set to 0 or 1. */
DPSRG_API int dpsrg_num_criteria(void);
DPSRG_API dpsrg_status dpsrg_verify(int criterion, const char* data_dir,
                                    int include_figure, int* passed,
                                    int* skipped, char** line);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* DPSRG_DPSRG_H_ */
