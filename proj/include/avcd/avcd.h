// Copyright 2026 The avcd Authors
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

/* C interface to the avcd decoding engine. All functions return an
 * avcd_status; on failure avcd_last_error() describes the problem. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with avcd_string_free. */

#ifndef AVCD_AVCD_H_
#define AVCD_AVCD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AVCD_API __declspec(dllexport)
#else
#define AVCD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum avcd_status {
  AVCD_OK = 0,
  AVCD_ERR_INVALID_ARGUMENT = 1,
  AVCD_ERR_SHAPE_MISMATCH = 2,
  AVCD_ERR_EMPTY_SUPPORT = 3,
  AVCD_ERR_INFINITE_DIVERGENCE = 4,
  AVCD_ERR_FULLY_MASKED = 5,
  AVCD_ERR_UNSCRIPTED_STATE = 6,
  AVCD_ERR_UNSUPPORTED = 7,
  AVCD_ERR_SCHEMA = 8,
  AVCD_ERR_PROVIDER = 9,
  AVCD_ERR_TRANSPORT = 10,
  AVCD_ERR_PROTOCOL = 11,
  AVCD_ERR_ID_MISMATCH = 12,
  AVCD_ERR_IO = 13,
  AVCD_ERR_INTERNAL = 14
} avcd_status;

typedef struct avcd_provider avcd_provider;
typedef struct avcd_trace avcd_trace;

/* Message for the last failing call on this thread; "" if none. */
AVCD_API const char* avcd_last_error(void);
AVCD_API const char* avcd_status_name(avcd_status status);
AVCD_API void avcd_string_free(char* s);

/* Providers. A provider is built from a scenario (file or JSON text) and
 * remembers the scenario's layout and decode configuration. */
AVCD_API avcd_status avcd_provider_from_file(const char* scenario_path, avcd_provider** out);
AVCD_API avcd_status avcd_provider_from_json(const char* scenario_json, avcd_provider** out);
AVCD_API void avcd_provider_free(avcd_provider* provider);
AVCD_API avcd_status avcd_provider_descriptor(const avcd_provider* provider, size_t* vocab_size,
                                              size_t* layers, size_t* layout_tokens);
AVCD_API uint64_t avcd_provider_calls(const avcd_provider* provider);

/* One forward pass. mask_indices may be NULL when mask_count is 0; masks use
 * the all-but-last layer policy. logits_out needs vocab_size entries and
 * attention_out (may be NULL) layers * prefix_len entries, row-major. */
AVCD_API avcd_status avcd_provider_forward(avcd_provider* provider, const uint32_t* prefix,
                                           size_t prefix_len, const size_t* mask_indices,
                                           size_t mask_count, double* logits_out,
                                           double* attention_out);

/* Decoding. config_json holds overrides of the scenario's decode config and
 * may be NULL. Provider failures still produce a trace; check
 * avcd_trace_ok. */
AVCD_API avcd_status avcd_decode(avcd_provider* provider, const uint32_t* prompt,
                                 size_t prompt_len, const char* config_json, avcd_trace** out);
AVCD_API void avcd_trace_free(avcd_trace* trace);
AVCD_API int avcd_trace_ok(const avcd_trace* trace);
AVCD_API size_t avcd_trace_step_count(const avcd_trace* trace);
AVCD_API uint64_t avcd_trace_forward_passes(const avcd_trace* trace);
/* Copies up to capacity emitted tokens; *count receives the total. */
AVCD_API avcd_status avcd_trace_tokens(const avcd_trace* trace, uint32_t* tokens,
                                       size_t capacity, size_t* count);
AVCD_API avcd_status avcd_trace_to_jsonl(const avcd_trace* trace, char** out);

/* Numeric primitives. */
AVCD_API avcd_status avcd_softmax(const double* logits, size_t n, double* probs_out);
AVCD_API avcd_status avcd_entropy(const double* probs, size_t n, double* out);
AVCD_API avcd_status avcd_kl_divergence(const double* p, const double* q, size_t n, double* out);
/* out[0..3]: original, video-masked, audio-masked, both-masked. */
AVCD_API avcd_status avcd_coefficients(double alpha_v, double alpha_a, double out[4]);

/* Runs a CLI command (decode, ablate, sweep-tau, diagnose-kl, verify-approx,
 * gen-scenario) with JSON options. The report, with a "warnings" array, is
 * returned in *report_json and the process exit code in *exit_code. Returns
 * AVCD_OK whenever the command ran, whatever its exit code. */
AVCD_API avcd_status avcd_run_command(const char* command, const char* options_json,
                                      char** report_json, int* exit_code);

/* Serves the provider wire protocol on stdin/stdout until EOF. Returns the
 * exit code. */
AVCD_API int avcd_serve_stdio(const char* scenario_path);

#ifdef __cplusplus
}
#endif

#endif /* AVCD_AVCD_H_ */
