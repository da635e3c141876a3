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

#include "avcd/avcd.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "avcd/commands.hpp"
#include "avcd/json_io.hpp"
#include "avcd/scenario.hpp"

struct avcd_provider {
  avcd::Scenario scenario;
  std::unique_ptr<avcd::Provider> provider;
};

struct avcd_trace {
  avcd::DecodeTrace trace;
};

namespace {

thread_local std::string g_last_error;

static_assert(static_cast<int>(avcd::ErrorCode::kInvalidArgument) + 1 == AVCD_ERR_INVALID_ARGUMENT);
static_assert(static_cast<int>(avcd::ErrorCode::kIo) + 1 == AVCD_ERR_IO);

avcd_status status_for(avcd::ErrorCode code) {
  // The status values mirror ErrorCode order, offset by one.
  return static_cast<avcd_status>(static_cast<int>(code) + 1);
}

avcd_status set_error(avcd_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
avcd_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return AVCD_OK;
  } catch (const avcd::Error& e) {
    return set_error(status_for(e.code()), e.what());
  } catch (const std::exception& e) {
    return set_error(AVCD_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(AVCD_ERR_INTERNAL, "unknown exception");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require_arg(bool ok, const char* what) {
  avcd::require(ok, avcd::ErrorCode::kInvalidArgument, what);
}

nlohmann::json parse_json(const char* text, const char* where) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    avcd::fail(avcd::ErrorCode::kSchema, std::string(where) + ": " + e.what());
  }
}

avcd::Prefix to_prefix(const uint32_t* tokens, size_t n) {
  avcd::Prefix p;
  p.reserve(n);
  for (size_t i = 0; i < n; ++i) p.emplace_back(tokens[i]);
  return p;
}

avcd_status make_provider(avcd::Scenario scenario, avcd_provider** out) {
  auto handle = std::make_unique<avcd_provider>();
  handle->provider = avcd::make_provider(scenario);
  handle->scenario = std::move(scenario);
  *out = handle.release();
  return AVCD_OK;
}

}  // namespace

extern "C" {

const char* avcd_last_error(void) { return g_last_error.c_str(); }

const char* avcd_status_name(avcd_status status) {
  if (status == AVCD_OK) return "ok";
  if (status == AVCD_ERR_INTERNAL) return "internal";
  if (status < AVCD_OK || status > AVCD_ERR_INTERNAL) return "unknown";
  return avcd::error_code_name(static_cast<avcd::ErrorCode>(static_cast<int>(status) - 1));
}

void avcd_string_free(char* s) { std::free(s); }

avcd_status avcd_provider_from_file(const char* scenario_path, avcd_provider** out) {
  return guarded([&] {
    require_arg(scenario_path && out, "null argument");
    make_provider(avcd::load_scenario_file(scenario_path), out);
  });
}

avcd_status avcd_provider_from_json(const char* scenario_json, avcd_provider** out) {
  return guarded([&] {
    require_arg(scenario_json && out, "null argument");
    make_provider(avcd::scenario_from_json(parse_json(scenario_json, "scenario")), out);
  });
}

void avcd_provider_free(avcd_provider* provider) { delete provider; }

avcd_status avcd_provider_descriptor(const avcd_provider* provider, size_t* vocab_size,
                                     size_t* layers, size_t* layout_tokens) {
  return guarded([&] {
    require_arg(provider, "null provider");
    const auto& d = provider->provider->descriptor();
    if (vocab_size) *vocab_size = d.vocab_size;
    if (layers) *layers = d.layer_count;
    if (layout_tokens) *layout_tokens = d.layout.total_tokens();
  });
}

uint64_t avcd_provider_calls(const avcd_provider* provider) {
  return provider ? provider->provider->forward_calls() : 0;
}

avcd_status avcd_provider_forward(avcd_provider* provider, const uint32_t* prefix,
                                  size_t prefix_len, const size_t* mask_indices,
                                  size_t mask_count, double* logits_out,
                                  double* attention_out) {
  return guarded([&] {
    require_arg(provider && prefix && logits_out, "null argument");
    require_arg(mask_count == 0 || mask_indices, "null mask indices");
    avcd::ForwardRequest request;
    request.prefix = to_prefix(prefix, prefix_len);
    if (mask_count > 0) {
      request.mask = avcd::MaskSpec(std::vector<std::size_t>(mask_indices, mask_indices + mask_count),
                                    avcd::LayerPolicy::all_but_last());
    }
    const auto r = provider->provider->forward(request);
    std::copy(r.logits.begin(), r.logits.end(), logits_out);
    if (attention_out) {
      for (const auto& row : r.attention.rows) {
        attention_out = std::copy(row.begin(), row.end(), attention_out);
      }
    }
  });
}

avcd_status avcd_decode(avcd_provider* provider, const uint32_t* prompt, size_t prompt_len,
                        const char* config_json, avcd_trace** out) {
  return guarded([&] {
    require_arg(provider && prompt && out, "null argument");
    avcd::DecodeConfig config = provider->scenario.config;
    if (config_json) {
      config = avcd::json_io::config_from_json(parse_json(config_json, "config"), config, "config");
    }
    auto handle = std::make_unique<avcd_trace>();
    handle->trace = avcd::decode(*provider->provider, to_prefix(prompt, prompt_len),
                                 provider->scenario.layout, config);
    *out = handle.release();
  });
}

void avcd_trace_free(avcd_trace* trace) { delete trace; }

int avcd_trace_ok(const avcd_trace* trace) { return trace && trace->trace.ok ? 1 : 0; }

size_t avcd_trace_step_count(const avcd_trace* trace) {
  return trace ? trace->trace.steps.size() : 0;
}

uint64_t avcd_trace_forward_passes(const avcd_trace* trace) {
  return trace ? trace->trace.total_forward_passes() : 0;
}

avcd_status avcd_trace_tokens(const avcd_trace* trace, uint32_t* tokens, size_t capacity,
                              size_t* count) {
  return guarded([&] {
    require_arg(trace && count, "null argument");
    const auto t = trace->trace.tokens();
    *count = t.size();
    for (size_t i = 0; i < std::min(capacity, t.size()); ++i) tokens[i] = t[i].value;
  });
}

avcd_status avcd_trace_to_jsonl(const avcd_trace* trace, char** out) {
  return guarded([&] {
    require_arg(trace && out, "null argument");
    std::string text;
    for (const auto& step : trace->trace.steps) {
      text += avcd::json_io::step_to_json(step).dump();
      text += '\n';
    }
    *out = copy_string(text);
  });
}

avcd_status avcd_softmax(const double* logits, size_t n, double* probs_out) {
  return guarded([&] {
    require_arg(logits && probs_out, "null argument");
    const auto p = avcd::softmax({logits, n});
    std::copy(p.begin(), p.end(), probs_out);
  });
}

avcd_status avcd_entropy(const double* probs, size_t n, double* out) {
  return guarded([&] {
    require_arg(probs && out, "null argument");
    *out = avcd::entropy({probs, n});
  });
}

avcd_status avcd_kl_divergence(const double* p, const double* q, size_t n, double* out) {
  return guarded([&] {
    require_arg(p && q && out, "null argument");
    *out = avcd::kl_divergence({p, n}, {q, n});
  });
}

avcd_status avcd_coefficients(double alpha_v, double alpha_a, double out[4]) {
  return guarded([&] {
    require_arg(out, "null argument");
    const auto c = avcd::avcd_coefficients(alpha_v, alpha_a);
    out[0] = c.original;
    out[1] = c.video_masked;
    out[2] = c.audio_masked;
    out[3] = c.both_masked;
  });
}

avcd_status avcd_run_command(const char* command, const char* options_json, char** report_json,
                             int* exit_code) {
  return guarded([&] {
    require_arg(command && report_json && exit_code, "null argument");
    nlohmann::json options = nlohmann::json::object();
    if (options_json) options = parse_json(options_json, "options");
    auto result = avcd::run_command(command, options);
    result.report["warnings"] = result.warnings;
    *report_json = copy_string(result.report.dump(2));
    *exit_code = result.exit_code;
  });
}

int avcd_serve_stdio(const char* scenario_path) {
  if (!scenario_path) return 2;
  return avcd::serve_stdio(scenario_path);
}

}  // extern "C"
