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

// JSON encodings shared by the wire protocol, scenario files and traces.
// Doubles are written in shortest round-trip form; the -inf sentinel is the
// string "-inf" because JSON has no infinity literal.

#pragma once

#include <json.hpp>

#include "avcd/decoder.hpp"
#include "avcd/toy_model.hpp"

namespace avcd::json_io {

using nlohmann::json;

/// Throws Error(kSchema) naming `where` when `ok` is false.
void expect(bool ok, const std::string& where, const std::string& what);

json logits_to_json(std::span<const double> logits);
Logits logits_from_json(const json& j, const std::string& where);

json prefix_to_json(const Prefix& prefix);
Prefix prefix_from_json(const json& j, const std::string& where);

/// [[name, begin, end], ...], end exclusive. total_tokens is the largest end.
json layout_to_json(const ModalityLayout& layout);
ModalityLayout layout_from_json(const json& j, const std::string& where);

json mask_to_json(const MaskSpec& mask);
MaskSpec mask_from_json(const json& j, const std::string& where);

json attention_to_json(const AttentionSnapshot& attention);
AttentionSnapshot attention_from_json(const json& j, const std::string& where);

json config_to_json(const DecodeConfig& config);
/// Applies the keys present in `j` on top of `base`; unknown keys are errors.
DecodeConfig config_from_json(const json& j, DecodeConfig base, const std::string& where);

json toy_config_to_json(const ToyModelConfig& config);
ToyModelConfig toy_config_from_json(const json& j, const ModalityLayout& layout,
                                    const std::string& where);

json scripted_to_json(const ScriptedScenario& scenario);
ScriptedScenario scripted_from_json(const json& j, const ModalityLayout& layout,
                                    const std::string& where);

json step_to_json(const StepRecord& step);
StepRecord step_from_json(const json& j, const std::string& where);

/// Double that may be +inf (written as "inf").
json extended_double(double x);
double extended_double_from_json(const json& j, const std::string& where);

}  // namespace avcd::json_io
