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

// Scenario files: provider, layout, prompts and decode settings. See
// docs/formats.md for the schema.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "avcd/decoder.hpp"
#include "avcd/toy_model.hpp"

namespace avcd {

inline constexpr int kScenarioSchemaVersion = 1;

/// Environment variable consulted for the adapter command line when a remote
/// scenario does not name one.
inline constexpr const char* kBridgeEnvVar = "AVCD_BRIDGE";

struct ProviderSpec {
  enum class Kind { kToy, kScripted, kRemote };

  Kind kind = Kind::kToy;
  ToyModelConfig toy;
  ScriptedScenario scripted;
  std::vector<std::string> command;
};

struct Scenario {
  std::string name;
  ProviderSpec provider;
  ModalityLayout layout;
  std::vector<Prefix> prompts;
  DecodeConfig config;
};

/// Throws Error(kSchema) on any schema violation.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario load_scenario_file(const std::string& path);

/// Builds the provider a scenario names. Remote providers are connected and
/// handshaken here.
std::unique_ptr<Provider> make_provider(const Scenario& scenario);

/// Deterministic scenario generators: "toy-trimodal", "toy-bimodal",
/// "scripted-minimal".
Scenario generate_scenario(const std::string& kind, std::uint64_t seed);

}  // namespace avcd
