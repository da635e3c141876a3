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

#include "avcd/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "avcd/json_io.hpp"
#include "avcd/oracle.hpp"
#include "avcd/wire.hpp"

namespace avcd {

using nlohmann::json;
using json_io::expect;

namespace {

const char* kind_name(ProviderSpec::Kind k) {
  switch (k) {
    case ProviderSpec::Kind::kToy: return "toy";
    case ProviderSpec::Kind::kScripted: return "scripted";
    case ProviderSpec::Kind::kRemote: return "remote";
  }
  return "?";
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  expect(j.is_object(), "scenario", "expected an object");
  for (const auto& [key, _] : j.items()) {
    expect(key == "schema_version" || key == "name" || key == "provider" || key == "layout" ||
               key == "prompts" || key == "prompt" || key == "config",
           "scenario", "unknown key '" + key + "'");
  }
  expect(j.contains("schema_version") && j["schema_version"].is_number_integer(), "scenario",
         "missing integer schema_version");
  expect(j["schema_version"].get<int>() == kScenarioSchemaVersion, "scenario.schema_version",
         "unsupported version " + j["schema_version"].dump());
  expect(j.contains("layout"), "scenario", "missing layout");
  expect(j.contains("provider") && j["provider"].is_object(), "scenario", "missing provider");

  Scenario s;
  s.name = j.value("name", std::string());
  s.layout = json_io::layout_from_json(j["layout"], "scenario.layout");

  const auto& p = j["provider"];
  expect(p.contains("kind") && p["kind"].is_string(), "scenario.provider", "missing kind");
  const std::string kind = p["kind"].get<std::string>();
  if (kind == "toy") {
    s.provider.kind = ProviderSpec::Kind::kToy;
    for (const auto& [key, _] : p.items()) {
      expect(key == "kind" || key == "config", "scenario.provider", "unknown key '" + key + "'");
    }
    s.provider.toy = json_io::toy_config_from_json(p.value("config", json::object()), s.layout,
                                                   "scenario.provider.config");
  } else if (kind == "scripted") {
    s.provider.kind = ProviderSpec::Kind::kScripted;
    json body = p;
    body.erase("kind");
    s.provider.scripted = json_io::scripted_from_json(body, s.layout, "scenario.provider");
  } else if (kind == "remote") {
    s.provider.kind = ProviderSpec::Kind::kRemote;
    if (p.contains("command")) {
      const auto& c = p["command"];
      expect(c.is_array() && !c.empty(), "scenario.provider.command",
             "expected a non-empty array of strings");
      for (const auto& w : c) {
        expect(w.is_string(), "scenario.provider.command", "expected strings");
        s.provider.command.push_back(w.get<std::string>());
      }
    }
  } else {
    expect(false, "scenario.provider.kind", "unknown provider kind '" + kind + "'");
  }

  expect(j.contains("prompts") != j.contains("prompt"), "scenario",
         "exactly one of prompt / prompts is required");
  if (j.contains("prompt")) {
    s.prompts.push_back(json_io::prefix_from_json(j["prompt"], "scenario.prompt"));
  } else {
    expect(j["prompts"].is_array() && !j["prompts"].empty(), "scenario.prompts",
           "expected a non-empty array of prompts");
    for (std::size_t i = 0; i < j["prompts"].size(); ++i) {
      s.prompts.push_back(json_io::prefix_from_json(
          j["prompts"][i], "scenario.prompts[" + std::to_string(i) + "]"));
    }
  }
  std::size_t vocab = 0;
  if (s.provider.kind == ProviderSpec::Kind::kToy) vocab = s.provider.toy.vocab_size;
  if (s.provider.kind == ProviderSpec::Kind::kScripted) vocab = s.provider.scripted.descriptor.vocab_size;
  for (std::size_t i = 0; i < s.prompts.size(); ++i) {
    const std::string w = "scenario.prompts[" + std::to_string(i) + "]";
    expect(s.prompts[i].size() >= s.layout.total_tokens() && !s.prompts[i].empty(), w,
           "prompt shorter than the layout (" + std::to_string(s.layout.total_tokens()) +
               " positions)");
    if (vocab) {
      for (TokenId t : s.prompts[i]) expect(t.value < vocab, w, "token outside vocabulary");
    }
  }

  s.config = json_io::config_from_json(j.value("config", json::object()), DecodeConfig{},
                                       "scenario.config");
  if (vocab) expect(s.config.eos_token.value < vocab, "scenario.config.eos_token", "outside vocabulary");
  for (const auto& m : s.config.bimodal_modalities) {
    expect(s.layout.has(m), "scenario.config.bimodal_modalities", "unknown modality '" + m + "'");
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json provider;
  switch (s.provider.kind) {
    case ProviderSpec::Kind::kToy:
      provider = {{"kind", "toy"}, {"config", json_io::toy_config_to_json(s.provider.toy)}};
      break;
    case ProviderSpec::Kind::kScripted:
      provider = json_io::scripted_to_json(s.provider.scripted);
      provider["kind"] = "scripted";
      break;
    case ProviderSpec::Kind::kRemote:
      provider = {{"kind", "remote"}};
      if (!s.provider.command.empty()) provider["command"] = s.provider.command;
      break;
  }
  json prompts = json::array();
  for (const auto& p : s.prompts) prompts.push_back(json_io::prefix_to_json(p));
  return {{"schema_version", kScenarioSchemaVersion},
          {"name", s.name},
          {"layout", json_io::layout_to_json(s.layout)},
          {"provider", std::move(provider)},
          {"prompts", std::move(prompts)},
          {"config", json_io::config_to_json(s.config)}};
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchema, "scenario '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

std::unique_ptr<Provider> make_provider(const Scenario& s) {
  switch (s.provider.kind) {
    case ProviderSpec::Kind::kToy:
      return std::make_unique<ToyProvider>(std::make_shared<const ToyModel>(s.provider.toy));
    case ProviderSpec::Kind::kScripted:
      return std::make_unique<ScriptedProvider>(s.provider.scripted);
    case ProviderSpec::Kind::kRemote: {
      std::vector<std::string> command = s.provider.command;
      if (command.empty()) {
        const char* env = std::getenv(kBridgeEnvVar);
        require(env && *env, ErrorCode::kSchema,
                std::string("remote scenario names no command and ") + kBridgeEnvVar +
                    " is not set");
        command = split_words(env);
      }
      auto provider = std::make_unique<RemoteProvider>(std::make_unique<ProcessTransport>(command));
      require(provider->descriptor().layout == s.layout, ErrorCode::kProvider,
              "adapter layout does not match the scenario layout");
      return provider;
    }
  }
  fail(ErrorCode::kInvalidArgument, std::string("unknown provider kind ") + kind_name(s.provider.kind));
}

namespace {

Scenario toy_scenario(const std::string& kind, ModalityLayout layout, std::uint64_t seed) {
  Scenario s;
  s.name = kind + "-seed" + std::to_string(seed);
  s.layout = layout;
  s.provider.kind = ProviderSpec::Kind::kToy;
  s.provider.toy.layout = layout;
  s.provider.toy.seed = seed;
  s.prompts = oracle::random_prompts(20, layout.total_tokens(), s.provider.toy.vocab_size,
                                     seed ^ 0x5EEDF00DULL);
  s.config.max_tokens = 12;
  s.config.eos_token = TokenId(0);
  s.config.seed = seed;
  return s;
}

Scenario scripted_minimal() {
  Scenario s;
  s.name = "scripted-minimal";
  s.layout = ModalityLayout({{"video", 0, 2}, {"audio", 2, 4}, {"language", 4, 6}}, 6);
  const Prefix prompt{TokenId(1), TokenId(2), TokenId(1), TokenId(2), TokenId(1), TokenId(2)};
  s.prompts = {prompt};

  ScriptedScenario& t = s.provider.scripted;
  t.descriptor = {4, 2, s.layout, "scripted-minimal"};
  t.default_attention.rows = {{0.1, 0.1, 0.1, 0.1, 0.3, 0.3}, {0.1, 0.1, 0.1, 0.1, 0.3, 0.3}};

  // Step 0: confident, gated, emits token 0.
  t.table[{prompt, "none"}] = {{8.0, 0.0, 0.0, 0.0}, std::nullopt};
  // Step 1: uniform, language-dominant; the contrast selects token 3 (EOS).
  Prefix second = prompt;
  second.push_back(TokenId(0));
  AttentionSnapshot att;
  att.rows = {{0.05, 0.1, 0.05, 0.1, 0.3, 0.3, 0.1}, {0.05, 0.1, 0.05, 0.1, 0.3, 0.3, 0.1}};
  t.table[{second, "none"}] = {{0.0, 0.0, 0.0, 0.0}, att};
  t.table[{second, "V"}] = {{0.0, 0.0, 0.0, 1.0}, std::nullopt};
  t.table[{second, "A"}] = {{0.0, 0.0, 0.0, 1.0}, std::nullopt};
  t.table[{second, "A+V"}] = {{0.0, 0.0, 0.0, 0.0}, std::nullopt};
  s.provider.kind = ProviderSpec::Kind::kScripted;

  s.config.max_tokens = 4;
  s.config.eos_token = TokenId(3);
  return s;
}

}  // namespace

Scenario generate_scenario(const std::string& kind, std::uint64_t seed) {
  if (kind == "toy-trimodal") return toy_scenario(kind, default_trimodal_layout(), seed);
  if (kind == "toy-bimodal") return toy_scenario(kind, default_bimodal_layout(), seed);
  if (kind == "scripted-minimal") return scripted_minimal();
  fail(ErrorCode::kInvalidArgument,
       "unknown scenario kind '" + kind + "' (toy-trimodal, toy-bimodal, scripted-minimal)");
}

}  // namespace avcd
