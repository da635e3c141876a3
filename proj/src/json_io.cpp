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

#include "avcd/json_io.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace avcd::json_io {

void expect(bool ok, const std::string& where, const std::string& what) {
  if (!ok) fail(ErrorCode::kSchema, where + ": " + what);
}

namespace {

double number(const json& j, const std::string& where) {
  expect(j.is_number(), where, "expected a number");
  return j.get<double>();
}

std::uint64_t unsigned_int(const json& j, const std::string& where) {
  expect(j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0), where,
         "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::vector<std::size_t> index_list(const json& j, const std::string& where) {
  expect(j.is_array(), where, "expected an array of indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(unsigned_int(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  expect(j.is_object(), where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    expect(allowed.count(key) > 0, where, "unknown key '" + key + "'");
  }
}

}  // namespace

json extended_double(double x) {
  if (x == std::numeric_limits<double>::infinity()) return "inf";
  if (x == kNegInf) return "-inf";
  return x;
}

double extended_double_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return kNegInf;
    expect(false, where, "expected a number, \"inf\" or \"-inf\"");
  }
  return number(j, where);
}

json logits_to_json(std::span<const double> logits) {
  json out = json::array();
  for (double x : logits) out.push_back(is_sentinel(x) ? json("-inf") : json(x));
  return out;
}

Logits logits_from_json(const json& j, const std::string& where) {
  expect(j.is_array(), where, "expected an array of logits");
  Logits out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    if (j[i].is_string()) {
      expect(j[i].get<std::string>() == "-inf", w, "only \"-inf\" is allowed as a string");
      out.push_back(kNegInf);
    } else {
      out.push_back(number(j[i], w));
    }
  }
  return out;
}

json prefix_to_json(const Prefix& prefix) {
  json out = json::array();
  for (TokenId t : prefix) out.push_back(t.value);
  return out;
}

Prefix prefix_from_json(const json& j, const std::string& where) {
  expect(j.is_array(), where, "expected an array of token ids");
  Prefix out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto v = unsigned_int(j[i], where + "[" + std::to_string(i) + "]");
    expect(v <= std::numeric_limits<std::uint32_t>::max(), where, "token id too large");
    out.emplace_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

json layout_to_json(const ModalityLayout& layout) {
  json out = json::array();
  for (const auto& s : layout.spans()) out.push_back(json::array({s.name, s.begin, s.end}));
  return out;
}

ModalityLayout layout_from_json(const json& j, const std::string& where) {
  expect(j.is_array(), where, "expected [[name, begin, end], ...]");
  std::vector<ModalitySpan> spans;
  std::size_t total = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const auto& e = j[i];
    expect(e.is_array() && e.size() == 3 && e[0].is_string(), w, "expected [name, begin, end]");
    ModalitySpan s{e[0].get<std::string>(), unsigned_int(e[1], w), unsigned_int(e[2], w)};
    expect(s.begin <= s.end, w, "begin must not exceed end");
    total = std::max(total, s.end);
    spans.push_back(std::move(s));
  }
  try {
    return ModalityLayout(std::move(spans), total);
  } catch (const Error& e) {
    fail(ErrorCode::kSchema, where + ": " + e.what());
  }
}

json mask_to_json(const MaskSpec& mask) {
  json policy;
  switch (mask.layer_policy().kind) {
    case LayerPolicy::Kind::kAllButLast: policy = "all_but_last"; break;
    case LayerPolicy::Kind::kAll: policy = "all"; break;
    case LayerPolicy::Kind::kExplicit: policy = mask.layer_policy().layers; break;
  }
  return {{"key_indices", mask.key_indices()}, {"layer_policy", policy}};
}

MaskSpec mask_from_json(const json& j, const std::string& where) {
  only_keys(j, {"key_indices", "layer_policy"}, where);
  expect(j.contains("key_indices"), where, "missing key_indices");
  auto indices = index_list(j["key_indices"], where + ".key_indices");
  LayerPolicy policy;
  if (j.contains("layer_policy")) {
    const auto& p = j["layer_policy"];
    if (p.is_string() && p.get<std::string>() == "all_but_last") {
      policy = LayerPolicy::all_but_last();
    } else if (p.is_string() && p.get<std::string>() == "all") {
      policy = LayerPolicy::all();
    } else if (p.is_array()) {
      policy = LayerPolicy::explicit_layers(index_list(p, where + ".layer_policy"));
    } else {
      expect(false, where + ".layer_policy", "expected \"all_but_last\", \"all\" or [layers]");
    }
  }
  return MaskSpec(std::move(indices), std::move(policy));
}

json attention_to_json(const AttentionSnapshot& attention) { return attention.rows; }

AttentionSnapshot attention_from_json(const json& j, const std::string& where) {
  expect(j.is_array(), where, "expected an array of attention rows");
  AttentionSnapshot out;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string w = where + "[" + std::to_string(r) + "]";
    expect(j[r].is_array(), w, "expected an attention row");
    std::vector<double> row;
    for (std::size_t i = 0; i < j[r].size(); ++i) row.push_back(number(j[r][i], w));
    expect(out.rows.empty() || row.size() == out.rows.front().size(), w,
           "attention rows must have equal length");
    out.rows.push_back(std::move(row));
  }
  return out;
}

json config_to_json(const DecodeConfig& c) {
  return {{"alpha_v", c.alpha_v},
          {"alpha_a", c.alpha_a},
          {"tau", extended_double(c.tau)},
          {"beta", c.beta},
          {"mask_ratio", c.mask_ratio},
          {"strategy", strategy_name(c.strategy)},
          {"seed", c.seed},
          {"max_tokens", c.max_tokens},
          {"eos_token", c.eos_token.value},
          {"combiner", combiner_name(c.combiner)},
          {"bimodal_modalities", c.bimodal_modalities}};
}

DecodeConfig config_from_json(const json& j, DecodeConfig c, const std::string& where) {
  only_keys(j,
            {"alpha_v", "alpha_a", "tau", "beta", "mask_ratio", "strategy", "seed", "max_tokens",
             "eos_token", "combiner", "bimodal_modalities"},
            where);
  const auto w = [&](const char* key) { return where + "." + key; };
  if (j.contains("alpha_v")) c.alpha_v = number(j["alpha_v"], w("alpha_v"));
  if (j.contains("alpha_a")) c.alpha_a = number(j["alpha_a"], w("alpha_a"));
  if (j.contains("tau")) c.tau = extended_double_from_json(j["tau"], w("tau"));
  if (j.contains("beta")) c.beta = number(j["beta"], w("beta"));
  if (j.contains("mask_ratio")) c.mask_ratio = number(j["mask_ratio"], w("mask_ratio"));
  if (j.contains("seed")) c.seed = unsigned_int(j["seed"], w("seed"));
  if (j.contains("max_tokens")) {
    c.max_tokens = static_cast<std::size_t>(unsigned_int(j["max_tokens"], w("max_tokens")));
  }
  if (j.contains("eos_token")) {
    c.eos_token = TokenId(static_cast<std::uint32_t>(unsigned_int(j["eos_token"], w("eos_token"))));
  }
  try {
    if (j.contains("strategy")) {
      expect(j["strategy"].is_string(), w("strategy"), "expected a string");
      c.strategy = parse_strategy(j["strategy"].get<std::string>());
    }
    if (j.contains("combiner")) {
      expect(j["combiner"].is_string(), w("combiner"), "expected a string");
      c.combiner = parse_combiner(j["combiner"].get<std::string>());
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchema) throw;
    fail(ErrorCode::kSchema, where + ": " + e.what());
  }
  if (j.contains("bimodal_modalities")) {
    const auto& m = j["bimodal_modalities"];
    expect(m.is_array(), w("bimodal_modalities"), "expected an array of modality names");
    c.bimodal_modalities.clear();
    for (const auto& name : m) {
      expect(name.is_string(), w("bimodal_modalities"), "expected a modality name");
      c.bimodal_modalities.push_back(name.get<std::string>());
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kSchema, where + ": " + e.what());
  }
  return c;
}

json toy_config_to_json(const ToyModelConfig& c) {
  return {{"vocab_size", c.vocab_size},       {"embed_dim", c.embed_dim},
          {"layers", c.layers},               {"heads", c.heads},
          {"context_length", c.context_length}, {"output_scale", c.output_scale},
          {"seed", c.seed}};
}

ToyModelConfig toy_config_from_json(const json& j, const ModalityLayout& layout,
                                    const std::string& where) {
  only_keys(j,
            {"vocab_size", "embed_dim", "layers", "heads", "context_length", "output_scale",
             "seed"},
            where);
  ToyModelConfig c;
  c.layout = layout;
  const auto w = [&](const char* key) { return where + "." + key; };
  auto size = [&](const char* key, std::size_t& field) {
    if (j.contains(key)) field = static_cast<std::size_t>(unsigned_int(j[key], w(key)));
  };
  size("vocab_size", c.vocab_size);
  size("embed_dim", c.embed_dim);
  size("layers", c.layers);
  size("heads", c.heads);
  size("context_length", c.context_length);
  if (j.contains("output_scale")) c.output_scale = number(j["output_scale"], w("output_scale"));
  if (j.contains("seed")) c.seed = unsigned_int(j["seed"], w("seed"));
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kSchema, where + ": " + e.what());
  }
  return c;
}

json scripted_to_json(const ScriptedScenario& s) {
  json table = json::array();
  for (const auto& [key, entry] : s.table) {
    json e = {{"prefix", prefix_to_json(key.first)},
              {"mask", key.second},
              {"logits", logits_to_json(entry.logits)}};
    if (entry.attention) e["attention"] = attention_to_json(*entry.attention);
    table.push_back(std::move(e));
  }
  return {{"vocab_size", s.descriptor.vocab_size},
          {"layers", s.descriptor.layer_count},
          {"name", s.descriptor.name},
          {"default_attention", attention_to_json(s.default_attention)},
          {"table", std::move(table)}};
}

ScriptedScenario scripted_from_json(const json& j, const ModalityLayout& layout,
                                    const std::string& where) {
  only_keys(j, {"vocab_size", "layers", "name", "default_attention", "table"}, where);
  expect(j.contains("vocab_size") && j.contains("layers") && j.contains("table"), where,
         "scripted provider needs vocab_size, layers and table");
  ScriptedScenario s;
  s.descriptor.vocab_size = static_cast<std::size_t>(unsigned_int(j["vocab_size"], where));
  s.descriptor.layer_count = static_cast<std::size_t>(unsigned_int(j["layers"], where));
  s.descriptor.layout = layout;
  s.descriptor.name = j.value("name", std::string("scripted"));
  if (j.contains("default_attention")) {
    s.default_attention = attention_from_json(j["default_attention"], where + ".default_attention");
    expect(s.default_attention.layers() == s.descriptor.layer_count, where + ".default_attention",
           "needs one row per layer");
  }
  const auto& table = j["table"];
  expect(table.is_array(), where + ".table", "expected an array");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string w = where + ".table[" + std::to_string(i) + "]";
    const auto& e = table[i];
    only_keys(e, {"prefix", "mask", "logits", "attention"}, w);
    expect(e.contains("prefix") && e.contains("logits"), w, "entry needs prefix and logits");
    ScriptedEntry entry;
    entry.logits = logits_from_json(e["logits"], w + ".logits");
    expect(entry.logits.size() == s.descriptor.vocab_size, w, "logits length != vocab_size");
    if (e.contains("attention")) entry.attention = attention_from_json(e["attention"], w);
    std::string mask = "none";
    if (e.contains("mask")) {
      expect(e["mask"].is_string(), w + ".mask", "expected a mask label");
      mask = e["mask"].get<std::string>();
    }
    const bool fresh =
        s.table.emplace(std::make_pair(prefix_from_json(e["prefix"], w), mask), entry).second;
    expect(fresh, w, "duplicate (prefix, mask) entry");
  }
  expect(s.descriptor.vocab_size > 0 && s.descriptor.layer_count > 0, where,
         "vocab_size and layers must be positive");
  if (s.default_attention.rows.empty()) {
    for (const auto& [key, entry] : s.table) {
      expect(entry.attention.has_value(), where,
             "entries without attention need default_attention");
    }
  }
  return s;
}

json step_to_json(const StepRecord& s) {
  json dominance = json::array();
  for (const auto& [name, score] : s.dominance) dominance.push_back(json::array({name, score}));
  json variants = json::array();
  for (const auto& v : s.masked_variants) {
    variants.push_back({{"label", v.label}, {"logits", logits_to_json(v.logits)}});
  }
  return {{"step", s.index},
          {"prefix_length", s.prefix_length},
          {"entropy", s.entropy},
          {"gate_skipped", s.gate_skipped},
          {"mode", s.mode},
          {"dominance", std::move(dominance)},
          {"dominant", s.dominant},
          {"original", logits_to_json(s.original)},
          {"masked_variants", std::move(variants)},
          {"combined", logits_to_json(s.combined)},
          {"chosen", s.chosen.value},
          {"forward_passes", s.forward_passes},
          {"rng_state", std::to_string(s.rng_state)}};
}

StepRecord step_from_json(const json& j, const std::string& where) {
  expect(j.is_object(), where, "expected a step record object");
  StepRecord s;
  try {
    s.index = j.at("step").get<std::size_t>();
    s.prefix_length = j.at("prefix_length").get<std::size_t>();
    s.entropy = j.at("entropy").get<double>();
    s.gate_skipped = j.at("gate_skipped").get<bool>();
    s.mode = j.at("mode").get<std::string>();
    for (const auto& d : j.at("dominance")) {
      s.dominance.emplace_back(d.at(0).get<std::string>(), d.at(1).get<double>());
    }
    s.dominant = j.at("dominant").get<std::string>();
    s.original = logits_from_json(j.at("original"), where + ".original");
    for (const auto& v : j.at("masked_variants")) {
      s.masked_variants.push_back(
          {v.at("label").get<std::string>(), logits_from_json(v.at("logits"), where)});
    }
    s.combined = logits_from_json(j.at("combined"), where + ".combined");
    s.chosen = TokenId(j.at("chosen").get<std::uint32_t>());
    s.forward_passes = j.at("forward_passes").get<std::size_t>();
    s.rng_state = std::stoull(j.at("rng_state").get<std::string>());
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchema, where + ": " + e.what());
  } catch (const std::logic_error& e) {
    fail(ErrorCode::kSchema, where + ": bad rng_state");
  }
  return s;
}

}  // namespace avcd::json_io
