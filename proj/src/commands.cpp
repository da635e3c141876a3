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

#include "avcd/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "avcd/json_io.hpp"
#include "avcd/oracle.hpp"
#include "avcd/scenario.hpp"
#include "avcd/wire.hpp"

namespace avcd {

using nlohmann::json;
using json_io::expect;

namespace {

const std::set<std::string> kKnownOptions = {
    "scenario", "out",  "config",    "seed",  "samples",  "report_only",
    "kind",     "taus", "delta_max", "sigma", "modality",
};

void check_options(const json& options) {
  expect(options.is_object(), "options", "expected an object");
  for (const auto& [key, _] : options.items()) {
    expect(kKnownOptions.count(key) > 0, "options", "unknown option '" + key + "'");
  }
}

std::string string_option(const json& o, const char* key, const std::string& fallback) {
  if (!o.contains(key) || o[key].is_null()) return fallback;
  expect(o[key].is_string(), std::string("options.") + key, "expected a string");
  return o[key].get<std::string>();
}

double number_option(const json& o, const char* key, double fallback) {
  if (!o.contains(key) || o[key].is_null()) return fallback;
  return json_io::extended_double_from_json(o[key], std::string("options.") + key);
}

std::uint64_t unsigned_option(const json& o, const char* key, std::uint64_t fallback) {
  if (!o.contains(key) || o[key].is_null()) return fallback;
  expect(o[key].is_number_unsigned() ||
             (o[key].is_number_integer() && o[key].get<std::int64_t>() >= 0),
         std::string("options.") + key, "expected a non-negative integer");
  return o[key].get<std::uint64_t>();
}

bool bool_option(const json& o, const char* key) {
  if (!o.contains(key) || o[key].is_null()) return false;
  expect(o[key].is_boolean(), std::string("options.") + key, "expected a boolean");
  return o[key].get<bool>();
}

const char* provider_kind_name(ProviderSpec::Kind k) {
  switch (k) {
    case ProviderSpec::Kind::kToy: return "toy";
    case ProviderSpec::Kind::kScripted: return "scripted";
    case ProviderSpec::Kind::kRemote: return "remote";
  }
  return "?";
}

Scenario load_with_overrides(const json& options) {
  expect(options.contains("scenario"), "options", "--scenario is required");
  Scenario s = load_scenario_file(string_option(options, "scenario", ""));
  if (options.contains("config")) {
    s.config = json_io::config_from_json(options["config"], s.config, "options.config");
  }
  if (options.contains("seed")) s.config.seed = unsigned_option(options, "seed", 0);
  for (const auto& m : s.config.bimodal_modalities) {
    expect(s.layout.has(m), "options.config.bimodal_modalities", "unknown modality '" + m + "'");
  }
  return s;
}

std::filesystem::path output_dir(const json& options) {
  const std::string out = string_option(options, "out", "");
  if (out.empty()) return {};
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  require(!ec, ErrorCode::kIo, "cannot create output directory '" + out + "': " + ec.message());
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), ErrorCode::kIo, "cannot write '" + path.string() + "'");
  f << text;
  f.close();
  require(f.good(), ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

void write_trace(const std::filesystem::path& path, const std::vector<DecodeTrace>& traces) {
  std::string text;
  for (std::size_t run = 0; run < traces.size(); ++run) {
    for (const auto& step : traces[run].steps) {
      json j = json_io::step_to_json(step);
      j["run"] = run;
      text += j.dump();
      text += '\n';
    }
  }
  write_text(path, text);
}

struct SuiteResult {
  std::vector<DecodeTrace> traces;
  std::uint64_t provider_calls = 0;
  double wall_seconds = 0.0;
};

/// Decodes every prompt of the scenario. Run i uses seed config.seed + i.
/// In-process providers get one instance per worker; a remote adapter is a
/// single connection and runs sequentially.
SuiteResult run_suite(const Scenario& scenario, const DecodeConfig& config) {
  const std::size_t n = scenario.prompts.size();
  SuiteResult result;
  result.traces.resize(n);
  const auto start = std::chrono::steady_clock::now();

  std::size_t workers = 1;
  if (scenario.provider.kind != ProviderSpec::Kind::kRemote) {
    workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
    workers = std::min(workers, n);
  }
  std::vector<std::unique_ptr<Provider>> providers;
  for (std::size_t w = 0; w < workers; ++w) providers.push_back(make_provider(scenario));

  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      DecodeConfig c = config;
      c.seed = config.seed + i;
      result.traces[i] = decode(*providers[w], scenario.prompts[i], scenario.layout, c);
      result.traces[i].config = config;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& p : providers) result.provider_calls += p->forward_calls();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<StepRecord> all_steps(const std::vector<DecodeTrace>& traces) {
  std::vector<StepRecord> steps;
  for (const auto& t : traces) steps.insert(steps.end(), t.steps.begin(), t.steps.end());
  return steps;
}

json runs_json(const std::vector<DecodeTrace>& traces) {
  json runs = json::array();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    json r{{"run", i},
           {"tokens", json_io::prefix_to_json(t.tokens())},
           {"ok", t.ok},
           {"summary", summarize_steps(t.steps)}};
    if (!t.ok) {
      r["error"] = t.error;
      if (t.error_code) r["error_code"] = error_code_name(*t.error_code);
    }
    runs.push_back(std::move(r));
  }
  return runs;
}

/// Exit code for a suite: 3 if any run failed, else 0.
int suite_exit_code(const std::vector<DecodeTrace>& traces) {
  for (const auto& t : traces) {
    if (!t.ok) return t.error_code ? exit_code_for(*t.error_code) : 3;
  }
  return 0;
}

json coefficient_metadata(const DecodeConfig& c, const ModalityLayout& layout) {
  json m{{"combiner", combiner_name(c.combiner)}, {"strategy", strategy_name(c.strategy)}};
  if (c.combiner == Combiner::kAvcd && layout.modality_count() == 3) {
    const AvcdCoefficients k = avcd_coefficients(c.alpha_v, c.alpha_a);
    m["coefficients"] = {{"original", k.original},
                         {"video_masked", k.video_masked},
                         {"audio_masked", k.audio_masked},
                         {"both_masked", k.both_masked}};
    m["coefficient_sum"] = 4.0;
  } else {
    m["coefficient_sum"] = 1.0;
  }
  // Logits are combined unnormalized; with sampling, a coefficient sum above
  // one sharpens the distribution like a temperature below one.
  m["sampling_temperature_equivalent"] =
      c.strategy == Strategy::kSample ? 1.0 / m["coefficient_sum"].get<double>() : 1.0;
  return m;
}

// decode

CommandResult cmd_decode(const json& options) {
  const Scenario s = load_with_overrides(options);
  const auto dir = output_dir(options);
  SuiteResult suite = run_suite(s, s.config);

  CommandResult r;
  r.report = {{"command", "decode"},
              {"scenario", s.name},
              {"provider", provider_kind_name(s.provider.kind)},
              {"config", json_io::config_to_json(s.config)},
              {"metadata", coefficient_metadata(s.config, s.layout)},
              {"runs", runs_json(suite.traces)},
              {"summary", summarize_steps(all_steps(suite.traces))},
              {"provider_calls", suite.provider_calls},
              {"trace", nullptr}};
  if (!dir.empty()) {
    write_trace(dir / "trace.jsonl", suite.traces);
    r.report["trace"] = "trace.jsonl";  // relative to the output directory
    write_text(dir / "report.json", r.report.dump(2) + "\n");
  }
  r.exit_code = suite_exit_code(suite.traces);
  return r;
}

// ablate

struct AblationRow {
  std::string label;
  DecodeConfig config;
  std::vector<std::string> masked;
};

std::vector<std::string> contrast_modalities(const ModalityLayout& layout) {
  if (layout.modality_count() == 3) {
    if (layout.has("video") && layout.has("audio")) return {"video", "audio"};
    return {layout.spans()[0].name, layout.spans()[1].name};
  }
  for (const auto& span : layout.spans()) {
    if (span.name != "language") return {span.name};
  }
  return {layout.spans()[0].name};
}

std::string joined_label(std::vector<std::string> modalities) {
  std::vector<std::string> labels;
  for (const auto& m : modalities) labels.push_back(modality_label(m));
  std::sort(labels.begin(), labels.end());
  std::string out;
  for (const auto& l : labels) out += (out.empty() ? "" : "+") + l;
  return out;
}

std::vector<AblationRow> ablation_rows(const Scenario& s) {
  std::vector<AblationRow> rows;
  DecodeConfig base = s.config;
  base.tau = std::numeric_limits<double>::infinity();
  rows.push_back({"base", base, {}});

  const auto contrast = contrast_modalities(s.layout);
  std::vector<std::vector<std::string>> eq4_sets;
  for (const auto& m : contrast) eq4_sets.push_back({m});
  if (contrast.size() == 2) eq4_sets.push_back(contrast);
  for (const auto& set : eq4_sets) {
    DecodeConfig c = s.config;
    c.combiner = Combiner::kBimodal;
    c.bimodal_modalities = set;
    rows.push_back({"eq4-" + joined_label(set), c, set});
  }
  if (s.layout.modality_count() == 3) {
    DecodeConfig c = s.config;
    c.combiner = Combiner::kNaive;
    rows.push_back({"eq9", c, {}});
  }
  DecodeConfig c = s.config;
  c.combiner = Combiner::kAvcd;
  rows.push_back({"avcd", c, {}});
  return rows;
}

bool same_logits(const Logits& a, const Logits& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i])) return false;
  }
  return true;
}

CommandResult cmd_ablate(const json& options) {
  const Scenario s = load_with_overrides(options);
  const auto dir = output_dir(options);
  const auto rows = ablation_rows(s);

  std::vector<SuiteResult> results;
  for (const auto& row : rows) results.push_back(run_suite(s, row.config));

  CommandResult r;
  json rows_json = json::array();
  bool variants_differ = false;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& traces = results[k].traces;
    json step_kl = json::array();
    std::set<std::size_t> passes_when_open;
    for (const auto& t : traces) {
      json per_run = json::array();
      for (const auto& step : t.steps) {
        const Probs p = softmax(step.combined);
        per_run.push_back(kl_divergence(p, softmax(step.original)));
        if (!step.gate_skipped) passes_when_open.insert(step.forward_passes);
        for (std::size_t a = 1; a < step.masked_variants.size(); ++a) {
          if (!same_logits(step.masked_variants[a].logits, step.masked_variants[0].logits)) {
            variants_differ = true;
          }
        }
      }
      step_kl.push_back(std::move(per_run));
    }
    json tokens = json::array();
    for (const auto& t : traces) tokens.push_back(json_io::prefix_to_json(t.tokens()));
    rows_json.push_back({{"label", rows[k].label},
                         {"combiner", combiner_name(rows[k].config.combiner)},
                         {"tau", json_io::extended_double(rows[k].config.tau)},
                         {"masked_modalities", rows[k].masked},
                         {"tokens", std::move(tokens)},
                         {"forward_passes", results[k].provider_calls},
                         {"passes_per_non_gated_step", passes_when_open},
                         {"step_kl_combined_vs_original", std::move(step_kl)},
                         {"summary", summarize_steps(all_steps(traces))}});
    if (!dir.empty()) write_trace(dir / ("ablate-" + rows[k].label + ".jsonl"), traces);
  }

  // Pairwise comparison of combined logits at steps whose prefixes agree.
  json pairs = json::array();
  bool all_distinct = true;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      std::size_t compared = 0;
      bool distinct = false;
      for (std::size_t run = 0; run < s.prompts.size(); ++run) {
        const auto& ta = results[a].traces[run].steps;
        const auto& tb = results[b].traces[run].steps;
        for (std::size_t i = 0; i < std::min(ta.size(), tb.size()); ++i) {
          ++compared;
          if (!same_logits(ta[i].combined, tb[i].combined)) distinct = true;
          if (ta[i].chosen != tb[i].chosen) break;
        }
      }
      all_distinct = all_distinct && distinct;
      pairs.push_back({{"rows", {rows[a].label, rows[b].label}},
                       {"compared_steps", compared},
                       {"distinct", distinct}});
    }
  }

  r.report = {{"command", "ablate"},
              {"scenario", s.name},
              {"config", json_io::config_to_json(s.config)},
              {"rows", std::move(rows_json)},
              {"pairs", std::move(pairs)},
              {"all_pairs_distinct", all_distinct},
              {"masked_variants_differ", variants_differ},
              {"alpha_positive", s.config.alpha_v > 0.0 || s.config.alpha_a > 0.0}};
  if (s.layout.modality_count() == 2) {
    r.warnings.push_back("bimodal scenario: only base, single-mask and reduced AVCD rows");
  }
  if (!dir.empty()) write_text(dir / "report.json", r.report.dump(2) + "\n");
  for (const auto& res : results) {
    if (const int code = suite_exit_code(res.traces); code != 0) r.exit_code = code;
  }
  return r;
}

// sweep-tau

CommandResult cmd_sweep_tau(const json& options) {
  const Scenario s = load_with_overrides(options);
  std::vector<double> taus{0.0, 0.3, 0.6, 1.0, std::numeric_limits<double>::infinity()};
  if (options.contains("taus")) {
    expect(options["taus"].is_array(), "options.taus", "expected an array");
    taus.clear();
    for (const auto& t : options["taus"]) {
      taus.push_back(json_io::extended_double_from_json(t, "options.taus"));
      expect(taus.back() >= 0.0, "options.taus", "tau must be >= 0");
    }
  }
  expect(taus.size() >= 2, "options.taus", "at least two tau values are required");
  std::sort(taus.begin(), taus.end());
  const auto dir = output_dir(options);

  std::vector<SuiteResult> results;
  json points = json::array();
  for (std::size_t k = 0; k < taus.size(); ++k) {
    DecodeConfig c = s.config;
    c.tau = taus[k];
    results.push_back(run_suite(s, c));
    const auto steps = all_steps(results.back().traces);
    const json summary = summarize_steps(steps);
    const double tokens = static_cast<double>(steps.size());
    points.push_back(
        {{"tau", json_io::extended_double(taus[k])},
         {"tokens", steps.size()},
         {"gated_fraction", summary["gated_fraction"]},
         {"forward_passes", summary["forward_passes"]},
         {"provider_calls", results.back().provider_calls},
         {"passes_per_token",
          tokens > 0 ? summary["forward_passes"].get<double>() / tokens : 0.0},
         {"wall_seconds", results.back().wall_seconds},
         {"seconds_per_token", tokens > 0 ? results.back().wall_seconds / tokens : 0.0}});
    if (!dir.empty()) {
      write_trace(dir / ("sweep-tau-" + std::to_string(k) + ".jsonl"), results.back().traces);
    }
  }

  bool passes_monotone = true;
  bool time_monotone = true;
  for (std::size_t k = 1; k < points.size(); ++k) {
    passes_monotone = passes_monotone && points[k]["passes_per_token"].get<double>() <=
                                             points[k - 1]["passes_per_token"].get<double>();
    time_monotone = time_monotone && points[k]["seconds_per_token"].get<double>() <=
                                         points[k - 1]["seconds_per_token"].get<double>();
  }

  // Gated-set inclusion between consecutive thresholds, at steps whose
  // prefixes agree.
  bool inclusion = true;
  std::size_t compared = 0;
  for (std::size_t k = 1; k < taus.size(); ++k) {
    for (std::size_t run = 0; run < s.prompts.size(); ++run) {
      const auto& lo = results[k - 1].traces[run].steps;
      const auto& hi = results[k].traces[run].steps;
      for (std::size_t i = 0; i < std::min(lo.size(), hi.size()); ++i) {
        ++compared;
        if (lo[i].gate_skipped && !hi[i].gate_skipped) inclusion = false;
        if (lo[i].chosen != hi[i].chosen) break;
      }
    }
  }

  CommandResult r;
  r.report = {{"command", "sweep-tau"},
              {"scenario", s.name},
              {"config", json_io::config_to_json(s.config)},
              {"points", std::move(points)},
              {"passes_nonincreasing", passes_monotone},
              {"time_nonincreasing", time_monotone},
              {"gated_inclusion", inclusion},
              {"gated_inclusion_compared_steps", compared}};
  if (!dir.empty()) write_text(dir / "report.json", r.report.dump(2) + "\n");
  for (const auto& res : results) {
    if (const int code = suite_exit_code(res.traces); code != 0) r.exit_code = code;
  }
  if (r.exit_code == 0 && !(passes_monotone && inclusion)) r.exit_code = 1;
  return r;
}

// diagnose-kl

CommandResult cmd_diagnose_kl(const json& options) {
  const Scenario s = load_with_overrides(options);
  CommandResult r;
  if (s.provider.kind != ProviderSpec::Kind::kToy) {
    r.exit_code = 2;
    r.report = {{"command", "diagnose-kl"},
                {"error", std::string("diagnose-kl needs a toy provider (noise injection "
                                      "requires embedding access); this scenario uses a ") +
                              provider_kind_name(s.provider.kind) + " provider"}};
    return r;
  }
  const std::size_t samples = unsigned_option(options, "samples", 100);
  expect(samples >= 1, "options.samples", "must be positive");
  if (samples < 100) {
    r.warnings.push_back("only " + std::to_string(samples) +
                         " samples; the reference protocol uses 100");
  }
  oracle::KlDiagnosticConfig kc;
  kc.modality = string_option(options, "modality", kc.modality);
  expect(s.layout.has(kc.modality), "options.modality", "unknown modality '" + kc.modality + "'");
  kc.sigma = number_option(options, "sigma", kc.sigma);
  expect(std::isfinite(kc.sigma) && kc.sigma > 0.0, "options.sigma", "must be positive");
  kc.mask_ratio = s.config.mask_ratio;

  const ToyModel model(s.provider.toy);
  const auto prompts = oracle::random_prompts(samples, s.layout.total_tokens(),
                                              s.provider.toy.vocab_size, s.config.seed);
  const auto d = oracle::kl_masking_vs_noise(model, prompts, kc);
  r.report = {{"command", "diagnose-kl"},
              {"scenario", s.name},
              {"samples", samples},
              {"prompt_seed", s.config.seed},
              {"model_seed", s.provider.toy.seed},
              {"modality", kc.modality},
              {"sigma", kc.sigma},
              {"mask_ratio", kc.mask_ratio},
              {"noise_seed", kc.noise_seed},
              {"kl_mask", d.kl_mask},
              {"kl_noise", d.kl_noise},
              {"mean_kl_mask", d.mean_kl_mask},
              {"mean_kl_noise", d.mean_kl_noise},
              {"mask_below_noise", d.mean_kl_mask < d.mean_kl_noise}};
  if (const auto dir = output_dir(options); !dir.empty()) {
    write_text(dir / "report.json", r.report.dump(2) + "\n");
  }
  return r;
}

// verify-approx

json sample_json(const oracle::TaylorSample& t) {
  return {{"a", t.a},         {"b", t.b},         {"mean", t.mean},   {"delta", t.delta},
          {"exact", t.exact}, {"approx", t.approx}, {"error", t.error}, {"predicted", t.predicted}};
}

CommandResult cmd_verify_approx(const json& options) {
  const std::size_t samples = unsigned_option(options, "samples", 1000);
  const std::uint64_t seed = unsigned_option(options, "seed", 0);
  const double delta_max = number_option(options, "delta_max", 0.1);
  const bool report_only = bool_option(options, "report_only");
  expect(samples >= 100, "options.samples", "the study needs at least 100 samples");
  expect(delta_max > 0.0 && delta_max < 1.0, "options.delta_max", "must lie in (0, 1)");

  const auto study = oracle::taylor_scaling_study(samples, seed, delta_max);
  const auto even = oracle::taylor_error(1.0, 1.0);
  const auto wide = oracle::taylor_error(1.2, 0.8);
  const auto narrow = oracle::taylor_error(1.1, 0.9);
  const bool in_range = study.fitted_order >= 1.9 && study.fitted_order <= 2.1;

  CommandResult r;
  r.report = {{"command", "verify-approx"},
              {"samples", study.samples},
              {"seed", seed},
              {"delta_max", delta_max},
              {"fitted_order", study.fitted_order},
              {"intercept", study.intercept},
              {"halving_ratio", study.halving_ratio},
              {"min_relative_delta", study.min_relative_delta},
              {"max_relative_delta", study.max_relative_delta},
              {"hand_samples", {sample_json(even), sample_json(wide), sample_json(narrow)}},
              {"hand_quarter_ratio", wide.error / narrow.error},
              {"order_in_range", in_range},
              {"report_only", report_only}};
  if (const auto dir = output_dir(options); !dir.empty()) {
    write_text(dir / "report.json", r.report.dump(2) + "\n");
  }
  if (!in_range) {
    r.warnings.push_back("fitted order outside [1.9, 2.1]");
    if (!report_only) r.exit_code = 1;
  }
  return r;
}

// gen-scenario

CommandResult cmd_gen_scenario(const json& options) {
  expect(options.contains("kind"), "options", "--kind is required");
  const Scenario s =
      generate_scenario(string_option(options, "kind", ""), unsigned_option(options, "seed", 7));
  CommandResult r;
  r.report = scenario_to_json(s);
  const std::string out = string_option(options, "out", "");
  if (!out.empty()) {
    const std::filesystem::path path(out);
    if (path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
    }
    write_text(path, r.report.dump(2) + "\n");
  }
  return r;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kSchema:
    case ErrorCode::kIo:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnsupported:
      return 2;
    default:
      return 3;
  }
}

json summarize_steps(const std::vector<StepRecord>& steps) {
  std::size_t gated = 0;
  std::uint64_t passes = 0;
  double entropy_sum = 0.0;
  std::map<std::string, std::size_t> dominant_counts;
  std::map<std::string, double> score_sums;
  for (const auto& s : steps) {
    gated += s.gate_skipped ? 1 : 0;
    passes += s.forward_passes;
    entropy_sum += s.entropy;
    ++dominant_counts[s.dominant];
    for (const auto& [name, score] : s.dominance) score_sums[name] += score;
  }
  const double n = static_cast<double>(steps.size());
  json mean_scores = json::object();
  for (const auto& [name, sum] : score_sums) mean_scores[name] = sum / n;
  return {{"steps", steps.size()},
          {"gated_steps", gated},
          {"gated_fraction", steps.empty() ? 0.0 : static_cast<double>(gated) / n},
          {"forward_passes", passes},
          {"mean_entropy", steps.empty() ? 0.0 : entropy_sum / n},
          {"dominance", {{"dominant_counts", dominant_counts}, {"mean_scores", mean_scores}}}};
}

std::vector<StepRecord> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open trace '" + path + "'");
  std::vector<StepRecord> steps;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::kSchema, path + ":" + std::to_string(n) + ": " + e.what());
    }
    steps.push_back(json_io::step_from_json(j, path + ":" + std::to_string(n)));
  }
  return steps;
}

CommandResult run_command(const std::string& command, const json& options) {
  try {
    check_options(options);
    if (command == "decode") return cmd_decode(options);
    if (command == "ablate") return cmd_ablate(options);
    if (command == "sweep-tau") return cmd_sweep_tau(options);
    if (command == "diagnose-kl") return cmd_diagnose_kl(options);
    if (command == "verify-approx") return cmd_verify_approx(options);
    if (command == "gen-scenario") return cmd_gen_scenario(options);
    return {2, {{"error", "unknown command '" + command + "'"}}, {}};
  } catch (const Error& e) {
    return {exit_code_for(e.code()),
            {{"error", e.what()}, {"error_code", error_code_name(e.code())}},
            {}};
  } catch (const std::exception& e) {
    return {3, {{"error", e.what()}}, {}};
  }
}

int serve_stdio(const std::string& scenario_path) {
  try {
    const Scenario s = load_scenario_file(scenario_path);
    auto provider = make_provider(s);
    WireServer server(*provider);
    server.serve(std::cin, std::cout);
    return 0;
  } catch (const Error& e) {
    std::cerr << "serve: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace avcd
