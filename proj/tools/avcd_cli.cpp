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

// avcd command-line interface. Builds a JSON options object from flags and
// hands it to the library through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "avcd/avcd.h"

namespace {

using nlohmann::json;

// "inf" stays a string; anything else that parses becomes a number; the
// rest is passed through and rejected by the schema check.
json extended_number(const std::string& text) {
  if (text == "inf" || text == "+inf") return "inf";
  try {
    std::size_t used = 0;
    const double x = std::stod(text, &used);
    if (used == text.size()) return x;
  } catch (const std::exception&) {
  }
  return text;
}

struct Flags {
  std::string scenario;
  std::string out;
  std::optional<std::string> tau;
  std::optional<double> alpha_v;
  std::optional<double> alpha_a;
  std::optional<double> beta;
  std::optional<double> mask_ratio;
  std::optional<std::size_t> max_tokens;
  std::optional<std::string> combiner;
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  bool report_only = false;
  std::string kind;
  std::vector<std::string> taus;
  std::optional<std::string> delta_max;
  std::optional<std::string> sigma;
  std::optional<std::string> modality;
};

json to_options(const Flags& f) {
  json o = json::object();
  if (!f.scenario.empty()) o["scenario"] = f.scenario;
  if (!f.out.empty()) o["out"] = f.out;
  json config = json::object();
  if (f.tau) config["tau"] = extended_number(*f.tau);
  if (f.alpha_v) config["alpha_v"] = *f.alpha_v;
  if (f.alpha_a) config["alpha_a"] = *f.alpha_a;
  if (f.beta) config["beta"] = *f.beta;
  if (f.mask_ratio) config["mask_ratio"] = *f.mask_ratio;
  if (f.max_tokens) config["max_tokens"] = *f.max_tokens;
  if (f.combiner) config["combiner"] = *f.combiner;
  if (f.strategy) config["strategy"] = *f.strategy;
  if (!config.empty()) o["config"] = config;
  if (f.seed) o["seed"] = *f.seed;
  if (f.samples) o["samples"] = *f.samples;
  if (f.report_only) o["report_only"] = true;
  if (!f.kind.empty()) o["kind"] = f.kind;
  if (!f.taus.empty()) {
    o["taus"] = json::array();
    for (const auto& t : f.taus) o["taus"].push_back(extended_number(t));
  }
  if (f.delta_max) o["delta_max"] = extended_number(*f.delta_max);
  if (f.sigma) o["sigma"] = extended_number(*f.sigma);
  if (f.modality) o["modality"] = *f.modality;
  return o;
}

void add_decode_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--tau", f.tau, "Entropy gate threshold in nats, or inf");
  cmd->add_option("--alpha-v", f.alpha_v, "Video contrast weight");
  cmd->add_option("--alpha-a", f.alpha_a, "Audio contrast weight");
  cmd->add_option("--beta", f.beta, "Plausibility threshold in [0, 1]");
  cmd->add_option("--mask-ratio", f.mask_ratio, "Percent of top-attention tokens masked");
  cmd->add_option("--max-tokens", f.max_tokens, "Maximum generated tokens per prompt");
  cmd->add_option("--combiner", f.combiner, "avcd, naive or bimodal");
  cmd->add_option("--strategy", f.strategy, "greedy or sample");
}

int run(const std::string& command, const Flags& flags) {
  char* report = nullptr;
  int exit_code = 0;
  const std::string options = to_options(flags).dump();
  if (avcd_run_command(command.c_str(), options.c_str(), &report, &exit_code) != AVCD_OK) {
    std::cerr << "avcd: " << avcd_last_error() << "\n";
    return 3;
  }
  const json r = json::parse(report);
  avcd_string_free(report);
  for (const auto& w : r.value("warnings", json::array())) {
    std::cerr << "warning: " << w.get<std::string>() << "\n";
  }
  if (r.contains("error")) std::cerr << "avcd " << command << ": " << r["error"].get<std::string>() << "\n";
  json shown = r;
  shown.erase("warnings");
  // gen-scenario with --out writes the file; nothing to repeat on stdout.
  if (!(command == "gen-scenario" && !flags.out.empty() && exit_code == 0)) {
    std::cout << shown.dump(2) << "\n";
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio-visual contrastive decoding engine"};
  app.require_subcommand(1);
  Flags f;

  auto* decode = app.add_subcommand("decode", "Decode every prompt of a scenario");
  decode->add_option("--scenario", f.scenario, "Scenario file")->required();
  decode->add_option("--out", f.out, "Directory for trace.jsonl and report.json");
  decode->add_option("--seed", f.seed, "Seed for sampling");
  add_decode_flags(decode, f);

  auto* ablate = app.add_subcommand("ablate", "Compare base, single-mask, naive and AVCD rows");
  ablate->add_option("--scenario", f.scenario, "Scenario file")->required();
  ablate->add_option("--out", f.out, "Directory for per-row traces and report.json");
  ablate->add_option("--seed", f.seed, "Seed for sampling");
  add_decode_flags(ablate, f);

  auto* sweep = app.add_subcommand("sweep-tau", "Sweep the entropy gate threshold");
  sweep->add_option("--scenario", f.scenario, "Scenario file")->required();
  sweep->add_option("--out", f.out, "Directory for per-threshold traces and report.json");
  sweep->add_option("--seed", f.seed, "Seed for sampling");
  sweep->add_option("--taus", f.taus, "Thresholds (default 0,0.3,0.6,1.0,inf)")->delimiter(',');
  add_decode_flags(sweep, f);

  auto* kl = app.add_subcommand("diagnose-kl", "Masking vs Gaussian-noise divergence");
  kl->add_option("--scenario", f.scenario, "Toy-model scenario file")->required();
  kl->add_option("--out", f.out, "Directory for report.json");
  kl->add_option("--seed", f.seed, "Prompt suite seed");
  kl->add_option("--samples", f.samples, "Number of prompts (default 100)");
  kl->add_option("--sigma", f.sigma, "Noise standard deviation (default 1.0)");
  kl->add_option("--modality", f.modality, "Perturbed modality (default video)");
  kl->add_option("--mask-ratio", f.mask_ratio, "Percent of top-attention tokens masked");

  auto* approx = app.add_subcommand("verify-approx", "Log-mean approximation error study");
  approx->add_option("--seed", f.seed, "Sample seed (default 0)");
  approx->add_option("--samples", f.samples, "Number of samples (default 1000)");
  approx->add_option("--delta-max", f.delta_max, "Largest relative half-difference (default 0.1)");
  approx->add_option("--out", f.out, "Directory for report.json");
  approx->add_flag("--report-only", f.report_only, "Exit 0 even if the fitted order is off");

  auto* gen = app.add_subcommand("gen-scenario", "Write a generated scenario");
  gen->add_option("--kind", f.kind, "toy-trimodal, toy-bimodal or scripted-minimal")->required();
  gen->add_option("--seed", f.seed, "Generator seed (default 7)");
  gen->add_option("--out", f.out, "Output file (default: stdout)");

  auto* serve = app.add_subcommand("serve", "Serve a scenario's provider over stdin/stdout");
  serve->add_option("--scenario", f.scenario, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (serve->parsed()) return avcd_serve_stdio(f.scenario.c_str());
  return run(app.get_subcommands().front()->get_name(), f);
}
