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

// Command implementations shared by the CLI and the C API. Every command takes
// a JSON options object and returns a JSON report plus a process exit code:
// 0 success, 1 failed check, 2 input or schema error, 3 provider or runtime
// error.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "avcd/decoder.hpp"

namespace avcd {

struct CommandResult {
  int exit_code = 0;
  nlohmann::json report;
  std::vector<std::string> warnings;
};

/// Commands: decode, ablate, sweep-tau, diagnose-kl, verify-approx,
/// gen-scenario. Options (all optional unless the command needs them):
///   scenario     path to a scenario file
///   out          output directory (gen-scenario: output file)
///   config       DecodeConfig overrides, same keys as the scenario "config"
///   seed         overrides config.seed; generator seed for gen-scenario
///   samples, report_only, kind, taus, delta_max, sigma, modality
/// Never throws.
CommandResult run_command(const std::string& command, const nlohmann::json& options);

/// Exit code for an error raised while running a command.
int exit_code_for(ErrorCode code) noexcept;

/// Report statistics over a set of step records: steps, gated steps and
/// fraction, forward passes, mean entropy and a dominance summary. Applying it
/// to the steps parsed back from a trace file reproduces the report exactly.
nlohmann::json summarize_steps(const std::vector<StepRecord>& steps);

/// Parses a trace file written by decode, ablate or sweep-tau.
std::vector<StepRecord> read_trace_file(const std::string& path);

/// Serves the wire protocol on stdin/stdout using the scenario's provider.
int serve_stdio(const std::string& scenario_path);

}  // namespace avcd
