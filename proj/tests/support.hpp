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

// Shared fixtures for the unit tests.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "avcd/core.hpp"
#include "avcd/provider.hpp"

namespace avcd::testing {

inline std::filesystem::path source_dir() { return AVCD_SOURCE_DIR; }
inline std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }
inline std::filesystem::path cli_path() { return AVCD_CLI_PATH; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("avcd-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Logits random_vector(SplitMix64& rng, std::size_t n, double lo = -5.0, double hi = 5.0) {
  Logits v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Prefix tokens(std::initializer_list<std::uint32_t> ids) {
  Prefix p;
  for (auto id : ids) p.emplace_back(id);
  return p;
}

/// video [0,2), audio [2,4), language [4,6).
inline ModalityLayout small_trimodal() {
  return ModalityLayout({{"video", 0, 2}, {"audio", 2, 4}, {"language", 4, 6}}, 6);
}

/// Runs a shell command and returns its exit status.
int run_shell(const std::string& command);

/// Reads a whole file.
std::string read_file(const std::filesystem::path& path);

}  // namespace avcd::testing
