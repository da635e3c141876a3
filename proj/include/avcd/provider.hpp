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

// The model-provider port. A provider turns a token prefix plus an optional
// attention mask into next-token logits and the final query's attention.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "avcd/core.hpp"

namespace avcd {

/// Which transformer layers a mask is applied at.
struct LayerPolicy {
  enum class Kind { kAllButLast, kAll, kExplicit };

  Kind kind = Kind::kAllButLast;
  std::vector<std::size_t> layers;  // only for kExplicit

  static LayerPolicy all_but_last() { return {}; }
  static LayerPolicy all() { return {Kind::kAll, {}}; }
  static LayerPolicy explicit_layers(std::vector<std::size_t> layers);

  bool covers(std::size_t layer, std::size_t layer_count) const noexcept;

  friend bool operator==(const LayerPolicy&, const LayerPolicy&) = default;
};

/// Key positions whose attention is suppressed. Indices are kept sorted and
/// unique.
class MaskSpec {
 public:
  MaskSpec() = default;
  MaskSpec(std::vector<std::size_t> key_indices, LayerPolicy policy = LayerPolicy::all_but_last());

  const std::vector<std::size_t>& key_indices() const noexcept { return key_indices_; }
  const LayerPolicy& layer_policy() const noexcept { return policy_; }
  bool empty() const noexcept { return key_indices_.empty(); }
  bool masks(std::size_t position) const noexcept;

  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;

 private:
  std::vector<std::size_t> key_indices_;
  LayerPolicy policy_;
};

/// Stable label naming the masked modalities: "none", "A", "V", "A+V", ...
std::string canonical_mask_label(const MaskSpec& mask, const ModalityLayout& layout);

struct ForwardRequest {
  Prefix prefix;
  std::optional<MaskSpec> mask;
};

struct ForwardResponse {
  Logits logits;
  AttentionSnapshot attention;
};

struct ProviderDescriptor {
  std::size_t vocab_size = 0;
  std::size_t layer_count = 0;
  ModalityLayout layout;
  std::string name;
};

class Provider {
 public:
  virtual ~Provider() = default;

  virtual const ProviderDescriptor& descriptor() const = 0;

  /// Validates the request, runs the provider, validates the response shapes.
  /// An empty mask is treated exactly like no mask.
  ForwardResponse forward(const ForwardRequest& request);

  /// Number of successful forward() calls so far.
  std::uint64_t forward_calls() const noexcept { return calls_; }

 protected:
  virtual ForwardResponse do_forward(const Prefix& prefix, const MaskSpec* mask) = 0;

 private:
  std::uint64_t calls_ = 0;
};

void validate_request(const ProviderDescriptor& desc, const ForwardRequest& request);
void validate_response(const ProviderDescriptor& desc, std::size_t prefix_len,
                       const ForwardResponse& response);

std::string format_prefix(const Prefix& prefix);

// Scripted provider.

struct ScriptedEntry {
  Logits logits;
  std::optional<AttentionSnapshot> attention;
};

/// Table-driven provider state, keyed by (full prefix, canonical mask label).
struct ScriptedScenario {
  ProviderDescriptor descriptor;
  std::map<std::pair<Prefix, std::string>, ScriptedEntry> table;
  /// Used when an entry has no attention. Rows shorter than the prefix are
  /// zero-padded.
  AttentionSnapshot default_attention;
};

class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(ScriptedScenario scenario);

  const ProviderDescriptor& descriptor() const override { return scenario_.descriptor; }
  const ScriptedScenario& scenario() const noexcept { return scenario_; }

 protected:
  ForwardResponse do_forward(const Prefix& prefix, const MaskSpec* mask) override;

 private:
  ScriptedScenario scenario_;
};

/// Passes requests through to another provider and records every response,
/// producing a scripted table that replays the visited states exactly.
class RecordingProvider final : public Provider {
 public:
  explicit RecordingProvider(Provider& inner);

  const ProviderDescriptor& descriptor() const override { return inner_.descriptor(); }
  const ScriptedScenario& recorded() const noexcept { return recorded_; }

 protected:
  ForwardResponse do_forward(const Prefix& prefix, const MaskSpec* mask) override;

 private:
  Provider& inner_;
  ScriptedScenario recorded_;
};

}  // namespace avcd
