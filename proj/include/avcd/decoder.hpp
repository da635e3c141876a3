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

// Entropy-gated audio-visual contrastive decoding loop.
//
// Each step runs one unmasked forward pass, scores modality dominance from its
// attention and gates on the entropy of its distribution. Confident steps take
// the argmax directly. Otherwise the top-attention positions of every
// non-dominant modality are masked, the masked variants are evaluated, combined
// with the original logits, truncated by the plausibility constraint and a
// token is selected.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "avcd/contrastive.hpp"
#include "avcd/dominance.hpp"
#include "avcd/provider.hpp"

namespace avcd {

enum class Combiner {
  kAvcd,     // trimodal combination, or (1+a)o - a*m with one non-dominant modality
  kNaive,    // (1+3a)o - a*(sum of masked variants)
  kBimodal,  // single-mask (1+a)o - a*m
};

const char* combiner_name(Combiner c) noexcept;
const char* strategy_name(Strategy s) noexcept;
Combiner parse_combiner(const std::string& name);
Strategy parse_strategy(const std::string& name);

struct DecodeConfig {
  double alpha_v = 0.5;
  double alpha_a = 0.5;
  double tau = 0.6;
  double beta = 0.1;
  double mask_ratio = 50.0;
  Strategy strategy = Strategy::kGreedy;
  std::uint64_t seed = 0;
  std::size_t max_tokens = 16;
  TokenId eos_token{0};
  Combiner combiner = Combiner::kAvcd;
  /// With kBimodal: the modalities to mask, e.g. {"audio"} or
  /// {"video", "audio"}, irrespective of dominance. Empty means every
  /// non-dominant modality.
  std::vector<std::string> bimodal_modalities;

  void validate() const;

  /// Contrast weight for one modality: alpha_a for audio, alpha_v otherwise.
  double alpha_for(const std::string& modality) const;
  /// Mean of alpha_for over the listed modalities.
  double alpha_for(const std::vector<std::string>& modalities) const;
};

struct MaskedVariant {
  std::string label;
  Logits logits;
};

struct StepRecord {
  std::size_t index = 0;
  std::size_t prefix_length = 0;
  double entropy = 0.0;
  bool gate_skipped = false;
  /// Dominance score per modality, layout order.
  std::vector<std::pair<std::string, double>> dominance;
  std::string dominant;
  Logits original;
  std::vector<MaskedVariant> masked_variants;
  /// Final scores the token was selected from (after plausibility truncation).
  /// Equal to `original` on gated and fallback steps.
  Logits combined;
  TokenId chosen;
  std::size_t forward_passes = 0;
  /// "gated", "avcd", "naive", "bimodal" or "fallback" (no maskable
  /// non-dominant positions).
  std::string mode;
  std::uint64_t rng_state = 0;
};

struct DecodeTrace {
  DecodeConfig config;
  Prefix prompt;
  std::vector<StepRecord> steps;
  bool ok = true;
  std::string error;
  std::optional<ErrorCode> error_code;

  Prefix tokens() const;
  std::uint64_t total_forward_passes() const;
};

StepRecord decode_step(Provider& provider, const Prefix& prefix, const ModalityLayout& layout,
                       const DecodeConfig& config, SplitMix64& rng);

/// Runs decode_step until eos_token is emitted or max_tokens steps ran. A
/// provider failure ends the loop and is reported in the trace, which keeps
/// every completed step.
DecodeTrace decode(Provider& provider, const Prefix& prompt, const ModalityLayout& layout,
                   const DecodeConfig& config);

/// Plain greedy decoding over unmasked forward passes.
Prefix greedy_decode(Provider& provider, const Prefix& prompt, std::size_t max_tokens,
                     TokenId eos_token);

}  // namespace avcd
