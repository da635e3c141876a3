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

#include "avcd/decoder.hpp"

#include <cmath>

namespace avcd {

const char* combiner_name(Combiner c) noexcept {
  switch (c) {
    case Combiner::kAvcd: return "avcd";
    case Combiner::kNaive: return "naive";
    case Combiner::kBimodal: return "bimodal";
  }
  return "?";
}

const char* strategy_name(Strategy s) noexcept {
  return s == Strategy::kGreedy ? "greedy" : "sample";
}

Combiner parse_combiner(const std::string& name) {
  if (name == "avcd") return Combiner::kAvcd;
  if (name == "naive") return Combiner::kNaive;
  if (name == "bimodal") return Combiner::kBimodal;
  fail(ErrorCode::kInvalidArgument, "unknown combiner '" + name + "'");
}

Strategy parse_strategy(const std::string& name) {
  if (name == "greedy") return Strategy::kGreedy;
  if (name == "sample") return Strategy::kSample;
  fail(ErrorCode::kInvalidArgument, "unknown strategy '" + name + "'");
}

void DecodeConfig::validate() const {
  auto alpha_ok = [](double a) { return std::isfinite(a) && a >= 0.0; };
  require(alpha_ok(alpha_v) && alpha_ok(alpha_a), ErrorCode::kInvalidArgument,
          "alpha_v and alpha_a must be finite and >= 0");
  require(tau >= 0.0, ErrorCode::kInvalidArgument, "tau must be >= 0 (inf allowed)");
  require(beta >= 0.0 && beta <= 1.0, ErrorCode::kInvalidArgument, "beta must be in [0, 1]");
  require(mask_ratio > 0.0 && mask_ratio <= 100.0, ErrorCode::kInvalidArgument,
          "mask_ratio must be in (0, 100]");
  require(max_tokens > 0, ErrorCode::kInvalidArgument, "max_tokens must be positive");
}

double DecodeConfig::alpha_for(const std::string& modality) const {
  return modality == "audio" ? alpha_a : alpha_v;
}

double DecodeConfig::alpha_for(const std::vector<std::string>& modalities) const {
  if (modalities.empty()) return alpha_v;
  double sum = 0.0;
  for (const auto& m : modalities) sum += alpha_for(m);
  return sum / static_cast<double>(modalities.size());
}

Prefix DecodeTrace::tokens() const {
  Prefix out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.chosen);
  return out;
}

std::uint64_t DecodeTrace::total_forward_passes() const {
  std::uint64_t n = 0;
  for (const auto& s : steps) n += s.forward_passes;
  return n;
}

namespace {

std::vector<LabeledMask> explicit_masks(std::span<const double> mean_attention,
                                        const ModalityLayout& layout,
                                        const std::vector<std::string>& modalities,
                                        double mask_ratio) {
  std::vector<std::size_t> indices;
  std::vector<std::string> used;
  for (const auto& name : modalities) {
    const auto& span = layout.span(name);
    if (span.size() == 0) continue;
    auto top = top_attention_indices(mean_attention, span, mask_ratio);
    indices.insert(indices.end(), top.begin(), top.end());
    used.push_back(name);
  }
  if (indices.empty()) return {};
  MaskSpec mask(std::move(indices), LayerPolicy::all_but_last());
  std::string label = canonical_mask_label(mask, layout);
  return {LabeledMask{std::move(label), std::move(used), std::move(mask)}};
}

}  // namespace

StepRecord decode_step(Provider& provider, const Prefix& prefix, const ModalityLayout& layout,
                       const DecodeConfig& config, SplitMix64& rng) {
  require(provider.descriptor().layout == layout, ErrorCode::kInvalidArgument,
          "decode: provider layout does not match the scenario layout");

  StepRecord rec;
  rec.prefix_length = prefix.size();

  ForwardResponse base = provider.forward({prefix, std::nullopt});
  rec.forward_passes = 1;
  rec.original = base.logits;

  const DominanceScores dom = dominance_scores(base.attention, layout);
  for (std::size_t m = 0; m < dom.modalities.size(); ++m) {
    rec.dominance.emplace_back(dom.modalities[m], dom.score[m]);
  }
  rec.dominant = dom.dominant();

  const Probs original_probs = softmax(base.logits);
  const GateDecision gate = entropy_gate(base.logits, config.tau);
  rec.entropy = gate.entropy;
  rec.gate_skipped = gate.skip;

  if (gate.skip) {
    rec.mode = "gated";
    rec.combined = base.logits;
    rec.chosen = argmax_tiebreak(base.logits);
    rec.rng_state = rng.state();
    return rec;
  }

  const std::vector<double> mean_attention = mean_attention_per_token(base.attention);
  std::vector<LabeledMask> masks;
  if (config.combiner == Combiner::kBimodal && !config.bimodal_modalities.empty()) {
    masks = explicit_masks(mean_attention, layout, config.bimodal_modalities, config.mask_ratio);
  } else {
    masks = build_attentive_masks(mean_attention, layout, dom, config.mask_ratio);
    if (config.combiner == Combiner::kBimodal && masks.size() > 1) {
      masks = {masks.back()};  // the union over every non-dominant modality
    }
  }

  if (masks.empty()) {
    rec.mode = "fallback";
    rec.combined = base.logits;
    rec.chosen = sample_token(base.logits, config.strategy, rng);
    rec.rng_state = rng.state();
    return rec;
  }

  for (const auto& m : masks) {
    ForwardResponse r = provider.forward({prefix, m.mask});
    ++rec.forward_passes;
    rec.masked_variants.push_back({m.label, std::move(r.logits)});
  }

  Logits combined;
  if (masks.size() == 3) {
    const auto& x = rec.masked_variants[0].logits;
    const auto& y = rec.masked_variants[1].logits;
    const auto& both = rec.masked_variants[2].logits;
    const double ax = config.alpha_for(masks[0].modalities.front());
    const double ay = config.alpha_for(masks[1].modalities.front());
    if (config.combiner == Combiner::kNaive) {
      combined = combine_naive_trimodal(base.logits, x, y, both, 0.5 * (ax + ay));
      rec.mode = "naive";
    } else {
      combined = combine_trimodal(base.logits, x, y, both, ax, ay);
      rec.mode = "avcd";
    }
  } else {
    combined = combine_bimodal(base.logits, rec.masked_variants[0].logits,
                               config.alpha_for(masks[0].modalities));
    rec.mode = "bimodal";
  }

  rec.combined = apply_plausibility(combined, original_probs, config.beta);
  rec.chosen = sample_token(rec.combined, config.strategy, rng);
  rec.rng_state = rng.state();
  return rec;
}

DecodeTrace decode(Provider& provider, const Prefix& prompt, const ModalityLayout& layout,
                   const DecodeConfig& config) {
  config.validate();
  require(!prompt.empty(), ErrorCode::kInvalidArgument, "decode: prompt must be non-empty");
  require(config.eos_token.value < provider.descriptor().vocab_size, ErrorCode::kInvalidArgument,
          "decode: eos_token outside vocabulary");

  DecodeTrace trace;
  trace.config = config;
  trace.prompt = prompt;
  SplitMix64 rng(config.seed);
  Prefix prefix = prompt;
  while (trace.steps.size() < config.max_tokens) {
    StepRecord rec;
    try {
      rec = decode_step(provider, prefix, layout, config, rng);
    } catch (const Error& e) {
      trace.ok = false;
      trace.error = e.what();
      trace.error_code = e.code();
      break;
    }
    rec.index = trace.steps.size();
    prefix.push_back(rec.chosen);
    const bool eos = rec.chosen == config.eos_token;
    trace.steps.push_back(std::move(rec));
    if (eos) break;
  }
  return trace;
}

Prefix greedy_decode(Provider& provider, const Prefix& prompt, std::size_t max_tokens,
                     TokenId eos_token) {
  Prefix prefix = prompt;
  Prefix out;
  while (out.size() < max_tokens) {
    const ForwardResponse r = provider.forward({prefix, std::nullopt});
    const TokenId t = argmax_tiebreak(r.logits);
    out.push_back(t);
    prefix.push_back(t);
    if (t == eos_token) break;
  }
  return out;
}

}  // namespace avcd
