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

#include "avcd/contrastive.hpp"

#include <algorithm>
#include <cmath>

namespace avcd {

namespace {

void same_length(std::size_t a, std::size_t b, const char* what) {
  require(a == b, ErrorCode::kShapeMismatch,
          std::string(what) + ": length mismatch " + std::to_string(a) + " vs " +
              std::to_string(b));
}

void check_alpha(double alpha) {
  require(std::isfinite(alpha) && alpha >= 0.0, ErrorCode::kInvalidArgument,
          "contrast weight alpha must be finite and >= 0");
}

}  // namespace

AvcdCoefficients avcd_coefficients(double alpha_v, double alpha_a) {
  check_alpha(alpha_v);
  check_alpha(alpha_a);
  return {2.0 + alpha_v + alpha_a, 1.0 - alpha_v + alpha_a, 1.0 + alpha_v - alpha_a,
          -(alpha_v + alpha_a)};
}

const Logits& CombineInputs::variant(const std::string& label) const {
  auto it = variants.find(label);
  require(it != variants.end(), ErrorCode::kInvalidArgument,
          "combine: missing masked variant '" + label + "'");
  return it->second;
}

Logits combine_trimodal(std::span<const double> original, std::span<const double> x_masked,
                        std::span<const double> y_masked, std::span<const double> both_masked,
                        double alpha_x, double alpha_y) {
  same_length(original.size(), x_masked.size(), "combine_trimodal");
  same_length(original.size(), y_masked.size(), "combine_trimodal");
  same_length(original.size(), both_masked.size(), "combine_trimodal");
  const auto c = avcd_coefficients(alpha_x, alpha_y);
  Logits out(original.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = c.original * original[i] + c.video_masked * x_masked[i] +
             c.audio_masked * y_masked[i] + c.both_masked * both_masked[i];
  }
  return out;
}

Logits combine_trimodal(const CombineInputs& inputs, double alpha_v, double alpha_a) {
  return combine_trimodal(inputs.original, inputs.variant("V"), inputs.variant("A"),
                          inputs.variant("A+V"), alpha_v, alpha_a);
}

Logits combine_bimodal(std::span<const double> original, std::span<const double> masked,
                       double alpha) {
  check_alpha(alpha);
  same_length(original.size(), masked.size(), "combine_bimodal");
  Logits out(original.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 + alpha) * original[i] - alpha * masked[i];
  }
  return out;
}

Logits combine_naive_trimodal(std::span<const double> original, std::span<const double> x_masked,
                              std::span<const double> y_masked,
                              std::span<const double> both_masked, double alpha) {
  check_alpha(alpha);
  same_length(original.size(), x_masked.size(), "combine_naive_trimodal");
  same_length(original.size(), y_masked.size(), "combine_naive_trimodal");
  same_length(original.size(), both_masked.size(), "combine_naive_trimodal");
  Logits out(original.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 + 3.0 * alpha) * original[i] -
             alpha * (x_masked[i] + y_masked[i] + both_masked[i]);
  }
  return out;
}

Logits combine_naive_trimodal(const CombineInputs& inputs, double alpha) {
  return combine_naive_trimodal(inputs.original, inputs.variant("V"), inputs.variant("A"),
                                inputs.variant("A+V"), alpha);
}

Logits apply_plausibility(std::span<const double> combined, std::span<const double> original_probs,
                          double beta) {
  require(beta >= 0.0 && beta <= 1.0, ErrorCode::kInvalidArgument, "beta must be in [0, 1]");
  same_length(combined.size(), original_probs.size(), "apply_plausibility");
  const double max_p = *std::max_element(original_probs.begin(), original_probs.end());
  const double cutoff = beta * max_p;
  Logits out(combined.begin(), combined.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (original_probs[i] < cutoff) out[i] = kNegInf;
  }
  return out;
}

GateDecision entropy_gate(std::span<const double> original_logits, double tau) {
  require(tau >= 0.0, ErrorCode::kInvalidArgument, "tau must be >= 0");
  const double h = entropy(softmax(original_logits));
  return {h < tau, h};
}

TokenId sample_token(std::span<const double> constrained, Strategy strategy, SplitMix64& rng) {
  if (strategy == Strategy::kGreedy) return argmax_tiebreak(constrained);
  const Probs p = softmax(constrained);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last = p.size();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last = i;
    cumulative += p[i];
    if (u < cumulative) return TokenId(static_cast<std::uint32_t>(i));
  }
  // u landed in the rounding gap above the final cumulative sum.
  return TokenId(static_cast<std::uint32_t>(last));
}

}  // namespace avcd
