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

// Contrastive logit combiners, the plausibility constraint, the entropy gate
// and token selection.

#pragma once

#include <map>
#include <string>

#include "avcd/core.hpp"

namespace avcd {

struct AvcdCoefficients {
  double original;
  double video_masked;
  double audio_masked;
  double both_masked;
};

/// (2+av+aa, 1-av+aa, 1+av-aa, -(av+aa)). The four always sum to 4.
AvcdCoefficients avcd_coefficients(double alpha_v, double alpha_a);

/// Original logits plus masked variants keyed by mask label.
struct CombineInputs {
  Logits original;
  std::map<std::string, Logits> variants;

  const Logits& variant(const std::string& label) const;
};

/// Trimodal combination over the labels "V", "A" and "A+V". The coefficient
/// 1-av+aa multiplies the video-masked logits, 1+av-aa the audio-masked ones.
Logits combine_trimodal(const CombineInputs& inputs, double alpha_v, double alpha_a);

/// The same combination over two arbitrary non-dominant modalities x and y:
/// (2+ax+ay)*orig + (1-ax+ay)*x_masked + (1+ax-ay)*y_masked - (ax+ay)*both.
/// Swapping (x, ax) with (y, ay) leaves the result unchanged.
Logits combine_trimodal(std::span<const double> original, std::span<const double> x_masked,
                        std::span<const double> y_masked, std::span<const double> both_masked,
                        double alpha_x, double alpha_y);

/// (1+alpha)*original - alpha*masked.
Logits combine_bimodal(std::span<const double> original, std::span<const double> masked,
                       double alpha);

/// (1+3a)*original - a*(V + A + A+V): each masked variant contrasted
/// independently against the original.
Logits combine_naive_trimodal(const CombineInputs& inputs, double alpha);
Logits combine_naive_trimodal(std::span<const double> original, std::span<const double> x_masked,
                              std::span<const double> y_masked,
                              std::span<const double> both_masked, double alpha);

/// Replaces with kNegInf every entry whose original probability is below
/// beta * max(original_probs).
Logits apply_plausibility(std::span<const double> combined, std::span<const double> original_probs,
                          double beta);

struct GateDecision {
  bool skip;
  double entropy;
};

/// skip = H(softmax(original_logits)) < tau.
GateDecision entropy_gate(std::span<const double> original_logits, double tau);

enum class Strategy { kGreedy, kSample };

/// Greedy takes argmax_tiebreak; sample draws from softmax(constrained) by
/// inverse CDF on one rng.uniform() draw.
TokenId sample_token(std::span<const double> constrained, Strategy strategy, SplitMix64& rng);

}  // namespace avcd
