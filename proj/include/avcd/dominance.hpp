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

// Modality dominance from last-query attention, and attentive masks over the
// non-dominant modalities.

#pragma once

#include <string>
#include <vector>

#include "avcd/provider.hpp"

namespace avcd {

struct DominanceScores {
  /// Indexed like layout.spans().
  std::vector<std::string> modalities;
  std::vector<double> score;
  /// per_layer[j][m] is the attention mass of modality m at layer j.
  std::vector<std::vector<double>> per_layer;
  /// Modality names by descending score; ties go to the lower span start.
  std::vector<std::string> ordering;

  const std::string& dominant() const { return ordering.front(); }
  double of(const std::string& modality) const;
};

/// D^j_M is the attention mass on M's span at layer j; D_M is its mean over
/// all layers.
DominanceScores dominance_scores(const AttentionSnapshot& attention, const ModalityLayout& layout);

/// Elementwise mean of the rows selected by `policy`. When the policy selects
/// no layer (a single-layer snapshot under all-but-last) every row is used.
std::vector<double> mean_attention_per_token(const AttentionSnapshot& attention,
                                             const LayerPolicy& policy = LayerPolicy::all_but_last());

/// ceil(P/100 * span_size), the number of positions masked per modality.
std::size_t masked_count(double mask_ratio, std::size_t span_size);

struct LabeledMask {
  std::string label;
  std::vector<std::string> modalities;  // masked modality names
  MaskSpec mask;
};

/// Masks the top ceil(P% * |span|) mean-attention positions of each
/// non-dominant modality (ties to the lower index). Three modalities give
/// {m1}, {m2}, {m1, m2}; two give {m}. Empty non-dominant spans are dropped,
/// so a trimodal layout with one empty span yields a single mask and a layout
/// whose non-dominant spans are all empty yields none.
std::vector<LabeledMask> build_attentive_masks(std::span<const double> mean_attention,
                                               const ModalityLayout& layout,
                                               const DominanceScores& dominance,
                                               double mask_ratio);

/// Same, with the non-dominant modalities taken in layout order.
std::vector<LabeledMask> build_attentive_masks(std::span<const double> mean_attention,
                                               const ModalityLayout& layout,
                                               const std::string& dominant, double mask_ratio);

/// Top-P% positions of one modality's span.
std::vector<std::size_t> top_attention_indices(std::span<const double> mean_attention,
                                               const ModalitySpan& span, double mask_ratio);

}  // namespace avcd
