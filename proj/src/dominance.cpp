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

#include "avcd/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace avcd {

double DominanceScores::of(const std::string& modality) const {
  for (std::size_t m = 0; m < modalities.size(); ++m) {
    if (modalities[m] == modality) return score[m];
  }
  fail(ErrorCode::kInvalidArgument, "no dominance score for '" + modality + "'");
}

DominanceScores dominance_scores(const AttentionSnapshot& attention, const ModalityLayout& layout) {
  require(attention.layers() >= 1, ErrorCode::kInvalidArgument,
          "dominance: attention snapshot has no layers");
  const auto& spans = layout.spans();
  DominanceScores out;
  out.score.assign(spans.size(), 0.0);
  for (const auto& s : spans) out.modalities.push_back(s.name);

  for (const auto& row : attention.rows) {
    std::vector<double> layer(spans.size(), 0.0);
    for (std::size_t m = 0; m < spans.size(); ++m) {
      for (std::size_t i = spans[m].begin; i < std::min(spans[m].end, row.size()); ++i) {
        layer[m] += row[i];
      }
      out.score[m] += layer[m];
    }
    out.per_layer.push_back(std::move(layer));
  }
  const double J = static_cast<double>(attention.layers());
  for (double& s : out.score) s /= J;

  std::vector<std::size_t> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out.score[a] != out.score[b]) return out.score[a] > out.score[b];
    return spans[a].begin < spans[b].begin;
  });
  for (std::size_t m : order) out.ordering.push_back(spans[m].name);
  return out;
}

std::vector<double> mean_attention_per_token(const AttentionSnapshot& attention,
                                             const LayerPolicy& policy) {
  const std::size_t J = attention.layers();
  require(J >= 1, ErrorCode::kInvalidArgument, "mean attention: snapshot has no layers");
  std::vector<std::size_t> selected;
  for (std::size_t j = 0; j < J; ++j) {
    if (policy.covers(j, J)) selected.push_back(j);
  }
  if (selected.empty()) {
    selected.resize(J);
    std::iota(selected.begin(), selected.end(), 0);
  }
  std::vector<double> mean(attention.keys(), 0.0);
  for (std::size_t j : selected) {
    require(attention.rows[j].size() == mean.size(), ErrorCode::kShapeMismatch,
            "mean attention: ragged snapshot");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += attention.rows[j][i];
  }
  for (double& x : mean) x /= static_cast<double>(selected.size());
  return mean;
}

std::size_t masked_count(double mask_ratio, std::size_t span_size) {
  require(mask_ratio > 0.0 && mask_ratio <= 100.0, ErrorCode::kInvalidArgument,
          "mask ratio must be in (0, 100]");
  if (span_size == 0) return 0;
  // The epsilon absorbs rounding in P*n/100 when the exact value is integral.
  const double exact = mask_ratio * static_cast<double>(span_size) / 100.0;
  auto count = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  return std::clamp<std::size_t>(count, 1, span_size);
}

std::vector<std::size_t> top_attention_indices(std::span<const double> mean_attention,
                                               const ModalitySpan& span, double mask_ratio) {
  const std::size_t n = masked_count(mask_ratio, span.size());
  require(span.end <= mean_attention.size(), ErrorCode::kShapeMismatch,
          "span '" + span.name + "' extends past the attention row");
  std::vector<std::size_t> idx(span.size());
  std::iota(idx.begin(), idx.end(), span.begin);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return mean_attention[a] > mean_attention[b];
  });
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

std::vector<LabeledMask> masks_for(std::span<const double> mean_attention,
                                   const ModalityLayout& layout,
                                   const std::vector<std::string>& non_dominant,
                                   double mask_ratio) {
  std::vector<std::vector<std::size_t>> picked;
  std::vector<std::string> names;
  for (const auto& name : non_dominant) {
    const auto& span = layout.span(name);
    if (span.size() == 0) continue;
    picked.push_back(top_attention_indices(mean_attention, span, mask_ratio));
    names.push_back(name);
  }

  std::vector<LabeledMask> out;
  auto push = [&](std::vector<std::size_t> indices, std::vector<std::string> modalities) {
    MaskSpec mask(std::move(indices), LayerPolicy::all_but_last());
    out.push_back({canonical_mask_label(mask, layout), std::move(modalities), std::move(mask)});
  };
  for (std::size_t i = 0; i < picked.size(); ++i) push(picked[i], {names[i]});
  if (picked.size() == 2) {
    std::vector<std::size_t> both = picked[0];
    both.insert(both.end(), picked[1].begin(), picked[1].end());
    push(std::move(both), names);
  }
  return out;
}

}  // namespace

std::vector<LabeledMask> build_attentive_masks(std::span<const double> mean_attention,
                                               const ModalityLayout& layout,
                                               const DominanceScores& dominance,
                                               double mask_ratio) {
  std::vector<std::string> rest(dominance.ordering.begin() + 1, dominance.ordering.end());
  return masks_for(mean_attention, layout, rest, mask_ratio);
}

std::vector<LabeledMask> build_attentive_masks(std::span<const double> mean_attention,
                                               const ModalityLayout& layout,
                                               const std::string& dominant, double mask_ratio) {
  require(layout.has(dominant), ErrorCode::kInvalidArgument,
          "dominant modality '" + dominant + "' not in layout");
  std::vector<std::string> rest;
  for (const auto& s : layout.spans()) {
    if (s.name != dominant) rest.push_back(s.name);
  }
  return masks_for(mean_attention, layout, rest, mask_ratio);
}

}  // namespace avcd
