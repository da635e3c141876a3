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

#include "avcd/provider.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace avcd {

LayerPolicy LayerPolicy::explicit_layers(std::vector<std::size_t> layers) {
  std::sort(layers.begin(), layers.end());
  layers.erase(std::unique(layers.begin(), layers.end()), layers.end());
  return {Kind::kExplicit, std::move(layers)};
}

bool LayerPolicy::covers(std::size_t layer, std::size_t layer_count) const noexcept {
  switch (kind) {
    case Kind::kAll: return layer < layer_count;
    case Kind::kAllButLast: return layer + 1 < layer_count;
    case Kind::kExplicit: return std::binary_search(layers.begin(), layers.end(), layer);
  }
  return false;
}

MaskSpec::MaskSpec(std::vector<std::size_t> key_indices, LayerPolicy policy)
    : key_indices_(std::move(key_indices)), policy_(std::move(policy)) {
  std::sort(key_indices_.begin(), key_indices_.end());
  key_indices_.erase(std::unique(key_indices_.begin(), key_indices_.end()), key_indices_.end());
}

bool MaskSpec::masks(std::size_t position) const noexcept {
  return std::binary_search(key_indices_.begin(), key_indices_.end(), position);
}

std::string canonical_mask_label(const MaskSpec& mask, const ModalityLayout& layout) {
  if (mask.empty()) return "none";
  std::set<std::string> labels;
  for (std::size_t idx : mask.key_indices()) {
    auto m = layout.modality_of(idx);
    require(m.has_value(), ErrorCode::kInvalidArgument,
            "mask index " + std::to_string(idx) + " is not inside any modality span");
    labels.insert(modality_label(layout.spans()[*m].name));
  }
  std::string out;
  for (const auto& l : labels) {
    if (!out.empty()) out += '+';
    out += l;
  }
  return out;
}

std::string format_prefix(const Prefix& prefix) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i) os << ',';
    os << prefix[i].value;
  }
  os << ']';
  return os.str();
}

void validate_request(const ProviderDescriptor& desc, const ForwardRequest& request) {
  require(!request.prefix.empty(), ErrorCode::kInvalidArgument, "prefix must be non-empty");
  for (TokenId t : request.prefix) {
    require(t.value < desc.vocab_size, ErrorCode::kInvalidArgument,
            "token " + std::to_string(t.value) + " outside vocabulary of size " +
                std::to_string(desc.vocab_size));
  }
  if (!request.mask) return;
  for (std::size_t idx : request.mask->key_indices()) {
    require(idx < request.prefix.size(), ErrorCode::kInvalidArgument,
            "mask index " + std::to_string(idx) + " beyond prefix length " +
                std::to_string(request.prefix.size()));
  }
  for (std::size_t layer : request.mask->layer_policy().layers) {
    require(layer < desc.layer_count, ErrorCode::kInvalidArgument,
            "mask layer " + std::to_string(layer) + " beyond layer count " +
                std::to_string(desc.layer_count));
  }
}

void validate_response(const ProviderDescriptor& desc, std::size_t prefix_len,
                       const ForwardResponse& response) {
  require(response.logits.size() == desc.vocab_size, ErrorCode::kShapeMismatch,
          "response has " + std::to_string(response.logits.size()) + " logits, expected " +
              std::to_string(desc.vocab_size));
  for (double x : response.logits) {
    require(std::isfinite(x), ErrorCode::kShapeMismatch, "response logits must be finite");
  }
  require(response.attention.layers() == desc.layer_count, ErrorCode::kShapeMismatch,
          "response has " + std::to_string(response.attention.layers()) +
              " attention rows, expected " + std::to_string(desc.layer_count));
  for (const auto& row : response.attention.rows) {
    require(row.size() == prefix_len, ErrorCode::kShapeMismatch,
            "attention row has " + std::to_string(row.size()) + " keys, expected " +
                std::to_string(prefix_len));
    require(is_probability_vector(row, 1e-6), ErrorCode::kShapeMismatch,
            "attention row is not a probability vector");
  }
}

ForwardResponse Provider::forward(const ForwardRequest& request) {
  const auto& desc = descriptor();
  validate_request(desc, request);
  const MaskSpec* mask = (request.mask && !request.mask->empty()) ? &*request.mask : nullptr;
  ForwardResponse response = do_forward(request.prefix, mask);
  validate_response(desc, request.prefix.size(), response);
  ++calls_;
  return response;
}

ScriptedProvider::ScriptedProvider(ScriptedScenario scenario) : scenario_(std::move(scenario)) {
  const auto& desc = scenario_.descriptor;
  require(desc.vocab_size > 0 && desc.layer_count > 0, ErrorCode::kInvalidArgument,
          "scripted descriptor needs vocab_size > 0 and layers > 0");
  for (const auto& [key, entry] : scenario_.table) {
    require(entry.logits.size() == desc.vocab_size, ErrorCode::kShapeMismatch,
            "scripted entry " + format_prefix(key.first) + "/" + key.second +
                " has wrong logit length");
  }
}

ForwardResponse ScriptedProvider::do_forward(const Prefix& prefix, const MaskSpec* mask) {
  const std::string label =
      mask ? canonical_mask_label(*mask, scenario_.descriptor.layout) : std::string("none");
  auto it = scenario_.table.find({prefix, label});
  require(it != scenario_.table.end(), ErrorCode::kUnscriptedState,
          "unscripted state: prefix " + format_prefix(prefix) + " mask " + label);

  ForwardResponse response;
  response.logits = it->second.logits;
  if (it->second.attention) {
    response.attention = *it->second.attention;
  } else {
    response.attention = scenario_.default_attention;
    for (auto& row : response.attention.rows) {
      require(row.size() <= prefix.size(), ErrorCode::kShapeMismatch,
              "default attention longer than prefix " + format_prefix(prefix));
      row.resize(prefix.size(), 0.0);
    }
  }
  return response;
}

RecordingProvider::RecordingProvider(Provider& inner) : inner_(inner) {
  recorded_.descriptor = inner_.descriptor();
}

ForwardResponse RecordingProvider::do_forward(const Prefix& prefix, const MaskSpec* mask) {
  ForwardRequest request{prefix, mask ? std::optional<MaskSpec>(*mask) : std::nullopt};
  ForwardResponse response = inner_.forward(request);
  const std::string label =
      mask ? canonical_mask_label(*mask, recorded_.descriptor.layout) : std::string("none");
  recorded_.table[{prefix, label}] = ScriptedEntry{response.logits, response.attention};
  return response;
}

}  // namespace avcd
