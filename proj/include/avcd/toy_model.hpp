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

// A tiny seeded decoder-only transformer with attention-level key masking.
//
// Weights are never trained. They are drawn from one SplitMix64 stream seeded
// with `seed`, in this order, each entry uniform on [-sqrt(3)*s, sqrt(3)*s]
// (variance s^2), matrices row-major:
//
//   token_embedding    [V x d]        s = 1
//   position_embedding [ctx x d]      s = 0.5
//   per layer: Wq, Wk, Wv, Wo [d x d] s = 1/sqrt(d)
//              W1 [d x 4d]            s = 1/sqrt(d)
//              W2 [4d x d]            s = 1/sqrt(4d)
//   unembedding        [d x V]        s = output_scale/sqrt(d)
//
// Blocks are pre-norm (parameter-free layer norm, eps 1e-5), causal
// multi-head attention followed by a tanh-GELU MLP, both residual. A mask
// removes the masked key columns for every query at each covered layer; a
// query left with no visible key contributes a zero attention output.

#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "avcd/provider.hpp"

namespace avcd {

struct ToyModelConfig {
  std::size_t vocab_size = 64;
  std::size_t embed_dim = 32;
  std::size_t layers = 4;
  std::size_t heads = 2;
  std::size_t context_length = 64;
  double output_scale = 6.0;
  ModalityLayout layout;
  std::uint64_t seed = 7;

  void validate() const;
};

/// The default trimodal layout: 8 video, 8 audio, 8 language positions.
ModalityLayout default_trimodal_layout();
/// Video-language layout: 12 video, 8 language positions.
ModalityLayout default_bimodal_layout();

class ToyModel {
 public:
  explicit ToyModel(ToyModelConfig config);

  const ToyModelConfig& config() const noexcept { return config_; }

  /// FNV-1a over the raw bytes of every weight, in initialization order.
  std::uint64_t checksum() const noexcept;

  ForwardResponse forward(const Prefix& prefix, const MaskSpec* mask) const;

  /// Adds seeded N(0, sigma^2) noise to the input embeddings of `modality`'s
  /// positions, then runs an unmasked forward pass.
  ForwardResponse forward_corrupted(const Prefix& prefix, std::string_view modality,
                                    double sigma, std::uint64_t noise_seed) const;

 private:
  struct Layer {
    std::vector<double> wq, wk, wv, wo, w1, w2;
  };

  ForwardResponse run(const Prefix& prefix, const MaskSpec* mask,
                      const std::vector<double>* input_noise) const;

  ToyModelConfig config_;
  std::vector<double> token_embedding_;
  std::vector<double> position_embedding_;
  std::vector<Layer> layers_;
  std::vector<double> unembedding_;
};

class ToyProvider final : public Provider {
 public:
  explicit ToyProvider(std::shared_ptr<const ToyModel> model);

  const ProviderDescriptor& descriptor() const override { return descriptor_; }
  const ToyModel& model() const noexcept { return *model_; }

 protected:
  ForwardResponse do_forward(const Prefix& prefix, const MaskSpec* mask) override;

 private:
  std::shared_ptr<const ToyModel> model_;
  ProviderDescriptor descriptor_;
};

ForwardResponse gaussian_corrupt_forward(const ToyModel& model, const Prefix& prefix,
                                         std::string_view modality, double sigma,
                                         std::uint64_t noise_seed);

}  // namespace avcd
