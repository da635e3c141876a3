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

#include "avcd/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

namespace avcd {

namespace {

std::vector<double> draw(SplitMix64& rng, std::size_t count, double stddev) {
  const double a = std::sqrt(3.0) * stddev;
  std::vector<double> w(count);
  for (double& x : w) x = rng.uniform(-a, a);
  return w;
}

void layer_norm(std::span<const double> in, std::span<double> out) {
  const double n = static_cast<double>(in.size());
  double mean = 0.0;
  for (double x : in) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : in) var += (x - mean) * (x - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + 1e-5);
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = (in[i] - mean) * inv;
}

// out[cols] = in[rows] * w[rows x cols]
void matvec(std::span<const double> in, const std::vector<double>& w, std::size_t cols,
            std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < in.size(); ++r) {
    const double x = in[r];
    const double* row = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += x * row[c];
  }
}

double gelu(double x) {
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}

void fnv1a(std::uint64_t& h, const std::vector<double>& v) {
  for (double x : v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &x, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001B3ULL;
    }
  }
}

}  // namespace

ModalityLayout default_trimodal_layout() {
  return ModalityLayout({{"video", 0, 8}, {"audio", 8, 16}, {"language", 16, 24}}, 24);
}

ModalityLayout default_bimodal_layout() {
  return ModalityLayout({{"video", 0, 12}, {"language", 12, 20}}, 20);
}

void ToyModelConfig::validate() const {
  require(vocab_size >= 2, ErrorCode::kInvalidArgument, "toy model: vocab_size must be >= 2");
  require(embed_dim > 0 && heads > 0 && embed_dim % heads == 0, ErrorCode::kInvalidArgument,
          "toy model: embed_dim must be a positive multiple of heads");
  require(layers >= 2, ErrorCode::kInvalidArgument, "toy model: layers must be >= 2");
  require(layout.total_tokens() <= context_length, ErrorCode::kInvalidArgument,
          "toy model: layout longer than context length");
  require(std::isfinite(output_scale) && output_scale > 0.0, ErrorCode::kInvalidArgument,
          "toy model: output_scale must be positive");
}

ToyModel::ToyModel(ToyModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t v = config_.vocab_size;
  const std::size_t d = config_.embed_dim;
  const std::size_t hidden = 4 * d;
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));

  SplitMix64 rng(config_.seed);
  token_embedding_ = draw(rng, v * d, 1.0);
  position_embedding_ = draw(rng, config_.context_length * d, 0.5);
  layers_.resize(config_.layers);
  for (auto& layer : layers_) {
    layer.wq = draw(rng, d * d, sd);
    layer.wk = draw(rng, d * d, sd);
    layer.wv = draw(rng, d * d, sd);
    layer.wo = draw(rng, d * d, sd);
    layer.w1 = draw(rng, d * hidden, sd);
    layer.w2 = draw(rng, hidden * d, 1.0 / std::sqrt(static_cast<double>(hidden)));
  }
  unembedding_ = draw(rng, d * v, config_.output_scale * sd);
}

std::uint64_t ToyModel::checksum() const noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  fnv1a(h, token_embedding_);
  fnv1a(h, position_embedding_);
  for (const auto& layer : layers_) {
    fnv1a(h, layer.wq);
    fnv1a(h, layer.wk);
    fnv1a(h, layer.wv);
    fnv1a(h, layer.wo);
    fnv1a(h, layer.w1);
    fnv1a(h, layer.w2);
  }
  fnv1a(h, unembedding_);
  return h;
}

ForwardResponse ToyModel::forward(const Prefix& prefix, const MaskSpec* mask) const {
  return run(prefix, mask, nullptr);
}

ForwardResponse ToyModel::forward_corrupted(const Prefix& prefix, std::string_view modality,
                                            double sigma, std::uint64_t noise_seed) const {
  const auto& span = config_.layout.span(modality);
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::kInvalidArgument,
          "gaussian corruption: sigma must be positive");
  const std::size_t d = config_.embed_dim;
  std::vector<double> noise(prefix.size() * d, 0.0);
  SplitMix64 rng(noise_seed);
  for (std::size_t t = span.begin; t < std::min(span.end, prefix.size()); ++t) {
    for (std::size_t c = 0; c < d; ++c) noise[t * d + c] = sigma * rng.normal();
  }
  return run(prefix, nullptr, &noise);
}

ForwardResponse ToyModel::run(const Prefix& prefix, const MaskSpec* mask,
                              const std::vector<double>* input_noise) const {
  const std::size_t T = prefix.size();
  const std::size_t d = config_.embed_dim;
  const std::size_t v = config_.vocab_size;
  const std::size_t nh = config_.heads;
  const std::size_t hd = d / nh;
  const std::size_t hidden = 4 * d;
  const std::size_t J = config_.layers;
  require(T > 0, ErrorCode::kInvalidArgument, "toy model: empty prefix");
  require(T <= config_.context_length, ErrorCode::kInvalidArgument,
          "toy model: prefix length " + std::to_string(T) + " exceeds context length " +
              std::to_string(config_.context_length));

  if (mask) {
    for (std::size_t j = 0; j < J; ++j) {
      if (mask->layer_policy().covers(j, J) && mask->key_indices().size() >= T) {
        fail(ErrorCode::kFullyMasked, "fully masked context");
      }
    }
  }

  std::vector<double> x(T * d);
  for (std::size_t t = 0; t < T; ++t) {
    require(prefix[t].value < v, ErrorCode::kInvalidArgument, "toy model: token out of range");
    for (std::size_t c = 0; c < d; ++c) {
      x[t * d + c] = token_embedding_[prefix[t].value * d + c] + position_embedding_[t * d + c];
      if (input_noise) x[t * d + c] += (*input_noise)[t * d + c];
    }
  }

  ForwardResponse response;
  response.attention.rows.assign(J, std::vector<double>(T, 0.0));

  std::vector<double> h(T * d), q(T * d), k(T * d), val(T * d), ctx(T * d);
  std::vector<double> scores(T), proj(d), ff(hidden);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  for (std::size_t j = 0; j < J; ++j) {
    const Layer& layer = layers_[j];
    const bool masked_layer = mask && mask->layer_policy().covers(j, J);

    for (std::size_t t = 0; t < T; ++t) {
      std::span<const double> xt(x.data() + t * d, d);
      std::span<double> ht(h.data() + t * d, d);
      layer_norm(xt, ht);
      matvec(ht, layer.wq, d, std::span<double>(q.data() + t * d, d));
      matvec(ht, layer.wk, d, std::span<double>(k.data() + t * d, d));
      matvec(ht, layer.wv, d, std::span<double>(val.data() + t * d, d));
    }

    std::fill(ctx.begin(), ctx.end(), 0.0);
    for (std::size_t head = 0; head < nh; ++head) {
      const std::size_t off = head * hd;
      for (std::size_t t = 0; t < T; ++t) {
        double max = kNegInf;
        for (std::size_t s = 0; s <= t; ++s) {
          if (masked_layer && mask->masks(s)) {
            scores[s] = kNegInf;
            continue;
          }
          double dot = 0.0;
          for (std::size_t c = 0; c < hd; ++c) dot += q[t * d + off + c] * k[s * d + off + c];
          scores[s] = dot * scale;
          max = std::max(max, scores[s]);
        }
        if (max == kNegInf) continue;  // no visible key
        double sum = 0.0;
        for (std::size_t s = 0; s <= t; ++s) {
          scores[s] = is_sentinel(scores[s]) ? 0.0 : std::exp(scores[s] - max);
          sum += scores[s];
        }
        for (std::size_t s = 0; s <= t; ++s) {
          const double w = scores[s] / sum;
          if (w == 0.0) continue;
          for (std::size_t c = 0; c < hd; ++c) ctx[t * d + off + c] += w * val[s * d + off + c];
          if (t + 1 == T) response.attention.rows[j][s] += w / static_cast<double>(nh);
        }
      }
    }

    for (std::size_t t = 0; t < T; ++t) {
      matvec(std::span<const double>(ctx.data() + t * d, d), layer.wo, d, proj);
      for (std::size_t c = 0; c < d; ++c) x[t * d + c] += proj[c];
    }
    for (std::size_t t = 0; t < T; ++t) {
      std::span<double> ht(h.data() + t * d, d);
      layer_norm(std::span<const double>(x.data() + t * d, d), ht);
      matvec(ht, layer.w1, hidden, ff);
      for (double& f : ff) f = gelu(f);
      matvec(ff, layer.w2, d, proj);
      for (std::size_t c = 0; c < d; ++c) x[t * d + c] += proj[c];
    }
  }

  std::vector<double> last(d);
  layer_norm(std::span<const double>(x.data() + (T - 1) * d, d), last);
  response.logits.assign(v, 0.0);
  matvec(last, unembedding_, v, response.logits);
  return response;
}

ToyProvider::ToyProvider(std::shared_ptr<const ToyModel> model) : model_(std::move(model)) {
  require(model_ != nullptr, ErrorCode::kInvalidArgument, "toy provider: null model");
  const auto& cfg = model_->config();
  descriptor_.vocab_size = cfg.vocab_size;
  descriptor_.layer_count = cfg.layers;
  descriptor_.layout = cfg.layout;
  descriptor_.name = "toy-seed-" + std::to_string(cfg.seed);
}

ForwardResponse ToyProvider::do_forward(const Prefix& prefix, const MaskSpec* mask) {
  return model_->forward(prefix, mask);
}

ForwardResponse gaussian_corrupt_forward(const ToyModel& model, const Prefix& prefix,
                                         std::string_view modality, double sigma,
                                         std::uint64_t noise_seed) {
  return model.forward_corrupted(prefix, modality, sigma, noise_seed);
}

}  // namespace avcd
