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

#include "avcd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "avcd/dominance.hpp"

namespace avcd::oracle {

Logits oracle_avcd(const FourStateLogProbs& in, double alpha_v, double alpha_a) {
  const std::size_t n = in.va.size();
  require(in.v_na.size() == n && in.nv_a.size() == n && in.nv_na.size() == n,
          ErrorCode::kShapeMismatch, "oracle_avcd: length mismatch");
  Logits out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double logit_video =
        (1.0 + alpha_v) * (in.va[i] + in.v_na[i]) - alpha_v * (in.nv_a[i] + in.nv_na[i]);
    const double logit_audio =
        (1.0 + alpha_a) * (in.va[i] + in.nv_a[i]) - alpha_a * (in.v_na[i] + in.nv_na[i]);
    out[i] = logit_video + logit_audio;
  }
  return out;
}

TaylorSample taylor_error(double a, double b) {
  require(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b),
          ErrorCode::kInvalidArgument, "taylor_error: inputs must be positive");
  TaylorSample s;
  s.a = a;
  s.b = b;
  s.mean = 0.5 * (a + b);
  s.delta = 0.5 * (a - b);
  s.exact = std::log(s.mean);
  s.approx = 0.5 * (std::log(a) + std::log(b));
  s.error = std::abs(s.exact - s.approx);
  s.predicted = s.delta * s.delta / (2.0 * s.mean * s.mean);
  return s;
}

TaylorStudy taylor_fit(const std::vector<std::pair<double, double>>& mean_delta) {
  std::vector<double> xs, ys;
  std::set<double> distinct;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (auto [mean, delta] : mean_delta) {
    const double r = std::abs(delta) / mean;
    if (r == 0.0) continue;
    const auto s = taylor_error(mean + delta, mean - delta);
    if (s.error <= 0.0) continue;
    xs.push_back(std::log(r));
    ys.push_back(std::log(s.error));
    distinct.insert(r);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  require(distinct.size() >= 2, ErrorCode::kInvalidArgument,
          "taylor study: degenerate sample set (need two distinct nonzero deltas)");

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }

  TaylorStudy study;
  study.samples = xs.size();
  study.fitted_order = sxy / sxx;
  study.intercept = my - study.fitted_order * mx;
  study.min_relative_delta = lo;
  study.max_relative_delta = hi;

  double full = 0.0, half = 0.0;
  for (auto [mean, delta] : mean_delta) {
    full += taylor_error(mean + delta, mean - delta).error;
    half += taylor_error(mean + 0.5 * delta, mean - 0.5 * delta).error;
  }
  study.halving_ratio = half > 0.0 ? full / half : 0.0;
  return study;
}

TaylorStudy taylor_scaling_study(std::size_t num_samples, std::uint64_t seed, double delta_max) {
  require(num_samples >= 100, ErrorCode::kInvalidArgument,
          "taylor study: need at least 100 samples");
  require(delta_max > 0.0 && delta_max < 1.0, ErrorCode::kInvalidArgument,
          "taylor study: delta_max must be in (0, 1)");
  SplitMix64 rng(seed);
  std::vector<std::pair<double, double>> samples;
  samples.reserve(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const double mean = rng.uniform(0.5, 2.0);
    const double rel = rng.uniform(delta_max / 100.0, delta_max);
    samples.emplace_back(mean, rel * mean);
  }
  return taylor_fit(samples);
}

Probs marginalize_states(std::span<const double> p_intact, std::span<const double> p_corrupt) {
  require(p_intact.size() == p_corrupt.size(), ErrorCode::kShapeMismatch,
          "marginalize_states: length mismatch");
  Probs out(p_intact.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * p_intact[i] + 0.5 * p_corrupt[i];
  return out;
}

KlDiagnostic kl_masking_vs_noise(const ToyModel& model, const std::vector<Prefix>& prompts,
                                 const KlDiagnosticConfig& config) {
  require(!prompts.empty(), ErrorCode::kInvalidArgument, "kl diagnostic: no prompts");
  const auto& span = model.config().layout.span(config.modality);
  require(span.size() > 0, ErrorCode::kInvalidArgument,
          "kl diagnostic: modality '" + config.modality + "' has an empty span");
  masked_count(config.mask_ratio, span.size());  // validates the ratio

  KlDiagnostic out;
  out.kl_mask.assign(prompts.size(), 0.0);
  out.kl_noise.assign(prompts.size(), 0.0);

  auto one = [&](std::size_t i) {
    const Prefix& prompt = prompts[i];
    const ForwardResponse base = model.forward(prompt, nullptr);
    const Probs p = softmax(base.logits);
    const auto mean_attention = mean_attention_per_token(base.attention);
    MaskSpec mask(top_attention_indices(mean_attention, span, config.mask_ratio));
    const Probs p_mask = softmax(model.forward(prompt, &mask).logits);
    const Probs p_noise =
        softmax(model.forward_corrupted(prompt, config.modality, config.sigma,
                                        config.noise_seed + i).logits);
    out.kl_mask[i] = kl_divergence(p, p_mask);
    out.kl_noise[i] = kl_divergence(p, p_noise);
  };

  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, prompts.size());
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < prompts.size(); i += threads) {
          try {
            one(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  for (std::size_t i = 0; i < prompts.size(); ++i) {
    out.mean_kl_mask += out.kl_mask[i];
    out.mean_kl_noise += out.kl_noise[i];
  }
  out.mean_kl_mask /= static_cast<double>(prompts.size());
  out.mean_kl_noise /= static_cast<double>(prompts.size());
  return out;
}

std::vector<Prefix> random_prompts(std::size_t count, std::size_t length, std::size_t vocab_size,
                                   std::uint64_t seed) {
  require(length > 0 && vocab_size > 0, ErrorCode::kInvalidArgument,
          "random_prompts: length and vocab_size must be positive");
  SplitMix64 rng(seed);
  std::vector<Prefix> out(count, Prefix(length));
  for (auto& p : out) {
    for (auto& t : p) t = TokenId(rng.below(static_cast<std::uint32_t>(vocab_size)));
  }
  return out;
}

}  // namespace avcd::oracle
