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

// Independent checks of the decoding math: a literal per-modality expansion of
// the trimodal combination, the log-of-mean approximation study, the intact /
// corrupted state mixture, and the masking-versus-noise divergence diagnostic.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avcd/toy_model.hpp"

namespace avcd::oracle {

/// Log-probability vectors for the four masking states. "va" is intact, "nv"
/// means video masked, "na" audio masked.
struct FourStateLogProbs {
  Logits va;    // video intact, audio intact
  Logits v_na;  // video intact, audio masked
  Logits nv_a;  // video masked, audio intact
  Logits nv_na; // both masked
};

/// Video-domain contrast (1+av)(va + v_na) - av(nv_a + nv_na) plus the
/// audio-domain contrast (1+aa)(va + nv_a) - aa(v_na + nv_na), each built
/// term by term.
Logits oracle_avcd(const FourStateLogProbs& in, double alpha_v, double alpha_a);

struct TaylorSample {
  double a = 0.0;
  double b = 0.0;
  double mean = 0.0;   // (a+b)/2
  double delta = 0.0;  // (a-b)/2
  double exact = 0.0;  // log((a+b)/2)
  double approx = 0.0; // (log a + log b)/2
  double error = 0.0;  // |exact - approx|
  double predicted = 0.0;  // delta^2 / (2 mean^2)
};

TaylorSample taylor_error(double a, double b);

struct TaylorStudy {
  std::size_t samples = 0;
  double fitted_order = 0.0;
  double intercept = 0.0;
  double halving_ratio = 0.0;  // mean error at delta / mean error at delta/2
  double min_relative_delta = 0.0;
  double max_relative_delta = 0.0;
};

/// Draws mean uniform on [0.5, 2] and delta/mean uniform on
/// [delta_max/100, delta_max], then fits log(error) = c + k*log(delta/mean)
/// by least squares; k is fitted_order.
TaylorStudy taylor_scaling_study(std::size_t num_samples, std::uint64_t seed,
                                 double delta_max = 0.1);

/// Same fit over caller-supplied (mean, delta) pairs. Throws when fewer than
/// two distinct nonzero relative deltas are present.
TaylorStudy taylor_fit(const std::vector<std::pair<double, double>>& mean_delta);

/// Uniform 1/2 mixture of the intact and corrupted state distributions.
Probs marginalize_states(std::span<const double> p_intact, std::span<const double> p_corrupt);

struct KlDiagnosticConfig {
  std::string modality = "video";
  double mask_ratio = 50.0;
  double sigma = 1.0;
  std::uint64_t noise_seed = 1234;
  std::size_t threads = 0;  // 0 picks hardware concurrency
};

struct KlDiagnostic {
  std::vector<double> kl_mask;
  std::vector<double> kl_noise;
  double mean_kl_mask = 0.0;
  double mean_kl_noise = 0.0;
};

/// For every prompt: KL(p_original || p_masked), where the top mask_ratio% of
/// the modality's positions by all-but-last mean attention are masked, and
/// KL(p_original || p_noised) with Gaussian noise on the same modality's
/// input embeddings. Prompt i uses noise seed noise_seed + i.
KlDiagnostic kl_masking_vs_noise(const ToyModel& model, const std::vector<Prefix>& prompts,
                                 const KlDiagnosticConfig& config);

/// Seeded random prompts of the layout's length.
std::vector<Prefix> random_prompts(std::size_t count, std::size_t length, std::size_t vocab_size,
                                   std::uint64_t seed);

}  // namespace avcd::oracle
