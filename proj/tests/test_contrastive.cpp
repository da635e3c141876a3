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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "avcd/contrastive.hpp"
#include "avcd/error.hpp"
#include "avcd/oracle.hpp"
#include "support.hpp"

using namespace avcd;
using avcd::testing::random_vector;

namespace {

CombineInputs inputs(Logits o, Logits v, Logits a, Logits av) {
  return {std::move(o), {{"V", std::move(v)}, {"A", std::move(a)}, {"A+V", std::move(av)}}};
}

void check_vec(const Logits& got, const Logits& want, double tol = 1e-12) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

}  // namespace

TEST_CASE("avcd coefficients") {
  auto c = avcd_coefficients(0, 0);
  CHECK(c.original == 2);
  CHECK(c.video_masked == 1);
  CHECK(c.audio_masked == 1);
  CHECK(c.both_masked == 0);

  c = avcd_coefficients(0.5, 0.5);
  CHECK(c.original == 3);
  CHECK(c.video_masked == 1);
  CHECK(c.audio_masked == 1);
  CHECK(c.both_masked == -1);

  c = avcd_coefficients(2.5, 2.5);
  CHECK(c.original == 7);
  CHECK(c.video_masked == 1);
  CHECK(c.audio_masked == 1);
  CHECK(c.both_masked == -5);

  c = avcd_coefficients(1.0, 0.25);
  CHECK(c.video_masked == 0.25);
  CHECK(c.audio_masked == 1.75);

  CHECK_THROWS_AS(avcd_coefficients(-0.1, 0.0), Error);
}

TEST_CASE("avcd coefficients sum to four") {
  SplitMix64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto c = avcd_coefficients(rng.uniform(0, 3), rng.uniform(0, 3));
    CHECK(std::abs(c.original + c.video_masked + c.audio_masked + c.both_masked - 4.0) < 1e-12);
  }
}

TEST_CASE("trimodal combination worked example") {
  const auto out = combine_trimodal(inputs({1, 0}, {0, 1}, {2, 2}, {1, 1}), 0.5, 0.5);
  check_vec(out, {4, 2});
}

TEST_CASE("trimodal combination routes the video and audio coefficients") {
  // alpha_v = 1, alpha_a = 0: video-masked weight 0, audio-masked weight 2.
  const auto out = combine_trimodal(inputs({0, 0}, {1, 0}, {0, 1}, {0, 0}), 1.0, 0.0);
  check_vec(out, {0, 2});
}

TEST_CASE("trimodal combination with equal inputs scales by four") {
  const Logits l{0.3, -1.2, 2.5};
  const auto out = combine_trimodal(inputs(l, l, l, l), 1.7, 0.4);
  check_vec(out, {1.2, -4.8, 10.0});
  CHECK(argmax_tiebreak(out) == argmax_tiebreak(l));
}

TEST_CASE("trimodal combination matches the four-state expansion") {
  SplitMix64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t v = i % 2 ? 4 : 64;
    oracle::FourStateLogProbs s{random_vector(rng, v), random_vector(rng, v),
                                random_vector(rng, v), random_vector(rng, v)};
    const double av = rng.uniform(0, 3), aa = rng.uniform(0, 3);
    const auto got = combine_trimodal(inputs(s.va, s.nv_a, s.v_na, s.nv_na), av, aa);
    check_vec(got, oracle::oracle_avcd(s, av, aa), 1e-12);
  }
}

TEST_CASE("slot form is symmetric under swapping the two modalities") {
  SplitMix64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto o = random_vector(rng, 8), x = random_vector(rng, 8), y = random_vector(rng, 8),
               b = random_vector(rng, 8);
    const double ax = rng.uniform(0, 3), ay = rng.uniform(0, 3);
    check_vec(combine_trimodal(o, x, y, b, ax, ay), combine_trimodal(o, y, x, b, ay, ax), 1e-12);
  }
}

TEST_CASE("trimodal shift invariance holds after softmax") {
  SplitMix64 rng(8);
  for (int i = 0; i < 200; ++i) {
    auto in = inputs(random_vector(rng, 16), random_vector(rng, 16), random_vector(rng, 16),
                     random_vector(rng, 16));
    const double av = rng.uniform(0, 3), aa = rng.uniform(0, 3);
    const auto base = softmax(combine_trimodal(in, av, aa));
    for (auto& x : in.original) x += 3.0;
    for (auto& x : in.variants["V"]) x -= 1.5;
    for (auto& x : in.variants["A+V"]) x += 7.25;
    const auto shifted = softmax(combine_trimodal(in, av, aa));
    check_vec(shifted, base, 1e-12);
  }
}

TEST_CASE("trimodal combination rejects missing labels and length mismatch") {
  CombineInputs missing{{1, 2}, {{"V", {0, 0}}, {"A", {0, 0}}}};
  CHECK_THROWS_AS(combine_trimodal(missing, 0.5, 0.5), Error);
  CHECK_THROWS_AS(combine_trimodal(inputs({1, 2}, {0}, {0, 0}, {0, 0}), 0.5, 0.5), Error);
}

TEST_CASE("bimodal combination") {
  const Logits o{2, 0};
  check_vec(combine_bimodal(o, Logits{1, 1}, 0.0), o);
  check_vec(combine_bimodal(o, Logits{1, 1}, 1.0), {3, -1});
  check_vec(combine_bimodal(o, o, 0.5), o);
  CHECK_THROWS_AS(combine_bimodal(o, Logits{1}, 1.0), Error);
}

TEST_CASE("naive trimodal combination") {
  const auto in = inputs({1, 1}, {0, 0}, {0, 0}, {0, 0});
  check_vec(combine_naive_trimodal(in, 0.0), {1, 1});
  check_vec(combine_naive_trimodal(in, 1.0), {4, 4});
}

TEST_CASE("naive and avcd combinations differ when variants differ") {
  SplitMix64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const auto in = inputs(random_vector(rng, 8), random_vector(rng, 8), random_vector(rng, 8),
                           random_vector(rng, 8));
    const double a = rng.uniform(0.01, 3);
    const auto naive = combine_naive_trimodal(in, a);
    const auto avcd = combine_trimodal(in, a, a);
    bool differs = false;
    for (std::size_t k = 0; k < naive.size(); ++k) differs = differs || naive[k] != avcd[k];
    CHECK(differs);
  }
}

TEST_CASE("plausibility constraint") {
  const std::vector<double> p{0.7, 0.25, 0.05};
  const Logits c{1, 2, 3};
  auto out = apply_plausibility(c, p, 0.1);
  CHECK(out[0] == 1);
  CHECK(out[1] == 2);
  CHECK(is_sentinel(out[2]));

  out = apply_plausibility(c, p, 0.0);
  CHECK(out == c);

  out = apply_plausibility(c, std::vector<double>{0.4, 0.4, 0.2}, 1.0);
  CHECK(out[0] == 1);
  CHECK(out[1] == 2);
  CHECK(is_sentinel(out[2]));

  CHECK_THROWS_AS(apply_plausibility(c, p, 1.5), Error);
}

TEST_CASE("plausibility always keeps the original argmax") {
  SplitMix64 rng(10);
  for (int i = 0; i < 500; ++i) {
    const auto orig = random_vector(rng, 32);
    const auto p = softmax(orig);
    const double beta = rng.uniform();
    const auto out = apply_plausibility(random_vector(rng, 32), p, beta);
    CHECK_FALSE(is_sentinel(out[argmax_tiebreak(orig).value]));
    const double top = *std::max_element(p.begin(), p.end());
    for (std::size_t k = 0; k < out.size(); ++k) {
      CHECK(is_sentinel(out[k]) == (p[k] < beta * top));
    }
  }
}

TEST_CASE("entropy gate") {
  auto g = entropy_gate(std::vector<double>{50, 0, 0}, 0.6);
  CHECK(g.skip);
  CHECK(g.entropy < 1e-15);

  g = entropy_gate(std::vector<double>(4, 0.0), 0.6);
  CHECK_FALSE(g.skip);
  CHECK(std::abs(g.entropy - std::log(4.0)) < 1e-12);

  CHECK_FALSE(entropy_gate(std::vector<double>{50, 0, 0}, 0.0).skip);
  CHECK(entropy_gate(std::vector<double>(4, 0.0), INFINITY).skip);
}

TEST_CASE("token selection") {
  SplitMix64 rng(1);
  CHECK(sample_token(std::vector<double>{4, 2, kNegInf}, Strategy::kGreedy, rng).value == 0);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_token(std::vector<double>{0, kNegInf}, Strategy::kSample, rng).value == 0);
  }
  CHECK_THROWS_AS(sample_token(std::vector<double>{kNegInf}, Strategy::kSample, rng), Error);
}

TEST_CASE("sampling is reproducible and follows the distribution") {
  auto draw = [](std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<std::uint32_t> out;
    for (int i = 0; i < 50; ++i) {
      out.push_back(sample_token(std::vector<double>{0.1, 0.5, -0.3, 1.0}, Strategy::kSample, rng)
                        .value);
    }
    return out;
  };
  CHECK(draw(42) == draw(42));

  SplitMix64 rng(3);
  int zeros = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    zeros += sample_token(std::vector<double>{std::log(3.0), 0.0}, Strategy::kSample, rng).value == 0;
  }
  CHECK(std::abs(static_cast<double>(zeros) / n - 0.75) < 0.01);
}
