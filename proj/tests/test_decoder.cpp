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
#include <memory>
#include <set>

#include "avcd/decoder.hpp"
#include "avcd/error.hpp"
#include "avcd/oracle.hpp"
#include "avcd/scenario.hpp"
#include "avcd/toy_model.hpp"
#include "support.hpp"

using namespace avcd;
using avcd::testing::tokens;

namespace {

/// Answers masked requests with the unmasked response.
class MaskBlindProvider final : public Provider {
 public:
  explicit MaskBlindProvider(Provider& inner) : inner_(inner) {}
  const ProviderDescriptor& descriptor() const override { return inner_.descriptor(); }

 protected:
  ForwardResponse do_forward(const Prefix& prefix, const MaskSpec*) override {
    return inner_.forward({prefix, std::nullopt});
  }

 private:
  Provider& inner_;
};

std::shared_ptr<const ToyModel> toy(const ModalityLayout& layout, std::uint64_t seed = 7) {
  ToyModelConfig c;
  c.layout = layout;
  c.seed = seed;
  return std::make_shared<const ToyModel>(c);
}

/// Two-modality scripted scenario: one uniform step whose single masked
/// variant favours token 1.
ScriptedScenario bimodal_fixture() {
  ScriptedScenario s;
  const ModalityLayout layout({{"video", 0, 2}, {"language", 2, 4}}, 4);
  s.descriptor = {3, 2, layout, "bimodal"};
  s.default_attention.rows = {{0.1, 0.1, 0.4, 0.4}, {0.1, 0.1, 0.4, 0.4}};
  s.table[{tokens({0, 1, 2, 1}), "none"}] = {{0, 0, 0}, std::nullopt};
  s.table[{tokens({0, 1, 2, 1}), "V"}] = {{1, 0, 1}, std::nullopt};
  return s;
}

}  // namespace

TEST_CASE("config validation") {
  DecodeConfig c;
  CHECK_NOTHROW(c.validate());
  c.beta = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.mask_ratio = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.alpha_v = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.tau = -0.1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.max_tokens = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("per-modality alphas") {
  DecodeConfig c;
  c.alpha_v = 1.0;
  c.alpha_a = 3.0;
  CHECK(c.alpha_for("audio") == 3.0);
  CHECK(c.alpha_for("video") == 1.0);
  CHECK(c.alpha_for(std::vector<std::string>{"video", "audio"}) == 2.0);
}

TEST_CASE("combiner and strategy names round trip") {
  for (auto c : {Combiner::kAvcd, Combiner::kNaive, Combiner::kBimodal}) {
    CHECK(parse_combiner(combiner_name(c)) == c);
  }
  for (auto s : {Strategy::kGreedy, Strategy::kSample}) CHECK(parse_strategy(strategy_name(s)) == s);
  CHECK_THROWS_AS(parse_combiner("vcd"), Error);
}

TEST_CASE("scripted steps: gated then contrasted") {
  const Scenario s = generate_scenario("scripted-minimal", 0);
  ScriptedProvider p(s.provider.scripted);
  const DecodeTrace t = decode(p, s.prompts[0], s.layout, s.config);
  REQUIRE(t.ok);
  REQUIRE(t.steps.size() == 2);

  const auto& gated = t.steps[0];
  CHECK(gated.gate_skipped);
  CHECK(gated.forward_passes == 1);
  CHECK(gated.mode == "gated");
  CHECK(gated.chosen.value == 0);
  CHECK(gated.masked_variants.empty());

  const auto& open = t.steps[1];
  CHECK_FALSE(open.gate_skipped);
  CHECK(open.forward_passes == 4);
  CHECK(open.dominant == "language");
  std::set<std::string> labels;
  for (const auto& v : open.masked_variants) labels.insert(v.label);
  CHECK(labels == std::set<std::string>{"V", "A", "A+V"});
  CHECK(open.combined == Logits{0, 0, 0, 2});
  CHECK(open.chosen.value == 3);
  CHECK(std::abs(open.entropy - std::log(4.0)) < 1e-12);

  CHECK(t.tokens() == tokens({0, 3}));
  CHECK(t.total_forward_passes() == 5);
  CHECK(p.forward_calls() == 5);
}

TEST_CASE("bimodal layout uses two passes") {
  ScriptedProvider p(bimodal_fixture());
  DecodeConfig c;
  c.max_tokens = 1;
  c.alpha_v = 1.0;
  const auto t = decode(p, tokens({0, 1, 2, 1}), p.descriptor().layout, c);
  REQUIRE(t.ok);
  REQUIRE(t.steps.size() == 1);
  CHECK(t.steps[0].forward_passes == 2);
  CHECK(t.steps[0].mode == "bimodal");
  REQUIRE(t.steps[0].masked_variants.size() == 1);
  CHECK(t.steps[0].masked_variants[0].label == "V");
  // 2*0 - 1*[1,0,1] = [-1,0,-1]
  CHECK(t.steps[0].combined == Logits{-1, 0, -1});
  CHECK(t.steps[0].chosen.value == 1);
}

TEST_CASE("saturated gate reproduces greedy decoding") {
  for (const auto& layout : {default_trimodal_layout(), default_bimodal_layout()}) {
    auto model = toy(layout);
    const auto prompts = oracle::random_prompts(20, layout.total_tokens(), 64, 77);
    for (const auto& prompt : prompts) {
      ToyProvider a(model), b(model);
      DecodeConfig c;
      c.tau = INFINITY;
      c.max_tokens = 10;
      const auto t = decode(a, prompt, layout, c);
      CHECK(t.tokens() == greedy_decode(b, prompt, 10, c.eos_token));
      for (const auto& s : t.steps) CHECK(s.forward_passes == 1);
    }
  }
}

TEST_CASE("zero threshold never gates") {
  auto model = toy(default_trimodal_layout());
  ToyProvider p(model);
  DecodeConfig c;
  c.tau = 0.0;
  c.max_tokens = 8;
  const auto t = decode(p, oracle::random_prompts(1, 24, 64, 5)[0], default_trimodal_layout(), c);
  for (const auto& s : t.steps) {
    CHECK_FALSE(s.gate_skipped);
    CHECK(s.forward_passes == 4);
  }
  CHECK(p.forward_calls() == 4 * t.steps.size());
}

TEST_CASE("forward-pass accounting and plausibility on the toy model") {
  for (const auto& layout : {default_trimodal_layout(), default_bimodal_layout()}) {
    const std::size_t open_passes = layout.modality_count() == 3 ? 4 : 2;
    auto model = toy(layout);
    for (const auto& prompt : oracle::random_prompts(10, layout.total_tokens(), 64, 8)) {
      ToyProvider p(model);
      DecodeConfig c;
      c.max_tokens = 10;
      const auto t = decode(p, prompt, layout, c);
      REQUIRE(t.ok);
      std::uint64_t expected = 0;
      for (const auto& s : t.steps) {
        expected += s.gate_skipped ? 1 : open_passes;
        CHECK(s.forward_passes == (s.gate_skipped ? 1 : open_passes));
        const auto probs = softmax(s.original);
        const double top = *std::max_element(probs.begin(), probs.end());
        CHECK(probs[s.chosen.value] >= c.beta * top);
      }
      CHECK(p.forward_calls() == expected);
      CHECK(t.total_forward_passes() == expected);
    }
  }
}

TEST_CASE("degenerate masking reproduces greedy argmax") {
  auto model = toy(default_trimodal_layout());
  for (const auto& prompt : oracle::random_prompts(10, 24, 64, 9)) {
    ToyProvider inner(model), reference(model);
    MaskBlindProvider blind(inner);
    DecodeConfig c;
    c.alpha_v = c.alpha_a = 0.0;
    c.beta = 0.0;
    c.tau = 0.0;
    c.max_tokens = 8;
    const auto t = decode(blind, prompt, default_trimodal_layout(), c);
    CHECK(t.tokens() == greedy_decode(reference, prompt, 8, c.eos_token));
    // Nonzero alphas with identical variants leave argmax unchanged too.
    c.alpha_v = 2.5;
    c.alpha_a = 0.7;
    ToyProvider inner2(model);
    MaskBlindProvider blind2(inner2);
    CHECK(decode(blind2, prompt, default_trimodal_layout(), c).tokens() == t.tokens());
  }
}

TEST_CASE("decoding stops at end of sequence and at max tokens") {
  auto model = toy(default_trimodal_layout());
  const auto prompt = oracle::random_prompts(1, 24, 64, 10)[0];
  ToyProvider p(model);
  DecodeConfig c;
  c.max_tokens = 5;
  c.eos_token = TokenId(63);
  const auto t = decode(p, prompt, default_trimodal_layout(), c);
  CHECK(t.steps.size() <= 5);
  for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) CHECK(t.steps[i].chosen != c.eos_token);

  // Make the first emitted token the end of sequence.
  ToyProvider q(model);
  c.eos_token = t.steps[0].chosen;
  const auto u = decode(q, prompt, default_trimodal_layout(), c);
  CHECK(u.steps.size() == 1);
}

TEST_CASE("provider failure returns a partial trace") {
  Scenario s = generate_scenario("scripted-minimal", 0);
  // Replace the end-of-sequence token so decoding runs past the script.
  s.config.eos_token = TokenId(2);
  ScriptedProvider p(s.provider.scripted);
  const auto t = decode(p, s.prompts[0], s.layout, s.config);
  CHECK_FALSE(t.ok);
  CHECK(t.steps.size() == 2);
  REQUIRE(t.error_code.has_value());
  CHECK(*t.error_code == ErrorCode::kUnscriptedState);
  CHECK(t.error.find("unscripted state") != std::string::npos);
}

TEST_CASE("empty non-dominant spans fall back to a single pass") {
  ScriptedScenario s;
  const ModalityLayout layout({{"video", 0, 0}, {"audio", 0, 0}, {"language", 0, 2}}, 2);
  s.descriptor = {3, 2, layout, "empty"};
  s.default_attention.rows = {{0.5, 0.5}, {0.5, 0.5}};
  s.table[{tokens({1, 2}), "none"}] = {{0, 0.1, 0}, std::nullopt};
  ScriptedProvider p(s);
  DecodeConfig c;
  c.max_tokens = 1;
  const auto t = decode(p, tokens({1, 2}), layout, c);
  REQUIRE(t.ok);
  CHECK(t.steps[0].mode == "fallback");
  CHECK(t.steps[0].forward_passes == 1);
  CHECK_FALSE(t.steps[0].gate_skipped);
  CHECK(t.steps[0].chosen.value == 1);
}

TEST_CASE("layout mismatch is rejected") {
  auto model = toy(default_trimodal_layout());
  ToyProvider p(model);
  SplitMix64 rng(0);
  CHECK_THROWS_AS(decode_step(p, oracle::random_prompts(1, 24, 64, 1)[0],
                              default_bimodal_layout(), DecodeConfig{}, rng),
                  Error);
}

TEST_CASE("sampling is reproducible under a seed") {
  auto model = toy(default_trimodal_layout());
  const auto prompt = oracle::random_prompts(1, 24, 64, 11)[0];
  auto run = [&](std::uint64_t seed) {
    ToyProvider p(model);
    DecodeConfig c;
    c.strategy = Strategy::kSample;
    c.seed = seed;
    c.max_tokens = 12;
    c.eos_token = TokenId(63);
    return decode(p, prompt, default_trimodal_layout(), c);
  };
  const auto a = run(5), b = run(5);
  CHECK(a.tokens() == b.tokens());
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) CHECK(a.steps[i].rng_state == b.steps[i].rng_state);
  bool any_differs = false;
  for (std::uint64_t seed = 6; seed < 12 && !any_differs; ++seed) {
    any_differs = run(seed).tokens() != a.tokens();
  }
  CHECK(any_differs);
}

TEST_CASE("bimodal combiner with explicit modalities on a trimodal layout") {
  auto model = toy(default_trimodal_layout());
  ToyProvider p(model);
  DecodeConfig c;
  c.tau = 0.0;
  c.max_tokens = 3;
  c.combiner = Combiner::kBimodal;
  c.bimodal_modalities = {"video", "audio"};
  const auto t = decode(p, oracle::random_prompts(1, 24, 64, 12)[0], default_trimodal_layout(), c);
  for (const auto& s : t.steps) {
    CHECK(s.forward_passes == 2);
    REQUIRE(s.masked_variants.size() == 1);
    CHECK(s.masked_variants[0].label == "A+V");
  }
}

TEST_CASE("naive combiner uses four passes") {
  auto model = toy(default_trimodal_layout());
  ToyProvider p(model);
  DecodeConfig c;
  c.tau = 0.0;
  c.max_tokens = 3;
  c.combiner = Combiner::kNaive;
  const auto t = decode(p, oracle::random_prompts(1, 24, 64, 13)[0], default_trimodal_layout(), c);
  for (const auto& s : t.steps) {
    CHECK(s.forward_passes == 4);
    CHECK(s.mode == "naive");
  }
}
