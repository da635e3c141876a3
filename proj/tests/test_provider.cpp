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

#include <cmath>
#include <memory>
#include <string>

#include "avcd/error.hpp"
#include "avcd/provider.hpp"
#include "avcd/toy_model.hpp"
#include "support.hpp"

using namespace avcd;
using avcd::testing::tokens;

namespace {

ScriptedScenario lookup_fixture() {
  ScriptedScenario s;
  s.descriptor = {16, 2, ModalityLayout({{"video", 0, 1}, {"language", 1, 1}}, 1), "fixture"};
  Logits l(16, 0.0);
  l[0] = 1.0;
  s.table[{tokens({5}), "none"}] = {l, AttentionSnapshot{{{1.0}, {1.0}}}};
  return s;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an avcd::Error");
  return ErrorCode::kInvalidArgument;
}

class BrokenProvider final : public Provider {
 public:
  explicit BrokenProvider(ForwardResponse r) : response_(std::move(r)) {
    desc_ = {2, 1, ModalityLayout({{"video", 0, 1}, {"language", 1, 2}}, 2), "broken"};
  }
  const ProviderDescriptor& descriptor() const override { return desc_; }

 protected:
  ForwardResponse do_forward(const Prefix&, const MaskSpec*) override { return response_; }

 private:
  ProviderDescriptor desc_;
  ForwardResponse response_;
};

}  // namespace

TEST_CASE("scripted lookup") {
  ScriptedProvider p(lookup_fixture());
  const auto r = p.forward({tokens({5}), std::nullopt});
  CHECK(r.logits[0] == 1.0);
  CHECK(r.logits[1] == 0.0);
  CHECK(p.forward_calls() == 1);
}

TEST_CASE("scripted miss names the prefix") {
  ScriptedProvider p(lookup_fixture());
  try {
    p.forward({tokens({9}), std::nullopt});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnscriptedState);
    CHECK(std::string(e.what()).find("unscripted state") != std::string::npos);
    CHECK(std::string(e.what()).find("[9]") != std::string::npos);
  }
  CHECK(p.forward_calls() == 0);
}

TEST_CASE("scripted provider is pure") {
  ScriptedProvider p(lookup_fixture());
  const auto a = p.forward({tokens({5}), std::nullopt});
  const auto b = p.forward({tokens({5}), std::nullopt});
  CHECK(a.logits == b.logits);
  CHECK(a.attention.rows == b.attention.rows);
}

TEST_CASE("scripted default attention is zero padded") {
  ScriptedScenario s;
  s.descriptor = {2, 1, ModalityLayout({{"video", 0, 1}, {"language", 1, 2}}, 2), "pad"};
  s.default_attention.rows = {{0.5, 0.5}};
  s.table[{tokens({0, 1, 1}), "none"}] = {{0.0, 1.0}, std::nullopt};
  ScriptedProvider p(s);
  const auto r = p.forward({tokens({0, 1, 1}), std::nullopt});
  CHECK(r.attention.rows[0] == std::vector<double>{0.5, 0.5, 0.0});
}

TEST_CASE("scripted construction checks logit lengths") {
  auto s = lookup_fixture();
  s.table[{tokens({3}), "none"}] = {{1.0}, std::nullopt};
  CHECK(code_of([&] { ScriptedProvider p(s); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("canonical mask labels") {
  const auto layout = avcd::testing::small_trimodal();
  CHECK(canonical_mask_label(MaskSpec({2, 3}), layout) == "A");
  CHECK(canonical_mask_label(MaskSpec(), layout) == "none");
  CHECK(canonical_mask_label(MaskSpec({3, 0}), layout) == "A+V");
  CHECK(canonical_mask_label(MaskSpec({0, 2, 5}), layout) == "A+L+V");
  CHECK(code_of([&] { canonical_mask_label(MaskSpec({6}), layout); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("mask spec normalizes its indices") {
  const MaskSpec m({5, 1, 5, 3});
  CHECK(m.key_indices() == std::vector<std::size_t>{1, 3, 5});
  CHECK(m.masks(3));
  CHECK_FALSE(m.masks(2));
}

TEST_CASE("layer policies") {
  CHECK(LayerPolicy::all_but_last().covers(0, 4));
  CHECK(LayerPolicy::all_but_last().covers(2, 4));
  CHECK_FALSE(LayerPolicy::all_but_last().covers(3, 4));
  CHECK(LayerPolicy::all().covers(3, 4));
  const auto e = LayerPolicy::explicit_layers({2, 0});
  CHECK(e.covers(0, 4));
  CHECK_FALSE(e.covers(1, 4));
  CHECK(e.covers(2, 4));
}

TEST_CASE("empty mask behaves like no mask") {
  ToyModelConfig config;
  config.layout = default_trimodal_layout();
  ToyProvider toy(std::make_shared<const ToyModel>(config));
  Prefix prompt;
  for (std::uint32_t i = 0; i < 26; ++i) prompt.emplace_back((i * 7) % 64);
  const auto a = toy.forward({prompt, std::nullopt});
  const auto b = toy.forward({prompt, MaskSpec()});
  CHECK(a.logits == b.logits);
  CHECK(a.attention.rows == b.attention.rows);

  ScriptedProvider scripted(lookup_fixture());
  CHECK(scripted.forward({tokens({5}), MaskSpec()}).logits ==
        scripted.forward({tokens({5}), std::nullopt}).logits);
}

TEST_CASE("requests are validated") {
  ScriptedProvider p(lookup_fixture());
  CHECK(code_of([&] { p.forward({Prefix{}, std::nullopt}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { p.forward({tokens({16}), std::nullopt}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { p.forward({tokens({5}), MaskSpec({1})}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([&] {
          p.forward({tokens({5}), MaskSpec({0}, LayerPolicy::explicit_layers({2}))});
        }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("responses are validated") {
  const AttentionSnapshot ok{{{0.5, 0.5}}};
  BrokenProvider short_logits({{1.0}, ok});
  CHECK(code_of([&] { short_logits.forward({tokens({0, 1}), std::nullopt}); }) ==
        ErrorCode::kShapeMismatch);
  BrokenProvider nan_logits({{1.0, NAN}, ok});
  CHECK(code_of([&] { nan_logits.forward({tokens({0, 1}), std::nullopt}); }) ==
        ErrorCode::kShapeMismatch);
  BrokenProvider bad_rows({{1.0, 0.0}, AttentionSnapshot{{{0.5, 0.4}}}});
  CHECK(code_of([&] { bad_rows.forward({tokens({0, 1}), std::nullopt}); }) ==
        ErrorCode::kShapeMismatch);
  BrokenProvider wrong_keys({{1.0, 0.0}, AttentionSnapshot{{{1.0}}}});
  CHECK(code_of([&] { wrong_keys.forward({tokens({0, 1}), std::nullopt}); }) ==
        ErrorCode::kShapeMismatch);
  BrokenProvider fine({{1.0, 0.0}, ok});
  CHECK_NOTHROW(fine.forward({tokens({0, 1}), std::nullopt}));
}

TEST_CASE("recording provider captures a replayable table") {
  ToyModelConfig config;
  config.layout = default_trimodal_layout();
  ToyProvider toy(std::make_shared<const ToyModel>(config));
  RecordingProvider rec(toy);
  Prefix prompt;
  for (std::uint32_t i = 0; i < 24; ++i) prompt.emplace_back((i * 5 + 1) % 64);
  const auto a = rec.forward({prompt, std::nullopt});
  const auto b = rec.forward({prompt, MaskSpec({0, 9})});
  CHECK(rec.recorded().table.size() == 2);

  ScriptedProvider replay(rec.recorded());
  CHECK(replay.forward({prompt, std::nullopt}).logits == a.logits);
  const auto rb = replay.forward({prompt, MaskSpec({0, 9})});
  CHECK(rb.logits == b.logits);
  CHECK(rb.attention.rows == b.attention.rows);
}
