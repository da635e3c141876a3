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

// Shared numeric primitives and domain records.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "avcd/error.hpp"

namespace avcd {

struct TokenId {
  std::uint32_t value = 0;

  constexpr TokenId() = default;
  constexpr explicit TokenId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(TokenId, TokenId) = default;
};

using Prefix = std::vector<TokenId>;

/// Unnormalized next-token scores. Entries are finite, except for the
/// kNegInf sentinel written by plausibility truncation.
using Logits = std::vector<double>;
using Probs = std::vector<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline bool is_sentinel(double x) noexcept { return x == kNegInf; }

/// Per-layer attention of the final query over every key position, heads
/// averaged. rows[j][i] is layer j, key i.
struct AttentionSnapshot {
  std::vector<std::vector<double>> rows;

  std::size_t layers() const noexcept { return rows.size(); }
  std::size_t keys() const noexcept { return rows.empty() ? 0 : rows.front().size(); }
};

// Numeric primitives. All are pure.

Probs softmax(std::span<const double> logits);
double entropy(std::span<const double> probs);
double kl_divergence(std::span<const double> p, std::span<const double> q);
TokenId argmax_tiebreak(std::span<const double> logits);

/// Checks the probability-vector invariant (nonnegative, sums to 1 within tol).
bool is_probability_vector(std::span<const double> probs, double tol = 1e-9);

// Modality layout.

struct ModalitySpan {
  std::string name;
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t pos) const noexcept { return pos >= begin && pos < end; }

  friend bool operator==(const ModalitySpan&, const ModalitySpan&) = default;
};

/// One-letter label used in mask labels: video -> V, audio -> A,
/// language -> L. Any other name is used verbatim.
std::string modality_label(std::string_view name);

/// Partition of the prompt positions into named modality spans. Positions at
/// or beyond total_tokens (generated tokens) belong to no span.
class ModalityLayout {
 public:
  ModalityLayout() = default;
  ModalityLayout(std::vector<ModalitySpan> spans, std::size_t total_tokens);

  const std::vector<ModalitySpan>& spans() const noexcept { return spans_; }
  std::size_t total_tokens() const noexcept { return total_tokens_; }
  std::size_t modality_count() const noexcept { return spans_.size(); }

  const ModalitySpan& span(std::string_view name) const;
  bool has(std::string_view name) const noexcept;
  std::optional<std::size_t> modality_of(std::size_t position) const noexcept;

  friend bool operator==(const ModalityLayout&, const ModalityLayout&) = default;

 private:
  std::vector<ModalitySpan> spans_;
  std::size_t total_tokens_ = 0;
};

/// SplitMix64. Chosen because its whole state is one word (so it can be
/// echoed into traces) and its output sequence is fixed by three constants.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; one normal per call, the pair partner
  /// is discarded so the stream position stays a simple function of calls.
  double normal() noexcept;

  std::uint32_t below(std::uint32_t bound) noexcept {
    return static_cast<std::uint32_t>(next() % bound);
  }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace avcd
