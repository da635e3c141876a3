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

#include "avcd/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace avcd {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kEmptySupport: return "empty support";
    case ErrorCode::kInfiniteDivergence: return "infinite divergence";
    case ErrorCode::kFullyMasked: return "fully masked context";
    case ErrorCode::kUnscriptedState: return "unscripted state";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kSchema: return "schema violation";
    case ErrorCode::kProvider: return "provider error";
    case ErrorCode::kTransport: return "transport failure";
    case ErrorCode::kProtocol: return "protocol violation";
    case ErrorCode::kIdMismatch: return "response id mismatch";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown";
}

namespace {

void check_entries(std::span<const double> logits) {
  for (double x : logits) {
    require(!std::isnan(x) && x != std::numeric_limits<double>::infinity(),
            ErrorCode::kInvalidArgument, "logits must be finite or the -inf sentinel");
  }
}

}  // namespace

Probs softmax(std::span<const double> logits) {
  check_entries(logits);
  double max = kNegInf;
  for (double x : logits) max = std::max(max, x);
  require(max != kNegInf, ErrorCode::kEmptySupport, "empty support");

  Probs out(logits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (is_sentinel(logits[i])) continue;
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), ErrorCode::kShapeMismatch,
          "kl_divergence: length mismatch " + std::to_string(p.size()) + " vs " +
              std::to_string(q.size()));
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    require(q[i] > 0.0, ErrorCode::kInfiniteDivergence,
            "infinite divergence: q[" + std::to_string(i) + "] = 0 where p > 0");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, kl);
}

TokenId argmax_tiebreak(std::span<const double> logits) {
  check_entries(logits);
  std::size_t best = logits.size();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (is_sentinel(logits[i])) continue;
    if (best == logits.size() || logits[i] > logits[best]) best = i;
  }
  require(best != logits.size(), ErrorCode::kEmptySupport, "empty support");
  return TokenId(static_cast<std::uint32_t>(best));
}

bool is_probability_vector(std::span<const double> probs, double tol) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

std::string modality_label(std::string_view name) {
  if (name == "video") return "V";
  if (name == "audio") return "A";
  if (name == "language") return "L";
  return std::string(name);
}

ModalityLayout::ModalityLayout(std::vector<ModalitySpan> spans, std::size_t total_tokens)
    : spans_(std::move(spans)), total_tokens_(total_tokens) {
  require(spans_.size() == 2 || spans_.size() == 3, ErrorCode::kUnsupported,
          "layout must declare 2 or 3 modalities, got " + std::to_string(spans_.size()));
  std::set<std::string> names;
  std::set<std::string> labels;
  for (const auto& s : spans_) {
    require(!s.name.empty(), ErrorCode::kInvalidArgument, "modality name must be non-empty");
    require(s.begin <= s.end && s.end <= total_tokens_, ErrorCode::kInvalidArgument,
            "span '" + s.name + "' out of range [0, " + std::to_string(total_tokens_) + ")");
    require(names.insert(s.name).second, ErrorCode::kInvalidArgument,
            "duplicate modality '" + s.name + "'");
    require(labels.insert(modality_label(s.name)).second, ErrorCode::kInvalidArgument,
            "modality label collision for '" + s.name + "'");
  }
  for (std::size_t a = 0; a < spans_.size(); ++a) {
    for (std::size_t b = a + 1; b < spans_.size(); ++b) {
      const auto& x = spans_[a];
      const auto& y = spans_[b];
      bool overlap = x.begin < y.end && y.begin < x.end;
      require(!overlap, ErrorCode::kInvalidArgument,
              "spans '" + x.name + "' and '" + y.name + "' overlap");
    }
  }
}

const ModalitySpan& ModalityLayout::span(std::string_view name) const {
  for (const auto& s : spans_) {
    if (s.name == name) return s;
  }
  fail(ErrorCode::kInvalidArgument, "modality '" + std::string(name) + "' not in layout");
}

bool ModalityLayout::has(std::string_view name) const noexcept {
  return std::any_of(spans_.begin(), spans_.end(),
                     [&](const ModalitySpan& s) { return s.name == name; });
}

std::optional<std::size_t> ModalityLayout::modality_of(std::size_t position) const noexcept {
  for (std::size_t i = 0; i < spans_.size(); ++i) {
    if (spans_[i].contains(position)) return i;
  }
  return std::nullopt;
}

double SplitMix64::normal() noexcept {
  // 1 - u keeps the log argument in (0, 1].
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace avcd
