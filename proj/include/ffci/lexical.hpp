// Copyright 2026 The FFCI Authors.
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ffci/corpus.hpp"

namespace ffci {

// Precision/recall/F1 triple produced by every two-text metric.
struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when an input was empty and the zero score is a convention rather
  // than a measurement.
  bool degenerate = false;
};

inline double harmonic_mean(double p, double r) {
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

inline PrfScore make_prf(double precision, double recall,
                         bool degenerate = false) {
  return {precision, recall, harmonic_mean(precision, recall), degenerate};
}

inline double safe_ratio(double num, double den) {
  return den > 0.0 ? num / den : 0.0;
}

// Multiset of n-grams of one fixed order.
class NgramCounts {
 public:
  NgramCounts(std::span<const std::string> tokens, std::size_t order)
      : order_(order) {
    if (order == 0) throw DataError("n-gram order must be positive");
    if (tokens.size() < order) return;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      std::string key;
      for (std::size_t k = 0; k < order; ++k) {
        if (k) key.push_back('\x1f');
        key += tokens[i + k];
      }
      ++counts_[key];
      ++total_;
    }
  }

  std::size_t order() const { return order_; }
  std::size_t total() const { return total_; }
  std::size_t count(const std::string& key) const {
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }
  const std::unordered_map<std::string, std::size_t>& counts() const {
    return counts_;
  }

  // Sum over n-grams of min(count here, count in other).
  std::size_t clipped_overlap(const NgramCounts& other) const {
    const auto& small = counts_.size() <= other.counts_.size() ? *this : other;
    const auto& large = &small == this ? other : *this;
    std::size_t m = 0;
    for (const auto& [k, c] : small.counts_) m += std::min(c, large.count(k));
    return m;
  }

 private:
  std::size_t order_;
  std::size_t total_ = 0;
  std::unordered_map<std::string, std::size_t> counts_;
};

inline PrfScore rouge_n(std::span<const std::string> candidate,
                        std::span<const std::string> reference,
                        std::size_t n) {
  NgramCounts cand(candidate, n), ref(reference, n);
  auto matches = static_cast<double>(cand.clipped_overlap(ref));
  return make_prf(safe_ratio(matches, static_cast<double>(cand.total())),
                  safe_ratio(matches, static_cast<double>(ref.total())),
                  candidate.empty() || reference.empty());
}

inline std::size_t lcs_length(std::span<const std::string> a,
                              std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline PrfScore rouge_l(std::span<const std::string> candidate,
                        std::span<const std::string> reference) {
  auto l = static_cast<double>(lcs_length(candidate, reference));
  return make_prf(safe_ratio(l, static_cast<double>(candidate.size())),
                  safe_ratio(l, static_cast<double>(reference.size())),
                  candidate.empty() || reference.empty());
}

enum class BleuSmoothing { none, add_one };

// Corpus-free sentence BLEU: geometric mean of clipped n-gram precisions for
// n = 1..max_n times the brevity penalty exp(1 - r/c) when c < r, where r is
// the reference length closest to c (shorter on ties).
inline double bleu(std::span<const std::string> candidate,
                   std::span<const Tokens> references, std::size_t max_n = 4,
                   BleuSmoothing smoothing = BleuSmoothing::none) {
  if (max_n == 0) throw DataError("bleu: max_n must be positive");
  if (references.empty()) throw DataError("bleu: at least one reference");
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    NgramCounts cand(candidate, n);
    std::unordered_map<std::string, std::size_t> max_ref;
    for (const auto& ref : references) {
      NgramCounts rc(ref, n);
      for (const auto& [k, c] : rc.counts())
        max_ref[k] = std::max(max_ref[k], c);
    }
    std::size_t matched = 0;
    for (const auto& [k, c] : cand.counts()) {
      auto it = max_ref.find(k);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    double num = static_cast<double>(matched);
    double den = static_cast<double>(cand.total());
    if (smoothing == BleuSmoothing::add_one) {
      num += 1.0;
      den += 1.0;
    }
    if (num <= 0.0 || den <= 0.0) return 0.0;
    log_sum += std::log(num / den);
  }

  const auto c = static_cast<double>(candidate.size());
  double r = static_cast<double>(references.front().size());
  for (const auto& ref : references) {
    auto len = static_cast<double>(ref.size());
    auto d = std::abs(len - c), best = std::abs(r - c);
    if (d < best || (d == best && len < r)) r = len;
  }
  double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return std::clamp(bp * std::exp(log_sum / static_cast<double>(max_n)), 0.0,
                    1.0);
}

}  // namespace ffci
