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
#include <utility>
#include <vector>

#include "ffci/error.hpp"
#include "ffci/lexical.hpp"

namespace ffci {

inline constexpr double kNormTolerance = 1e-6;

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline void normalize_in_place(std::span<double> v) {
  double norm = std::sqrt(dot(v, v));
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw DataError("cannot normalize a zero or non-finite vector");
  for (auto& x : v) x /= norm;
}

}  // namespace detail

// Token vectors of one text taken from one layer of one model. Rows are
// L2-normalized on construction, so inner products are cosines.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  EmbeddingMatrix(std::string model_id, int layer,
                  std::vector<std::string> tokens,
                  const std::vector<std::vector<double>>& vectors)
      : model_id_(std::move(model_id)),
        layer_(layer),
        tokens_(std::move(tokens)) {
    if (layer_ < 0) throw DataError("layer must be non-negative");
    if (vectors.size() != tokens_.size())
      throw DataError("token/vector count mismatch");
    dim_ = vectors.empty() ? 0 : vectors.front().size();
    data_.reserve(vectors.size() * dim_);
    for (const auto& v : vectors) {
      if (v.size() != dim_) throw DataError("ragged embedding matrix");
      data_.insert(data_.end(), v.begin(), v.end());
    }
    for (std::size_t i = 0; i < size(); ++i)
      detail::normalize_in_place(row_mut(i));
  }

  const std::string& model_id() const { return model_id_; }
  int layer() const { return layer_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  // Keeps rows whose token satisfies pred.
  template <typename Pred>
  EmbeddingMatrix filtered(Pred pred) const {
    EmbeddingMatrix out;
    out.model_id_ = model_id_;
    out.layer_ = layer_;
    out.dim_ = dim_;
    for (std::size_t i = 0; i < size(); ++i) {
      if (!pred(tokens_[i])) continue;
      out.tokens_.push_back(tokens_[i]);
      auto r = row(i);
      out.data_.insert(out.data_.end(), r.begin(), r.end());
    }
    return out;
  }

 private:
  std::span<double> row_mut(std::size_t i) {
    return {data_.data() + i * dim_, dim_};
  }

  std::string model_id_;
  int layer_ = 0;
  std::vector<std::string> tokens_;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

enum class Granularity { edu, sentence, document };

inline std::string to_string(Granularity g) {
  switch (g) {
    case Granularity::edu: return "edu";
    case Granularity::sentence: return "sentence";
    case Granularity::document: return "document";
  }
  return "?";
}

inline Granularity parse_granularity(std::string_view s) {
  if (s == "edu") return Granularity::edu;
  if (s == "sentence") return Granularity::sentence;
  if (s == "document") return Granularity::document;
  throw DataError("unknown granularity '" + std::string(s) + "'");
}

struct SegmentEmbedding {
  std::string segment_text;
  std::vector<double> vector;
  Granularity granularity = Granularity::sentence;

  SegmentEmbedding() = default;
  SegmentEmbedding(std::string text, std::vector<double> v, Granularity g)
      : segment_text(std::move(text)), vector(std::move(v)), granularity(g) {
    detail::normalize_in_place(vector);
  }
};

namespace detail {

// Mean over rows of `from` of the best inner product against rows of `to`,
// each best clamped to [0, 1]. Both precision and recall go through here so
// that P(a, b) and R(b, a) are computed by the same arithmetic.
inline double mean_best_match(const EmbeddingMatrix& from,
                              const EmbeddingMatrix& to) {
  double total = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = -1.0;
    for (std::size_t j = 0; j < to.size(); ++j)
      best = std::max(best, dot(from.row(i), to.row(j)));
    total += std::clamp(best, 0.0, 1.0);
  }
  return total / static_cast<double>(from.size());
}

inline double sts_similarity(const SegmentEmbedding& a,
                             const SegmentEmbedding& b) {
  return (std::clamp(dot(a.vector, b.vector), -1.0, 1.0) + 1.0) / 2.0;
}

inline double mean_best_segment(std::span<const SegmentEmbedding> from,
                                std::span<const SegmentEmbedding> to) {
  double total = 0.0;
  for (const auto& f : from) {
    double best = 0.0;
    for (const auto& t : to) best = std::max(best, sts_similarity(f, t));
    total += best;
  }
  return total / static_cast<double>(from.size());
}

}  // namespace detail

// Greedy token matching: precision averages each candidate token's best
// cosine against the reference, recall the reverse. No IDF weighting and no
// baseline rescaling.
inline PrfScore greedy_match_score(const EmbeddingMatrix& candidate,
                                   const EmbeddingMatrix& reference) {
  if (candidate.empty() || reference.empty()) return make_prf(0, 0, true);
  if (candidate.dim() != reference.dim())
    throw DataError("embedding dimension mismatch: " +
                    std::to_string(candidate.dim()) + " vs " +
                    std::to_string(reference.dim()));
  if (candidate.model_id() != reference.model_id() ||
      candidate.layer() != reference.layer())
    throw DataError("embeddings come from different model/layer");
  return make_prf(detail::mean_best_match(candidate, reference),
                  detail::mean_best_match(reference, candidate));
}

// Segment-level similarity matching; cosine x is mapped to (x + 1) / 2.
inline PrfScore sts_prf(std::span<const SegmentEmbedding> candidate,
                        std::span<const SegmentEmbedding> reference) {
  if (candidate.empty() || reference.empty()) return make_prf(0, 0, true);
  const auto g = candidate.front().granularity;
  auto same = [g](const SegmentEmbedding& s) { return s.granularity == g; };
  if (!std::all_of(candidate.begin(), candidate.end(), same) ||
      !std::all_of(reference.begin(), reference.end(), same))
    throw DataError("segment granularity mismatch");
  const auto dim = candidate.front().vector.size();
  auto dim_ok = [dim](const SegmentEmbedding& s) {
    return s.vector.size() == dim;
  };
  if (!std::all_of(candidate.begin(), candidate.end(), dim_ok) ||
      !std::all_of(reference.begin(), reference.end(), dim_ok))
    throw DataError("segment embedding dimension mismatch");
  return make_prf(detail::mean_best_segment(candidate, reference),
                  detail::mean_best_segment(reference, candidate));
}

}  // namespace ffci
