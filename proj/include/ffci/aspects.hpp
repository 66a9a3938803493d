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
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ffci/corpus.hpp"
#include "ffci/error.hpp"
#include "ffci/lexical.hpp"

namespace ffci {

// A scalar aspect score. `degenerate` marks the zero returned for an empty
// input.
struct Score {
  double value = 0.0;
  bool degenerate = false;
};

// Metric selectors usable for faithfulness, focus and coverage.
enum class MetricKind { rouge1, rouge2, rougeL, embed, sts };

inline std::string to_string(MetricKind m) {
  switch (m) {
    case MetricKind::rouge1: return "rouge1";
    case MetricKind::rouge2: return "rouge2";
    case MetricKind::rougeL: return "rougeL";
    case MetricKind::embed: return "embed";
    case MetricKind::sts: return "sts";
  }
  return "?";
}

inline MetricKind parse_metric(std::string_view s) {
  if (s == "rouge1") return MetricKind::rouge1;
  if (s == "rouge2") return MetricKind::rouge2;
  if (s == "rougeL") return MetricKind::rougeL;
  if (s == "embed") return MetricKind::embed;
  if (s == "sts") return MetricKind::sts;
  throw UsageError("unknown metric '" + std::string(s) + "'");
}

inline bool is_lexical(MetricKind m) {
  return m == MetricKind::rouge1 || m == MetricKind::rouge2 ||
         m == MetricKind::rougeL;
}

// Two-text metric with the candidate first.
using TextMetric =
    std::function<PrfScore(std::string_view candidate,
                           std::string_view reference)>;

inline TextMetric lexical_metric(MetricKind kind) {
  switch (kind) {
    case MetricKind::rouge1:
      return [](std::string_view c, std::string_view r) {
        return rouge_n(tokenize(c), tokenize(r), 1);
      };
    case MetricKind::rouge2:
      return [](std::string_view c, std::string_view r) {
        return rouge_n(tokenize(c), tokenize(r), 2);
      };
    case MetricKind::rougeL:
      return [](std::string_view c, std::string_view r) {
        return rouge_l(tokenize(c), tokenize(r));
      };
    default:
      throw UsageError(to_string(kind) + " is not a lexical metric");
  }
}

// Mean of the n largest values; all values when n exceeds the list length.
inline double avg_top_n(std::span<const double> scores, std::size_t n) {
  if (scores.empty()) throw DataError("avg_top_n: empty score list");
  if (n == 0) throw DataError("avg_top_n: n must be positive");
  std::vector<double> sorted(scores.begin(), scores.end());
  const auto k = std::min(n, sorted.size());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<long>(k),
                    sorted.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += sorted[i];
  return sum / static_cast<double>(k);
}

struct FaithfulnessConfig {
  MetricKind metric = MetricKind::rouge2;
  std::size_t top_n = 2;
  std::optional<std::string> model_id;  // embed only
  std::optional<int> layer;             // embed only
  // Only the first N source sentences are matched against; unset = all.
  std::optional<std::size_t> max_source_sentences;

  // top_n = 2 for ROUGE, 3 for the embedding-based metrics.
  static FaithfulnessConfig defaults(MetricKind metric) {
    FaithfulnessConfig cfg;
    cfg.metric = metric;
    cfg.top_n = is_lexical(metric) ? 2 : 3;
    return cfg;
  }

  void validate() const {
    if (top_n == 0) throw UsageError("faithfulness top_n must be >= 1");
    bool has_model = model_id.has_value() && layer.has_value();
    if ((metric == MetricKind::embed) != has_model)
      throw UsageError("faithfulness model/layer required iff metric is embed");
  }
};

// Mean over summary sentences of the AvgTopN of the sentence's F1 against
// every source sentence.
inline Score faithfulness_score(const SegmentedText& summary,
                                const SegmentedText& source,
                                const FaithfulnessConfig& cfg,
                                const TextMetric& metric_eval) {
  cfg.validate();
  if (summary.sentence_count() == 0) return {0.0, true};
  std::size_t sources = source.sentence_count();
  if (cfg.max_source_sentences)
    sources = std::min(sources, *cfg.max_source_sentences);
  if (sources == 0) throw DataError("faithfulness: source has no sentences");

  double total = 0.0;
  std::vector<double> pair_scores(sources);
  for (std::size_t i = 0; i < summary.sentence_count(); ++i) {
    for (std::size_t j = 0; j < sources; ++j)
      pair_scores[j] = metric_eval(summary.sentence(i), source.sentence(j)).f1;
    total += avg_top_n(pair_scores, cfg.top_n);
  }
  return {total / static_cast<double>(summary.sentence_count()), false};
}

// Precision of the system summary against the reference.
inline Score focus_score(std::string_view system, std::string_view reference,
                         const TextMetric& metric) {
  if (detail::trim(system).empty()) return {0.0, true};
  return {metric(system, reference).precision, false};
}

// Recall of the system summary against the reference.
inline Score coverage_score(std::string_view system,
                            std::string_view reference,
                            const TextMetric& metric) {
  if (detail::trim(system).empty() || detail::trim(reference).empty())
    return {0.0, true};
  return {metric(system, reference).recall, false};
}

}  // namespace ffci
