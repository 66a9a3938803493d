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

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ffci/corpus.hpp"
#include "ffci/error.hpp"

namespace ffci {

struct WorkerProfile {
  std::string worker_id;
  std::vector<double> raw_scores;
  double mean = 0.0;
  double stdev = 0.0;  // population

  static WorkerProfile from_scores(std::string worker_id,
                                   std::vector<double> scores) {
    WorkerProfile w{std::move(worker_id), std::move(scores), 0.0, 0.0};
    if (w.raw_scores.empty()) return w;
    const auto n = static_cast<double>(w.raw_scores.size());
    for (double x : w.raw_scores) w.mean += x;
    w.mean /= n;
    double ss = 0.0;
    for (double x : w.raw_scores) ss += (x - w.mean) * (x - w.mean);
    w.stdev = std::sqrt(ss / n);
    return w;
  }
};

struct NormalizedScores {
  std::vector<double> z;
  bool zero_variance = false;
};

// (x - mean) / population sd. A constant worker maps to zeros and is flagged.
inline NormalizedScores zscore_normalize(const WorkerProfile& worker) {
  if (worker.raw_scores.size() < 2)
    throw DataError("z-score needs at least 2 scores for worker '" +
                    worker.worker_id + "'");
  NormalizedScores out;
  out.z.reserve(worker.raw_scores.size());
  if (!(worker.stdev > 0.0)) {
    out.z.assign(worker.raw_scores.size(), 0.0);
    out.zero_variance = true;
    return out;
  }
  for (double x : worker.raw_scores)
    out.z.push_back((x - worker.mean) / worker.stdev);
  return out;
}

inline constexpr std::size_t kControlsPerHit = 10;
inline constexpr std::size_t kControlsToPass = 7;
inline constexpr double kDefaultControlTolerance = 25.0;

struct QualityControlResult {
  std::string hit_id;
  std::size_t correct_count = 0;
  bool passed = false;
};

// A control answer is correct when it lies within `tolerance` of the expected
// slider value; a HIT passes with at least 7 of its 10 controls correct.
inline QualityControlResult quality_control_check(
    const std::vector<AnnotationRecord>& hit_records,
    double tolerance = kDefaultControlTolerance) {
  QualityControlResult res;
  if (!hit_records.empty()) res.hit_id = hit_records.front().hit();
  std::size_t controls = 0;
  for (const auto& r : hit_records) {
    if (!r.is_control) continue;
    ++controls;
    if (r.control_expected &&
        std::abs(r.raw_score - *r.control_expected) <= tolerance)
      ++res.correct_count;
  }
  if (controls != kControlsPerHit)
    throw DataError("HIT '" + res.hit_id + "' has " + std::to_string(controls) +
                    " control items, expected " +
                    std::to_string(kControlsPerHit));
  res.passed = res.correct_count >= kControlsToPass;
  return res;
}

struct AggregatedAnnotations {
  std::map<std::string, double> scores;  // item_id -> mean z-score
  std::vector<std::string> missing;      // items with no passing record
  std::vector<QualityControlResult> hits;
  std::vector<std::string> zero_variance_workers;
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Quality-controls every HIT of the aspect, z-scores each worker over the
// non-control items of their passing HITs, then averages per item.
inline AggregatedAnnotations aggregate_annotations(
    const std::vector<AnnotationRecord>& records, Aspect aspect,
    double tolerance = kDefaultControlTolerance) {
  std::map<std::string, std::vector<AnnotationRecord>> by_hit;
  std::set<std::string> items;
  for (const auto& r : records) {
    if (r.aspect != aspect) continue;
    by_hit[r.hit()].push_back(r);
    if (!r.is_control) items.insert(r.item_id);
  }

  AggregatedAnnotations out;
  // worker -> (item, raw) over passing HITs
  std::map<std::string, std::vector<std::pair<std::string, double>>> by_worker;
  for (const auto& [hit, recs] : by_hit) {
    auto qc = quality_control_check(recs, tolerance);
    out.hits.push_back(qc);
    if (!qc.passed) continue;
    for (const auto& r : recs)
      if (!r.is_control) by_worker[r.worker_id].emplace_back(r.item_id, r.raw_score);
  }

  std::map<std::string, std::vector<double>> per_item;
  for (const auto& [worker, entries] : by_worker) {
    std::vector<double> raw;
    for (const auto& e : entries) raw.push_back(e.second);
    auto norm = zscore_normalize(WorkerProfile::from_scores(worker, raw));
    if (norm.zero_variance) out.zero_variance_workers.push_back(worker);
    for (std::size_t i = 0; i < entries.size(); ++i)
      per_item[entries[i].first].push_back(norm.z[i]);
  }

  for (const auto& item : items) {
    auto it = per_item.find(item);
    if (it == per_item.end())
      out.missing.push_back(item);
    else
      out.scores[item] = mean_of(it->second);
  }
  return out;
}

}  // namespace ffci
