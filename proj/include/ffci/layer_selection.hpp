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
#include <cstdio>
#include <functional>
#include <future>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ffci/corpus.hpp"
#include "ffci/correlation.hpp"
#include "ffci/error.hpp"

namespace ffci {

struct Candidate {
  std::string model_id;
  int layer = 0;

  friend auto operator<=>(const Candidate&, const Candidate&) = default;
};

// (model, layer, pair_id) -> Pearson r; an empty optional marks a cell that
// could not be computed.
class CorrelationTable {
 public:
  using Key = std::tuple<std::string, int, std::string>;

  void set(const std::string& model_id, int layer, const std::string& pair_id,
           std::optional<double> r) {
    if (r && !(*r >= -1.0 && *r <= 1.0))
      throw DataError("correlation outside [-1,1]");
    cells_[{model_id, layer, pair_id}] = r;
  }

  bool contains(const std::string& model_id, int layer,
                const std::string& pair_id) const {
    return cells_.count({model_id, layer, pair_id}) > 0;
  }

  std::optional<double> get(const std::string& model_id, int layer,
                            const std::string& pair_id) const {
    auto it = cells_.find({model_id, layer, pair_id});
    return it == cells_.end() ? std::nullopt : it->second;
  }

  std::vector<Candidate> candidates() const {
    std::set<Candidate> out;
    for (const auto& [k, v] : cells_) out.insert({std::get<0>(k), std::get<1>(k)});
    return {out.begin(), out.end()};
  }

  std::vector<std::string> pair_ids() const {
    std::set<std::string> out;
    for (const auto& [k, v] : cells_) out.insert(std::get<2>(k));
    return {out.begin(), out.end()};
  }

  CorrelationTable for_model(const std::string& model_id) const {
    CorrelationTable t;
    for (const auto& [k, v] : cells_)
      if (std::get<0>(k) == model_id) t.cells_.emplace(k, v);
    return t;
  }

  void merge(const CorrelationTable& other) {
    for (const auto& [k, v] : other.cells_) cells_[k] = v;
  }

  bool empty() const { return cells_.empty(); }
  std::size_t size() const { return cells_.size(); }
  const std::map<Key, std::optional<double>>& cells() const { return cells_; }

 private:
  std::map<Key, std::optional<double>> cells_;
};

// Per-instance score of a metric at a given layer. Throws ProviderError when
// the layer's embeddings are unavailable.
using LayerScorer = std::function<double(const EvalInstance&, int layer)>;
using PairKey = std::function<std::string(const EvalInstance&)>;

inline std::string system_pair_key(const EvalInstance& inst) {
  return inst.system_name;
}

// One Pearson value per (layer, pair_id) between metric and human scores.
// A layer whose scorer fails with ProviderError yields absent cells; the
// sweep carries on with the remaining layers.
inline CorrelationTable layer_sweep(const std::string& model_id,
                                    const LayerScorer& scorer,
                                    const std::vector<int>& layers,
                                    const std::map<std::string, double>& human,
                                    const std::vector<EvalInstance>& instances,
                                    const PairKey& pair_key = system_pair_key,
                                    bool parallel = true) {
  std::vector<const EvalInstance*> scored;
  std::set<std::string> pairs;
  for (const auto& inst : instances) {
    if (human.count(inst.id) == 0) continue;
    scored.push_back(&inst);
    pairs.insert(pair_key(inst));
  }

  CorrelationTable table;
  std::mutex mu;
  auto run_layer = [&](int layer) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
        xy;
    bool available = true;
    try {
      for (const auto* inst : scored) {
        auto& cell = xy[pair_key(*inst)];
        cell.first.push_back(scorer(*inst, layer));
        cell.second.push_back(human.at(inst->id));
      }
    } catch (const ProviderError&) {
      available = false;
    }
    std::lock_guard lock(mu);
    for (const auto& p : pairs) {
      std::optional<double> r;
      if (available) {
        const auto& [xs, ys] = xy[p];
        try {
          r = pearson(xs, ys);
        } catch (const UndefinedCorrelation&) {
        }
      }
      table.set(model_id, layer, p, r);
    }
  };

  if (parallel) {
    std::vector<std::future<void>> jobs;
    for (int layer : layers)
      jobs.push_back(std::async(std::launch::async, run_layer, layer));
    for (auto& j : jobs) j.get();
  } else {
    for (int layer : layers) run_layer(layer);
  }
  return table;
}

struct RankedCandidate {
  Candidate candidate;
  double mean_rank = 0.0;
};

// Ranks every (model, layer) within each pair_id by descending correlation
// (ties share the average rank) and orders candidates by mean rank, then
// lower layer, then model id. Candidates with absent cells are left out.
inline std::vector<RankedCandidate> rank_candidates(const CorrelationTable& table) {
  if (table.empty()) throw DataError("layer selection on an empty table");
  const auto pairs = table.pair_ids();
  std::vector<Candidate> usable;
  for (const auto& c : table.candidates()) {
    bool complete = true;
    for (const auto& p : pairs) {
      if (!table.contains(c.model_id, c.layer, p))
        throw DataError("correlation table incomplete: " + c.model_id +
                        " layer " + std::to_string(c.layer) + " lacks " + p);
      if (!table.get(c.model_id, c.layer, p)) complete = false;
    }
    if (complete) usable.push_back(c);
  }
  if (usable.empty()) throw DataError("no candidate has a complete row");

  std::vector<double> rank_sum(usable.size(), 0.0);
  for (const auto& p : pairs) {
    std::vector<double> neg;
    for (const auto& c : usable) neg.push_back(-*table.get(c.model_id, c.layer, p));
    auto ranks = average_ranks(neg);
    for (std::size_t i = 0; i < usable.size(); ++i) rank_sum[i] += ranks[i];
  }

  std::vector<RankedCandidate> out;
  for (std::size_t i = 0; i < usable.size(); ++i)
    out.push_back({usable[i], rank_sum[i] / static_cast<double>(pairs.size())});
  std::sort(out.begin(), out.end(),
            [](const RankedCandidate& a, const RankedCandidate& b) {
              if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
              if (a.candidate.layer != b.candidate.layer)
                return a.candidate.layer < b.candidate.layer;
              return a.candidate.model_id < b.candidate.model_id;
            });
  return out;
}

inline Candidate select_by_average_rank(const CorrelationTable& table) {
  return rank_candidates(table).front().candidate;
}

// CSV with header model,layer,pair_id,pearson; absent cells are empty.
inline void write_correlation_csv(std::ostream& out, const CorrelationTable& t) {
  out << "model,layer,pair_id,pearson\n";
  for (const auto& [k, v] : t.cells()) {
    out << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k)
        << ',';
    if (v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", *v);
      out << buf;
    }
    out << '\n';
  }
}

inline CorrelationTable read_correlation_csv(std::istream& in) {
  CorrelationTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 || line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 4)
      throw DataError("correlation csv line " + std::to_string(lineno) +
                      ": expected 4 fields");
    try {
      std::optional<double> r;
      if (!f[3].empty()) r = std::stod(f[3]);
      t.set(f[0], std::stoi(f[1]), f[2], r);
    } catch (const std::logic_error&) {
      throw DataError("correlation csv line " + std::to_string(lineno) +
                      ": bad number");
    }
  }
  return t;
}

}  // namespace ffci
