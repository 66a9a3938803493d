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
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ffci/corpus.hpp"
#include "ffci/error.hpp"

namespace ffci {

// Static word vectors in GloVe text format: "word v1 v2 ... vd" per line.
class WordVectors {
 public:
  WordVectors() = default;

  void add(std::string word, std::vector<double> vec) {
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_) throw DataError("word vector dimension mismatch");
    table_[std::move(word)] = std::move(vec);
  }

  static WordVectors load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open word vectors " + path.string());
    WordVectors wv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ss(line);
      std::string word;
      if (!(ss >> word)) continue;
      std::vector<double> v;
      double x;
      while (ss >> x) v.push_back(x);
      if (v.empty())
        throw DataError("word vectors line " + std::to_string(lineno) +
                        ": no components");
      wv.add(std::move(word), std::move(v));
    }
    return wv;
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return table_.size(); }
  const std::vector<double>* find(const std::string& word) const {
    auto it = table_.find(word);
    return it == table_.end() ? nullptr : &it->second;
  }

  // Mean of the vectors of known tokens; empty when none are known.
  std::vector<double> mean(const Tokens& tokens) const {
    std::vector<double> acc(dim_, 0.0);
    std::size_t known = 0;
    for (const auto& t : tokens) {
      if (const auto* v = find(t)) {
        for (std::size_t k = 0; k < dim_; ++k) acc[k] += (*v)[k];
        ++known;
      }
    }
    if (known == 0) return {};
    for (auto& x : acc) x /= static_cast<double>(known);
    return acc;
  }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

using EntityExtractor =
    std::function<std::vector<std::string>(std::string_view sentence)>;

// Maximal runs of capitalized words, lowercased and space-joined. A run made
// only of the sentence-initial word is ignored.
inline std::vector<std::string> capitalized_entities(std::string_view sentence) {
  std::vector<std::string> words;
  std::istringstream ss{std::string(sentence)};
  std::string w;
  while (ss >> w) {
    std::size_t b = 0, e = w.size();
    while (b < e && !detail::is_word_char(w[b])) ++b;
    while (e > b && !detail::is_word_char(w[e - 1])) --e;
    words.push_back(w.substr(b, e - b));
  }
  std::set<std::string> found;
  std::size_t i = 0;
  while (i < words.size()) {
    auto cap = [&](std::size_t k) {
      return !words[k].empty() &&
             std::isupper(static_cast<unsigned char>(words[k][0]));
    };
    if (!cap(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string run;
    while (j < words.size() && cap(j)) {
      if (!run.empty()) run.push_back(' ');
      run += detail::ascii_lower(words[j]);
      ++j;
    }
    if (!(i == 0 && j == 1)) found.insert(run);
    i = j;
  }
  return {found.begin(), found.end()};
}

// |A ∩ B| / min(|A|, |B|); 0 when either set is empty.
inline double entity_overlap(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() || sb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& x : sa) common += sb.count(x);
  return static_cast<double>(common) /
         static_cast<double>(std::min(sa.size(), sb.size()));
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty() || a.size() != b.size()) return 0.0;
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  if (aa <= 0.0 || bb <= 0.0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

enum class EntitySource { capitalized_heuristic, provider };

struct CoherenceConfig {
  double lambda = 0.5;
  EntitySource ne_extractor = EntitySource::capitalized_heuristic;
  std::string embedding_source = "glove";

  void validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0))
      throw UsageError("coherence lambda must lie in [0,1]");
  }
};

// Entity overlap and word-vector cosine of one adjacent pair.
struct AdjacentSimilarity {
  double ne_sim = 0.0;
  double cos_sim = 0.0;
};

inline std::vector<AdjacentSimilarity> adjacent_similarities(
    const SegmentedText& summary, const WordVectors& vectors,
    const EntityExtractor& entities) {
  std::vector<AdjacentSimilarity> out;
  if (summary.sentence_count() < 2) return out;
  std::vector<std::vector<std::string>> ents;
  std::vector<std::vector<double>> means;
  for (std::size_t i = 0; i < summary.sentence_count(); ++i) {
    ents.push_back(entities(summary.sentence(i)));
    means.push_back(vectors.mean(summary.tokens_per_sentence[i]));
  }
  for (std::size_t i = 0; i + 1 < summary.sentence_count(); ++i)
    out.push_back({entity_overlap(ents[i], ents[i + 1]),
                   cosine(means[i], means[i + 1])});
  return out;
}

// Mean over adjacent pairs of lambda * NESim + (1 - lambda) * CosSim. Absent
// for summaries with fewer than two sentences.
inline std::optional<double> coherence_baseline_score(
    const SegmentedText& summary, const CoherenceConfig& cfg,
    const WordVectors& vectors,
    const EntityExtractor& entities = capitalized_entities) {
  cfg.validate();
  auto pairs = adjacent_similarities(summary, vectors, entities);
  if (pairs.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& p : pairs)
    total += cfg.lambda * p.ne_sim + (1.0 - cfg.lambda) * p.cos_sim;
  return total / static_cast<double>(pairs.size());
}

enum class Aggregation { mean, max, min };

inline Aggregation parse_aggregation(std::string_view s) {
  if (s == "mean") return Aggregation::mean;
  if (s == "max") return Aggregation::max;
  if (s == "min") return Aggregation::min;
  throw UsageError("unknown aggregation '" + std::string(s) + "'");
}

inline std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::mean: return "mean";
    case Aggregation::max: return "max";
    case Aggregation::min: return "min";
  }
  return "?";
}

using SentencePair = std::pair<std::string, std::string>;

// Returns P(second follows first) for each pair, in order.
using NspProbability =
    std::function<std::vector<double>(const std::vector<SentencePair>&)>;

inline std::optional<double> nsp_score(const SegmentedText& summary,
                                       const NspProbability& nsp_prob,
                                       Aggregation aggregation = Aggregation::mean) {
  if (summary.sentence_count() < 2) return std::nullopt;
  std::vector<SentencePair> pairs;
  for (std::size_t i = 0; i + 1 < summary.sentence_count(); ++i)
    pairs.emplace_back(std::string(summary.sentence(i)),
                       std::string(summary.sentence(i + 1)));
  auto probs = nsp_prob(pairs);
  if (probs.size() != pairs.size())
    throw ProviderError("nsp: expected " + std::to_string(pairs.size()) +
                        " probabilities, got " + std::to_string(probs.size()));
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0))
      throw ProviderError("nsp: probability for pair " + std::to_string(i) +
                          " outside [0,1]");
  switch (aggregation) {
    case Aggregation::max:
      return *std::max_element(probs.begin(), probs.end());
    case Aggregation::min:
      return *std::min_element(probs.begin(), probs.end());
    case Aggregation::mean:
      break;
  }
  double total = 0.0;
  for (double p : probs) total += p;
  return total / static_cast<double>(probs.size());
}

}  // namespace ffci
