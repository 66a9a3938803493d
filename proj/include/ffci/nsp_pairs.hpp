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
#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffci/corpus.hpp"
#include "ffci/error.hpp"

namespace ffci {

enum class NegativeType { type1, type2, type3, type4 };

inline std::string to_string(NegativeType t) {
  switch (t) {
    case NegativeType::type1: return "type1";
    case NegativeType::type2: return "type2";
    case NegativeType::type3: return "type3";
    case NegativeType::type4: return "type4";
  }
  return "?";
}

inline NegativeType parse_negative_type(std::string_view s) {
  if (s == "type1") return NegativeType::type1;
  if (s == "type2") return NegativeType::type2;
  if (s == "type3") return NegativeType::type3;
  if (s == "type4") return NegativeType::type4;
  throw DataError("unknown negative type '" + std::string(s) + "'");
}

// A training pair for next-sentence prediction. negative_type is set iff the
// pair is a negative.
struct NspPair {
  std::string first;
  std::string second;
  bool positive = true;
  std::optional<NegativeType> negative_type;

  friend bool operator==(const NspPair&, const NspPair&) = default;
};

struct NspBudget {
  std::size_t positives = 0;
  std::size_t negatives = 0;

  static NspBudget balanced(std::size_t total) {
    return {total - total / 2, total / 2};
  }
};

// Share of each negative type, in fiftieths, for training variants 1..5:
// type1 flipped, type2 cross-document, type3 corrupted repeat, type4
// same-document arbitrary position.
inline std::array<std::size_t, 4> variant_weights(int variant) {
  switch (variant) {
    case 1: return {50, 0, 0, 0};
    case 2: return {0, 50, 0, 0};
    case 3: return {25, 25, 0, 0};
    case 4: return {0, 25, 5, 20};
    case 5: return {25, 0, 5, 20};
    default:
      throw UsageError("nsp variant must be in 1..5, got " +
                       std::to_string(variant));
  }
}

// Largest-remainder apportionment of `negatives` across the four types;
// ties in the remainder go to the lower type.
inline std::array<std::size_t, 4> negative_composition(int variant,
                                                        std::size_t negatives) {
  const auto w = variant_weights(variant);
  std::array<std::size_t, 4> counts{};
  std::array<std::size_t, 4> rem{};
  std::size_t assigned = 0;
  for (std::size_t t = 0; t < 4; ++t) {
    counts[t] = negatives * w[t] / 50;
    rem[t] = negatives * w[t] % 50;
    assigned += counts[t];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < negatives; ++k, ++assigned)
    ++counts[order[k % 4]];
  return counts;
}

namespace detail {

// Uniform draw in [0, n) by rejection. std::uniform_int_distribution is
// implementation-defined, so it would break cross-platform determinism.
inline std::size_t draw(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[draw(rng, i)]);
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(s)};
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

}  // namespace detail

// Duplicates max(1, floor(10%)) of the whitespace tokens in place.
inline std::string corrupt_with_repetition(std::string_view sentence,
                                           std::mt19937_64& rng) {
  auto words = detail::split_ws(sentence);
  if (words.empty()) return std::string(sentence);
  const std::size_t k = std::max<std::size_t>(1, words.size() / 10);
  std::vector<std::size_t> idx(words.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i)
    std::swap(idx[i], idx[i + detail::draw(rng, idx.size() - i)]);
  std::vector<bool> dup(words.size(), false);
  for (std::size_t i = 0; i < k; ++i) dup[idx[i]] = true;
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (int rep = 0; rep < (dup[i] ? 2 : 1); ++rep) {
      if (!out.empty()) out.push_back(' ');
      out += words[i];
    }
  }
  return out;
}

// Builds positives (adjacent sentences in order) and negatives composed per
// the variant. Deterministic for a fixed seed; output is shuffled.
inline std::vector<NspPair> build_nsp_pairs(
    const std::vector<SegmentedText>& articles, int variant, NspBudget budget,
    std::uint64_t seed) {
  const auto composition = negative_composition(variant, budget.negatives);
  std::mt19937_64 rng(seed);

  struct Loc {
    std::size_t doc;
    std::size_t sent;
  };
  std::vector<Loc> adjacent, sentences;
  std::vector<std::size_t> docs_with_text, docs_with_three;
  for (std::size_t d = 0; d < articles.size(); ++d) {
    const auto n = articles[d].sentence_count();
    for (std::size_t i = 0; i < n; ++i) {
      sentences.push_back({d, i});
      if (i + 1 < n) adjacent.push_back({d, i});
    }
    if (n >= 1) docs_with_text.push_back(d);
    if (n >= 3) docs_with_three.push_back(d);
  }
  auto text = [&](std::size_t d, std::size_t i) {
    return std::string(articles[d].sentence(i));
  };
  auto shortfall = [](const std::string& what, std::size_t need,
                      std::size_t have) {
    return DataError("nsp pairs: need " + std::to_string(need) + " " + what +
                     " but only " + std::to_string(have) +
                     " available (short by " + std::to_string(need - have) +
                     ")");
  };

  if (budget.positives > adjacent.size())
    throw shortfall("adjacent pairs for positives", budget.positives,
                    adjacent.size());
  if (composition[0] > adjacent.size())
    throw shortfall("adjacent pairs for type1", composition[0],
                    adjacent.size());
  if (composition[1] > 0 && docs_with_text.size() < 2)
    throw shortfall("documents for type2", 2, docs_with_text.size());
  if (composition[2] > 0 && sentences.empty())
    throw shortfall("sentences for type3", 1, 0);
  if (composition[3] > 0 && docs_with_three.empty())
    throw shortfall("documents with >= 3 sentences for type4", 1, 0);

  std::vector<NspPair> out;
  out.reserve(budget.positives + budget.negatives);

  auto pool = adjacent;
  detail::shuffle(pool, rng);
  for (std::size_t k = 0; k < budget.positives; ++k)
    out.push_back({text(pool[k].doc, pool[k].sent),
                   text(pool[k].doc, pool[k].sent + 1), true, std::nullopt});

  pool = adjacent;
  detail::shuffle(pool, rng);
  for (std::size_t k = 0; k < composition[0]; ++k)
    out.push_back({text(pool[k].doc, pool[k].sent + 1),
                   text(pool[k].doc, pool[k].sent), false,
                   NegativeType::type1});

  for (std::size_t k = 0; k < composition[1]; ++k) {
    auto ia = detail::draw(rng, docs_with_text.size());
    auto ib = detail::draw(rng, docs_with_text.size() - 1);
    if (ib >= ia) ++ib;
    auto a = docs_with_text[ia], b = docs_with_text[ib];
    out.push_back({text(a, detail::draw(rng, articles[a].sentence_count())),
                   text(b, detail::draw(rng, articles[b].sentence_count())),
                   false, NegativeType::type2});
  }

  for (std::size_t k = 0; k < composition[2]; ++k) {
    const auto& loc = sentences[detail::draw(rng, sentences.size())];
    auto first = text(loc.doc, loc.sent);
    auto second = corrupt_with_repetition(first, rng);
    out.push_back({std::move(first), std::move(second), false,
                   NegativeType::type3});
  }

  for (std::size_t k = 0; k < composition[3]; ++k) {
    auto d = docs_with_three[detail::draw(rng, docs_with_three.size())];
    const auto n = articles[d].sentence_count();
    auto i = detail::draw(rng, n);
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && j != i + 1) candidates.push_back(j);
    auto j = candidates[detail::draw(rng, candidates.size())];
    out.push_back({text(d, i), text(d, j), false, NegativeType::type4});
  }

  detail::shuffle(out, rng);
  return out;
}

// JSONL export with keys first, second, label, negative_type.
inline void write_nsp_pairs(std::ostream& out, const std::vector<NspPair>& pairs) {
  for (const auto& p : pairs) {
    nlohmann::json obj = {{"first", p.first},
                          {"second", p.second},
                          {"label", p.positive ? "positive" : "negative"},
                          {"negative_type", nullptr}};
    if (p.negative_type) obj["negative_type"] = to_string(*p.negative_type);
    out << obj.dump() << '\n';
  }
}

inline std::vector<NspPair> read_nsp_pairs(std::istream& in) {
  std::vector<NspPair> out;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line) {
    NspPair p;
    p.first = detail::require_string(obj, "first", line);
    p.second = detail::require_string(obj, "second", line);
    auto label = detail::require_string(obj, "label", line);
    if (label != "positive" && label != "negative")
      throw DataError("line " + std::to_string(line) + ": bad label");
    p.positive = label == "positive";
    if (auto it = obj.find("negative_type"); it != obj.end() && it->is_string())
      p.negative_type = parse_negative_type(it->get<std::string>());
    if (p.positive == p.negative_type.has_value())
      throw DataError("line " + std::to_string(line) +
                      ": negative_type must be present iff label is negative");
    out.push_back(std::move(p));
  });
  return out;
}

}  // namespace ffci
