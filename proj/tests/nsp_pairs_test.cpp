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

#include <chrono>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

#include "ffci/nsp_pairs.hpp"

using namespace ffci;

namespace {

std::vector<SegmentedText> synthetic_articles(std::size_t docs, std::size_t sentences) {
  std::vector<SegmentedText> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    for (std::size_t i = 0; i < sentences; ++i)
      text += "Doc" + std::to_string(d) + " sentence " + std::to_string(i) +
              " has some words in it. ";
    out.push_back(segment_sentences(text));
  }
  return out;
}

std::map<NegativeType, std::size_t> count_types(const std::vector<NspPair>& pairs) {
  std::map<NegativeType, std::size_t> out;
  for (const auto& p : pairs)
    if (p.negative_type) ++out[*p.negative_type];
  return out;
}

// "DocD sentence I ..." -> (D, I)
std::pair<int, int> locate(const std::string& s) {
  int d = -1, i = -1;
  std::sscanf(s.c_str(), "Doc%d sentence %d", &d, &i);
  return {d, i};
}

}  // namespace

TEST(NegativeComposition, Variants) {
  using A = std::array<std::size_t, 4>;
  EXPECT_EQ(negative_composition(5, 100), (A{50, 0, 10, 40}));
  EXPECT_EQ(negative_composition(4, 100), (A{0, 50, 10, 40}));
  EXPECT_EQ(negative_composition(3, 100), (A{50, 50, 0, 0}));
  EXPECT_EQ(negative_composition(1, 7), (A{7, 0, 0, 0}));
  EXPECT_THROW(negative_composition(6, 10), UsageError);
}

TEST(NegativeComposition, SumsAndStaysWithinOneOfExactShare) {
  for (int v = 1; v <= 5; ++v) {
    auto w = variant_weights(v);
    for (std::size_t n = 0; n < 300; ++n) {
      auto c = negative_composition(v, n);
      ASSERT_EQ(c[0] + c[1] + c[2] + c[3], n);
      for (std::size_t t = 0; t < 4; ++t) {
        double exact = static_cast<double>(n * w[t]) / 50.0;
        ASSERT_LT(std::abs(static_cast<double>(c[t]) - exact), 1.0);
      }
    }
  }
}

TEST(BuildNspPairs, CompositionAndStructure) {
  auto articles = synthetic_articles(20, 6);
  auto pairs = build_nsp_pairs(articles, 5, {50, 100}, 1234);
  ASSERT_EQ(pairs.size(), 150u);
  auto types = count_types(pairs);
  EXPECT_EQ(types[NegativeType::type1], 50u);
  EXPECT_EQ(types[NegativeType::type2], 0u);
  EXPECT_EQ(types[NegativeType::type3], 10u);
  EXPECT_EQ(types[NegativeType::type4], 40u);
  for (const auto& p : pairs) {
    auto [d1, i1] = locate(p.first);
    if (p.positive) {
      auto [d2, i2] = locate(p.second);
      EXPECT_EQ(d1, d2);
      EXPECT_EQ(i2, i1 + 1);
      continue;
    }
    switch (*p.negative_type) {
      case NegativeType::type1: {
        auto [d2, i2] = locate(p.second);
        EXPECT_EQ(d1, d2);
        EXPECT_EQ(i2 + 1, i1);
        break;
      }
      case NegativeType::type2:
        break;
      case NegativeType::type3: {
        auto words = detail::split_ws(p.first);
        auto corrupted = detail::split_ws(p.second);
        EXPECT_EQ(corrupted.size(), words.size() + std::max<std::size_t>(1, words.size() / 10));
        break;
      }
      case NegativeType::type4: {
        auto [d2, i2] = locate(p.second);
        EXPECT_EQ(d1, d2);
        EXPECT_NE(i2, i1);
        EXPECT_NE(i2, i1 + 1);
        break;
      }
    }
  }
}

TEST(BuildNspPairs, CrossDocumentNegativesUseDistinctDocuments) {
  auto articles = synthetic_articles(3, 2);
  auto pairs = build_nsp_pairs(articles, 2, {0, 200}, 7);
  ASSERT_EQ(pairs.size(), 200u);
  for (const auto& p : pairs) {
    ASSERT_EQ(p.negative_type, NegativeType::type2);
    EXPECT_NE(locate(p.first).first, locate(p.second).first);
  }
}

TEST(BuildNspPairs, DeterministicForSeed) {
  auto articles = synthetic_articles(10, 5);
  auto a = build_nsp_pairs(articles, 4, {20, 20}, 99);
  auto b = build_nsp_pairs(articles, 4, {20, 20}, 99);
  auto c = build_nsp_pairs(articles, 4, {20, 20}, 100);
  std::ostringstream sa, sb, sc;
  write_nsp_pairs(sa, a);
  write_nsp_pairs(sb, b);
  write_nsp_pairs(sc, c);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str(), sc.str());
}

TEST(BuildNspPairs, ShortfallStatesAmount) {
  auto articles = synthetic_articles(2, 3);  // 4 adjacent pairs
  try {
    build_nsp_pairs(articles, 1, {10, 0}, 1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("short by 6"), std::string::npos) << e.what();
  }
  EXPECT_THROW(build_nsp_pairs(synthetic_articles(1, 5), 2, {1, 1}, 1), DataError);
  EXPECT_THROW(build_nsp_pairs(synthetic_articles(3, 2), 4, {1, 10}, 1), DataError);
}

TEST(BuildNspPairs, ThousandArticlesUnderOneSecond) {
  auto articles = synthetic_articles(1000, 8);
  auto start = std::chrono::steady_clock::now();
  auto pairs = build_nsp_pairs(articles, 5, NspBudget::balanced(6000), 2024);
  auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_EQ(pairs.size(), 6000u);
  EXPECT_LT(std::chrono::duration<double>(elapsed).count(), 1.0);
}

TEST(CorruptWithRepetition, DuplicatesInPlace) {
  std::mt19937_64 rng(3);
  EXPECT_EQ(corrupt_with_repetition("solo", rng), "solo solo");
  auto out = corrupt_with_repetition("a b c d e f g h i j k l", rng);
  auto words = detail::split_ws(out);
  EXPECT_EQ(words.size(), 13u);
  std::size_t repeats = 0;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) repeats += words[i] == words[i + 1];
  EXPECT_EQ(repeats, 1u);
}

TEST(NspPairsJsonl, RoundTrip) {
  auto pairs = build_nsp_pairs(synthetic_articles(5, 4), 3, {6, 6}, 5);
  std::stringstream buf;
  write_nsp_pairs(buf, pairs);
  auto back = read_nsp_pairs(buf);
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(back[i].first, pairs[i].first);
    EXPECT_EQ(back[i].second, pairs[i].second);
    EXPECT_EQ(back[i].positive, pairs[i].positive);
    EXPECT_EQ(back[i].negative_type, pairs[i].negative_type);
  }
}
