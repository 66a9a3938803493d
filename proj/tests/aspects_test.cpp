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

#include <string>
#include <vector>

#include "gtest/gtest.h"

#include "ffci/aspects.hpp"

using namespace ffci;

TEST(AvgTopN, Examples) {
  std::vector<double> s{0.9, 0.5, 0.1};
  EXPECT_DOUBLE_EQ(avg_top_n(s, 2), 0.7);
  EXPECT_DOUBLE_EQ(avg_top_n(s, 5), 0.5);
  EXPECT_DOUBLE_EQ(avg_top_n(s, 1), 0.9);
  EXPECT_THROW(avg_top_n(std::vector<double>{}, 1), DataError);
  EXPECT_THROW(avg_top_n(s, 0), DataError);
}

TEST(AvgTopN, MonotoneNonIncreasingInN) {
  std::vector<double> s{0.3, 0.8, 0.8, 0.1, 0.55, 0.0};
  for (std::size_t n = 1; n < 8; ++n) EXPECT_GE(avg_top_n(s, n), avg_top_n(s, n + 1));
}

TEST(Faithfulness, UsesPairF1AndTopN) {
  auto summary = segment_sentences("S one.");
  auto source = segment_sentences("A x. B y. C z.");
  const std::vector<double> f1 = {0.6, 0.2, 0.4};
  TextMetric metric = [&](std::string_view, std::string_view src) {
    return PrfScore{0, 0, f1[static_cast<std::size_t>(src[0] - 'A')], false};
  };
  FaithfulnessConfig cfg = FaithfulnessConfig::defaults(MetricKind::rouge2);
  EXPECT_EQ(cfg.top_n, 2u);
  EXPECT_DOUBLE_EQ(faithfulness_score(summary, source, cfg, metric).value, 0.5);
  cfg.max_source_sentences = 2;
  EXPECT_DOUBLE_EQ(faithfulness_score(summary, source, cfg, metric).value, 0.4);
}

TEST(Faithfulness, DefaultsAndValidation) {
  EXPECT_EQ(FaithfulnessConfig::defaults(MetricKind::rougeL).top_n, 2u);
  EXPECT_EQ(FaithfulnessConfig::defaults(MetricKind::embed).top_n, 3u);
  EXPECT_EQ(FaithfulnessConfig::defaults(MetricKind::sts).top_n, 3u);
  auto cfg = FaithfulnessConfig::defaults(MetricKind::embed);
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg.model_id = "roberta-base";
  cfg.layer = 10;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Faithfulness, EmptySummaryIsDegenerate) {
  auto cfg = FaithfulnessConfig::defaults(MetricKind::rouge1);
  auto s = faithfulness_score(segment_sentences(""), segment_sentences("A b."), cfg,
                              lexical_metric(MetricKind::rouge1));
  EXPECT_EQ(s.value, 0.0);
  EXPECT_TRUE(s.degenerate);
}

TEST(Faithfulness, CopiedSentenceScoresOneWithTopOne) {
  auto cfg = FaithfulnessConfig::defaults(MetricKind::rouge1);
  cfg.top_n = 1;
  auto s = faithfulness_score(segment_sentences("The cat sat."),
                              segment_sentences("Dogs bark. The cat sat. Birds sing."),
                              cfg, lexical_metric(MetricKind::rouge1));
  EXPECT_DOUBLE_EQ(s.value, 1.0);
}

TEST(FocusCoverage, PrecisionAndRecall) {
  auto r1 = lexical_metric(MetricKind::rouge1);
  EXPECT_DOUBLE_EQ(focus_score("a b", "a c", r1).value, 0.5);
  EXPECT_DOUBLE_EQ(focus_score("a b c", "a", r1).value, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(coverage_score("a b c", "a", r1).value, 1.0);
  EXPECT_DOUBLE_EQ(coverage_score("a", "a b c d", r1).value, 0.25);
  auto empty = focus_score("  ", "a", r1);
  EXPECT_TRUE(empty.degenerate);
  EXPECT_EQ(empty.value, 0.0);
  EXPECT_TRUE(coverage_score("", "a", r1).degenerate);
}

TEST(FocusCoverage, Duality) {
  for (auto kind : {MetricKind::rouge1, MetricKind::rouge2, MetricKind::rougeL}) {
    auto m = lexical_metric(kind);
    std::string a = "the cat sat on the mat today", b = "a cat sat on a mat";
    EXPECT_EQ(focus_score(a, b, m).value, coverage_score(b, a, m).value);
  }
}

TEST(MetricKind, Parse) {
  for (auto k : {MetricKind::rouge1, MetricKind::rouge2, MetricKind::rougeL,
                 MetricKind::embed, MetricKind::sts})
    EXPECT_EQ(parse_metric(to_string(k)), k);
  EXPECT_THROW(parse_metric("bleu"), UsageError);
  EXPECT_THROW(lexical_metric(MetricKind::embed), UsageError);
}
