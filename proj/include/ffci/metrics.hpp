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

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ffci/aspects.hpp"
#include "ffci/embed.hpp"
#include "ffci/provider.hpp"

namespace ffci {

// Greedy token matching over provider embeddings at one (model, layer).
// Matrices are memoized per text, so the returned metric is not meant to be
// shared between threads.
inline TextMetric embedding_metric(Provider& provider, std::string model_id,
                                   int layer) {
  auto memo = std::make_shared<std::map<std::string, EmbeddingMatrix>>();
  auto get = [&provider, memo, model_id, layer](std::string_view text)
      -> const EmbeddingMatrix& {
    std::string key(text);
    auto it = memo->find(key);
    if (it == memo->end()) {
      auto m = provider.fetch_token_embeddings({key}, model_id, layer);
      it = memo->emplace(std::move(key), std::move(m.front())).first;
    }
    return it->second;
  };
  return [get](std::string_view cand, std::string_view ref) {
    const auto& c = get(cand);
    const auto& r = get(ref);
    return greedy_match_score(c, r);
  };
}

// Splits a text into segments of the requested granularity.
inline std::vector<std::string> split_segments(std::string_view text,
                                               Granularity granularity,
                                               Provider* provider,
                                               const AbbreviationList& abbrev) {
  std::vector<std::string> out;
  if (detail::trim(text).empty()) return out;
  if (granularity == Granularity::document) {
    out.emplace_back(detail::trim(text));
    return out;
  }
  auto seg = segment_text(std::string(text), provider, abbrev).text;
  if (granularity == Granularity::sentence) {
    for (std::size_t i = 0; i < seg.sentence_count(); ++i)
      out.emplace_back(seg.sentence(i));
  } else {
    for (std::size_t i = 0; i < seg.edus.size(); ++i) out.emplace_back(seg.edu(i));
  }
  return out;
}

// STS precision/recall over segments of both texts.
inline TextMetric sts_metric(Provider& provider, std::string model_id,
                             Granularity granularity,
                             const AbbreviationList& abbrev) {
  auto embed = [&provider, &abbrev, model_id, granularity](std::string_view text) {
    auto segs = split_segments(text, granularity, &provider, abbrev);
    std::vector<SegmentEmbedding> out;
    if (segs.empty()) return out;
    auto vecs = provider.fetch_sts_embeddings(segs, model_id);
    for (std::size_t i = 0; i < segs.size(); ++i)
      out.emplace_back(segs[i], std::move(vecs[i]), granularity);
    return out;
  };
  return [embed](std::string_view cand, std::string_view ref) {
    auto c = embed(cand);
    auto r = embed(ref);
    return sts_prf(c, r);
  };
}

}  // namespace ffci
