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

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ffci/cache.hpp"
#include "ffci/coherence.hpp"
#include "ffci/corpus.hpp"
#include "ffci/embed.hpp"
#include "ffci/error.hpp"
#include "ffci/models.hpp"

namespace ffci {

// Everything that needs a neural model.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::vector<EmbeddingMatrix> fetch_token_embeddings(
      const std::vector<std::string>& texts, const std::string& model_id,
      int layer) = 0;
  // One L2-normalized vector per text.
  virtual std::vector<std::vector<double>> fetch_sts_embeddings(
      const std::vector<std::string>& texts, const std::string& model_id) = 0;
  virtual std::vector<double> fetch_nsp_probabilities(
      const std::vector<SentencePair>& pairs, const std::string& model_id) = 0;
  // Throw ProviderUnavailable when no segmenter/tagger can be reached.
  virtual std::vector<Span> fetch_segments(std::string_view text,
                                           Granularity granularity) = 0;
  virtual std::vector<std::string> fetch_entities(std::string_view text) = 0;
};

// POSTs a JSON body to a protocol path and returns the parsed response.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual nlohmann::json post(const std::string& path,
                              const nlohmann::json& body) = 0;
};

inline constexpr std::string_view kLayerConvention = "hidden0";
inline constexpr std::string_view kCacheOnly = "cache-only";

struct ProviderConfig {
  std::string endpoint = std::string(kCacheOnly);  // URL or "cache-only"
  std::filesystem::path cache_dir;
  // Model behind nsp, sts, segment and entity requests.
  std::string model_id = "bert-base-uncased";
  std::chrono::milliseconds timeout{30000};
  std::size_t max_batch = 32;
  bool include_special_tokens = false;
  // Layer counts for checkpoints outside the built-in registry.
  std::map<std::string, int> extra_models;

  bool cache_only() const { return endpoint == kCacheOnly; }
};

// "[CLS]", "<s>", "<|endoftext|>" and the like.
inline bool is_special_token(std::string_view t) {
  return t.size() >= 3 && ((t.front() == '[' && t.back() == ']') ||
                           (t.front() == '<' && t.back() == '>'));
}

// Cache-first client of the model-serving protocol. Safe to share across
// threads: the only mutable state is the atomic call counter and the cache
// directory, whose writes are atomic renames.
class CachingProvider : public Provider {
 public:
  CachingProvider(ProviderConfig cfg, std::shared_ptr<Transport> transport)
      : cfg_(std::move(cfg)),
        cache_(cfg_.cache_dir),
        transport_(std::move(transport)) {
    if (cfg_.max_batch == 0) throw UsageError("max_batch must be positive");
    if (!cfg_.cache_only() && !transport_)
      throw UsageError("networked provider needs a transport");
  }

  const ProviderConfig& config() const { return cfg_; }
  const ProviderCache& cache() const { return cache_; }
  std::size_t network_calls() const { return network_calls_.load(); }

  int layer_count(const std::string& model_id) const {
    if (auto m = find_model(model_id)) return m->layers;
    auto it = cfg_.extra_models.find(model_id);
    if (it != cfg_.extra_models.end()) return it->second;
    throw ProviderError("unknown model '" + model_id + "'");
  }

  std::vector<EmbeddingMatrix> fetch_token_embeddings(
      const std::vector<std::string>& texts, const std::string& model_id,
      int layer) override {
    const int layers = layer_count(model_id);
    if (layer < 0 || layer > layers)
      throw ProviderError("layer " + std::to_string(layer) + " out of range 0.." +
                          std::to_string(layers) + " for " + model_id);

    std::vector<std::string> keys(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i)
      if (!detail::trim(texts[i]).empty())
        keys[i] = cache_key(request::token_embeddings(texts[i], model_id, layer));

    auto entries = resolve(keys, texts, [&](const std::vector<std::size_t>& idx) {
      nlohmann::json body = {{"model", model_id}, {"layer", layer}};
      body["texts"] = nlohmann::json::array();
      for (auto i : idx) body["texts"].push_back(std::string(detail::trim(texts[i])));
      auto resp = call("/v1/token_embeddings", body);
      if (resp.value("layer_convention", "") != kLayerConvention)
        throw ProviderError("provider layer convention mismatch (expected " +
                            std::string(kLayerConvention) + ")");
      const auto dim = resp.at("dim").get<std::size_t>();
      const auto& items = resp.at("items");
      if (!items.is_array() || items.size() != idx.size())
        throw ProviderError("token_embeddings: item count mismatch");
      std::vector<CacheEntry> out;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        CacheEntry e = base_entry(keys[idx[k]], kTokenEmbeddings, model_id, layer, dim);
        e.tokens = items[k].at("tokens").get<std::vector<std::string>>();
        auto vecs = items[k].at("vectors").get<std::vector<std::vector<double>>>();
        if (vecs.size() != e.tokens.size())
          throw ProviderError("token_embeddings: token/vector count mismatch");
        for (auto& v : vecs) append_normalized(e, v);
        out.push_back(std::move(e));
      }
      return out;
    });

    std::vector<EmbeddingMatrix> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (keys[i].empty()) {
        out.emplace_back(model_id, layer, std::vector<std::string>{},
                         std::vector<std::vector<double>>{});
        continue;
      }
      const auto& e = entries[i];
      std::vector<std::vector<double>> rows;
      for (std::size_t r = 0; r < e.count(); ++r)
        rows.emplace_back(e.vectors.begin() + static_cast<long>(r * e.dim),
                          e.vectors.begin() + static_cast<long>((r + 1) * e.dim));
      EmbeddingMatrix m(model_id, layer, e.tokens, rows);
      if (!cfg_.include_special_tokens)
        m = m.filtered([](const std::string& t) { return !is_special_token(t); });
      out.push_back(std::move(m));
    }
    return out;
  }

  std::vector<std::vector<double>> fetch_sts_embeddings(
      const std::vector<std::string>& texts, const std::string& model_id) override {
    std::vector<std::string> keys(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (detail::trim(texts[i]).empty())
        throw DataError("sts embedding requested for empty text");
      keys[i] = cache_key(request::sts_embeddings(texts[i], model_id));
    }
    auto entries = resolve(keys, texts, [&](const std::vector<std::size_t>& idx) {
      nlohmann::json body = {{"model", model_id}};
      body["texts"] = nlohmann::json::array();
      for (auto i : idx) body["texts"].push_back(std::string(detail::trim(texts[i])));
      auto resp = call("/v1/sts_embeddings", body);
      const auto dim = resp.at("dim").get<std::size_t>();
      auto vecs = resp.at("vectors").get<std::vector<std::vector<double>>>();
      if (vecs.size() != idx.size())
        throw ProviderError("sts_embeddings: vector count mismatch");
      std::vector<CacheEntry> out;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        CacheEntry e = base_entry(keys[idx[k]], kStsEmbeddings, model_id, -1, dim);
        append_normalized(e, vecs[k]);
        out.push_back(std::move(e));
      }
      return out;
    });
    std::vector<std::vector<double>> out;
    for (const auto& e : entries) out.emplace_back(e.vectors.begin(), e.vectors.end());
    return out;
  }

  std::vector<double> fetch_nsp_probabilities(const std::vector<SentencePair>& pairs,
                                              const std::string& model_id) override {
    if (pairs.empty()) throw DataError("nsp request with no pairs");
    std::vector<std::string> keys(pairs.size());
    std::vector<std::string> labels(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      keys[i] = cache_key(request::nsp(pairs[i].first, pairs[i].second, model_id));
      labels[i] = pairs[i].first;
    }
    auto entries = resolve(keys, labels, [&](const std::vector<std::size_t>& idx) {
      nlohmann::json body = {{"model", model_id}};
      body["pairs"] = nlohmann::json::array();
      for (auto i : idx)
        body["pairs"].push_back({{"first", std::string(detail::trim(pairs[i].first))},
                                 {"second", std::string(detail::trim(pairs[i].second))}});
      auto resp = call("/v1/nsp", body);
      auto probs = resp.at("probs").get<std::vector<double>>();
      if (probs.size() != idx.size())
        throw ProviderError("nsp: probability count mismatch");
      std::vector<CacheEntry> out;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (!(probs[k] >= 0.0 && probs[k] <= 1.0))
          throw ProviderError("nsp: probability " + std::to_string(probs[k]) +
                              " outside [0,1] for pair " + std::to_string(idx[k]));
        CacheEntry e = base_entry(keys[idx[k]], kNsp, model_id, -1, 0);
        e.probability = probs[k];
        out.push_back(std::move(e));
      }
      return out;
    });
    std::vector<double> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      double p = entries[i].probability.value_or(-1.0);
      if (!(p >= 0.0 && p <= 1.0))
        throw ProviderError("nsp: cached probability outside [0,1] for pair " +
                            std::to_string(i));
      out.push_back(p);
    }
    return out;
  }

  std::vector<Span> fetch_segments(std::string_view text,
                                   Granularity granularity) override {
    const auto trimmed = detail::trim(text);
    if (trimmed.empty()) return {};
    const auto offset = static_cast<std::size_t>(trimmed.data() - text.data());
    const auto g = to_string(granularity);
    std::vector<std::string> keys{cache_key(request::segments(text, g, cfg_.model_id))};
    std::vector<std::string> labels{std::string(trimmed)};
    auto entries = resolve(keys, labels, [&](const std::vector<std::size_t>&) {
      auto resp = call("/v1/segments", {{"text", std::string(trimmed)}, {"granularity", g}});
      CacheEntry e = base_entry(keys[0], kSegments, cfg_.model_id, -1, 0);
      e.spans = resp.at("spans").get<std::vector<std::pair<std::size_t, std::size_t>>>();
      return std::vector<CacheEntry>{std::move(e)};
    });
    std::vector<Span> out;
    std::size_t prev = 0;
    for (const auto& [b, e] : entries[0].spans) {
      if (b > e || e > trimmed.size() || b < prev)
        throw ProviderError("segments: invalid span [" + std::to_string(b) + "," +
                            std::to_string(e) + ")");
      prev = e;
      out.push_back({b + offset, e + offset});
    }
    return out;
  }

  std::vector<std::string> fetch_entities(std::string_view text) override {
    if (detail::trim(text).empty()) return {};
    std::vector<std::string> keys{cache_key(request::entities(text, cfg_.model_id))};
    std::vector<std::string> labels{std::string(detail::trim(text))};
    auto entries = resolve(keys, labels, [&](const std::vector<std::size_t>&) {
      auto resp = call("/v1/entities", {{"text", std::string(detail::trim(text))}});
      CacheEntry e = base_entry(keys[0], kEntities, cfg_.model_id, -1, 0);
      e.entities = resp.at("entities").get<std::vector<std::string>>();
      return std::vector<CacheEntry>{std::move(e)};
    });
    return entries[0].entities;
  }

 private:
  static CacheEntry base_entry(const std::string& key, std::string_view kind,
                               const std::string& model, int layer, std::size_t dim) {
    CacheEntry e;
    e.key = key;
    e.request_kind = std::string(kind);
    e.model = model;
    e.layer = layer;
    e.dim = dim;
    e.created_at = utc_timestamp();
    return e;
  }

  static void append_normalized(CacheEntry& e, std::vector<double>& v) {
    if (v.size() != e.dim) throw ProviderError("vector dimension differs from declared dim");
    try {
      detail::normalize_in_place(v);
    } catch (const DataError& ex) {
      throw ProviderError(std::string("provider returned ") + ex.what());
    }
    for (double x : v) e.vectors.push_back(static_cast<float>(x));
  }

  nlohmann::json call(const std::string& path, const nlohmann::json& body) {
    ++network_calls_;
    try {
      return transport_->post(path, body);
    } catch (const nlohmann::json::exception& ex) {
      throw ProviderError(path + ": malformed response: " + ex.what());
    }
  }

  // Looks every key up in the cache, fetches the misses (deduplicated, in
  // batches of max_batch) through `fetch`, stores them, and returns entries
  // aligned with `keys`. Empty keys are skipped.
  template <typename Fetch>
  std::vector<CacheEntry> resolve(const std::vector<std::string>& keys,
                                  const std::vector<std::string>& labels,
                                  Fetch&& fetch) {
    std::vector<CacheEntry> out(keys.size());
    std::map<std::string, std::size_t> first_miss;
    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i].empty()) continue;
      if (auto hit = cache_.read(keys[i])) {
        out[i] = std::move(*hit);
      } else if (first_miss.emplace(keys[i], i).second) {
        misses.push_back(i);
      }
    }
    if (!misses.empty() && cfg_.cache_only())
      throw ProviderUnavailable("cache miss in cache-only mode for key " +
                                keys[misses.front()] + " (\"" +
                                labels[misses.front()].substr(0, 60) + "\")");
    for (std::size_t b = 0; b < misses.size(); b += cfg_.max_batch) {
      std::vector<std::size_t> batch(
          misses.begin() + static_cast<long>(b),
          misses.begin() + static_cast<long>(std::min(misses.size(), b + cfg_.max_batch)));
      std::vector<CacheEntry> fetched;
      try {
        fetched = fetch(batch);
      } catch (const nlohmann::json::exception& ex) {
        throw ProviderError(std::string("malformed provider response: ") + ex.what());
      }
      for (std::size_t k = 0; k < batch.size(); ++k) {
        cache_.write(fetched[k]);
        out[batch[k]] = std::move(fetched[k]);
      }
    }
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (!keys[i].empty() && out[i].key.empty()) out[i] = out[first_miss.at(keys[i])];
    return out;
  }

  ProviderConfig cfg_;
  ProviderCache cache_;
  std::shared_ptr<Transport> transport_;
  std::atomic<std::size_t> network_calls_{0};
};

// Answers every request with a placeholder and remembers the normalized
// request, so a run can be planned before any model is available. Segments
// and entities report unavailable, matching a cache-only run's fallback.
class RecordingProvider : public Provider {
 public:
  std::vector<EmbeddingMatrix> fetch_token_embeddings(
      const std::vector<std::string>& texts, const std::string& model_id,
      int layer) override {
    std::vector<EmbeddingMatrix> out;
    for (const auto& t : texts) {
      if (detail::trim(t).empty()) {
        out.emplace_back(model_id, layer, std::vector<std::string>{},
                         std::vector<std::vector<double>>{});
        continue;
      }
      record(request::token_embeddings(t, model_id, layer));
      out.emplace_back(model_id, layer, std::vector<std::string>{"x"},
                       std::vector<std::vector<double>>{{1.0}});
    }
    return out;
  }

  std::vector<std::vector<double>> fetch_sts_embeddings(
      const std::vector<std::string>& texts, const std::string& model_id) override {
    std::vector<std::vector<double>> out;
    for (const auto& t : texts) {
      record(request::sts_embeddings(t, model_id));
      out.push_back({1.0});
    }
    return out;
  }

  std::vector<double> fetch_nsp_probabilities(const std::vector<SentencePair>& pairs,
                                              const std::string& model_id) override {
    for (const auto& p : pairs) record(request::nsp(p.first, p.second, model_id));
    return std::vector<double>(pairs.size(), 0.5);
  }

  std::vector<Span> fetch_segments(std::string_view, Granularity) override {
    throw ProviderUnavailable("recording provider has no segmenter");
  }

  std::vector<std::string> fetch_entities(std::string_view) override {
    throw ProviderUnavailable("recording provider has no entity tagger");
  }

  // Canonical JSON of every distinct request, sorted.
  std::vector<std::string> requests() const {
    std::lock_guard lock(mu_);
    return {requests_.begin(), requests_.end()};
  }

 private:
  void record(const nlohmann::json& req) {
    std::lock_guard lock(mu_);
    requests_.insert(canonical_json(req));
  }

  mutable std::mutex mu_;
  std::set<std::string> requests_;
};

enum class Provenance { provider, fallback };

inline std::string to_string(Provenance p) {
  return p == Provenance::provider ? "provider" : "fallback";
}

struct SegmentationResult {
  SegmentedText text;
  Provenance sentences = Provenance::fallback;
  Provenance edus = Provenance::fallback;
};

// Sentence and EDU segmentation through the provider, falling back to the
// rule-based splitter (sentences) and to sentence spans (EDUs) when the
// provider is unavailable. A null provider means "always fall back".
inline SegmentationResult segment_text(std::string raw, Provider* provider,
                                       const AbbreviationList& abbrev) {
  SegmentationResult res;
  res.text = segment_sentences(std::move(raw), abbrev);
  if (provider == nullptr) return res;
  try {
    auto spans = provider->fetch_segments(res.text.raw, Granularity::sentence);
    res.text.sentences = std::move(spans);
    res.text.edus = res.text.sentences;
    res.text.tokens_per_sentence.clear();
    for (std::size_t i = 0; i < res.text.sentences.size(); ++i)
      res.text.tokens_per_sentence.push_back(tokenize(res.text.sentence(i)));
    res.sentences = Provenance::provider;
  } catch (const ProviderUnavailable&) {
  }
  try {
    res.text.edus = provider->fetch_segments(res.text.raw, Granularity::edu);
    res.edus = Provenance::provider;
  } catch (const ProviderUnavailable&) {
    res.text.edus = res.text.sentences;
  }
  try {
    validate(res.text);
  } catch (const DataError& ex) {
    throw ProviderError(std::string("provider segmentation: ") + ex.what());
  }
  return res;
}

// Entities from the provider, or the capitalized-run heuristic when the
// provider is unavailable.
inline EntityExtractor provider_entities(Provider& provider) {
  return [&provider](std::string_view sentence) {
    try {
      return provider.fetch_entities(sentence);
    } catch (const ProviderUnavailable&) {
      return capitalized_entities(sentence);
    }
  };
}

}  // namespace ffci
