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
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ffci/aspects.hpp"
#include "ffci/coherence.hpp"
#include "ffci/corpus.hpp"
#include "ffci/lexical.hpp"
#include "ffci/metrics.hpp"
#include "ffci/provider.hpp"
#include "ffci/report.hpp"
#include "ffci/sha256.hpp"

namespace ffci {

enum class AspectId { fa, fo, c, ic };

inline AspectId parse_aspect_id(std::string_view s) {
  if (s == "fa") return AspectId::fa;
  if (s == "fo") return AspectId::fo;
  if (s == "c") return AspectId::c;
  if (s == "ic") return AspectId::ic;
  throw UsageError("unknown aspect '" + std::string(s) + "' (expected fa, fo, c, ic)");
}

inline std::string to_string(AspectId a) {
  switch (a) {
    case AspectId::fa: return "fa";
    case AspectId::fo: return "fo";
    case AspectId::c: return "c";
    case AspectId::ic: return "ic";
  }
  return "?";
}

struct MetricSetting {
  MetricKind metric = MetricKind::embed;
  std::string model;  // embed: layer-indexed model; sts: sentence encoder
  int layer = 0;
};

enum class IcMetric { nsp, coherence };

struct IcSetting {
  IcMetric metric = IcMetric::nsp;
  Aggregation aggregation = Aggregation::mean;
  std::string model = "bert-base-uncased";  // NSP classifier
};

struct RunConfig {
  std::filesystem::path dataset;
  std::vector<AspectId> aspects = {AspectId::fa, AspectId::fo, AspectId::c,
                                   AspectId::ic};
  MetricSetting fa{MetricKind::embed, "roberta-base", 10};
  MetricSetting fo{MetricKind::embed, "gpt2-xl", 29};
  MetricSetting c{MetricKind::embed, "gpt2-xl", 4};
  IcSetting ic;
  std::optional<std::size_t> fa_top_n;  // default 2 for ROUGE, 3 otherwise
  std::optional<std::size_t> max_source_sentences;
  Granularity sts_granularity = Granularity::sentence;
  CoherenceConfig coherence;
  std::optional<std::filesystem::path> word_vectors;  // coherence only
  bool lexical_baselines = true;
  // Systems expected in the report; empty means whatever the dataset holds.
  std::vector<std::string> systems;
  std::size_t threads = 4;

  bool wants(AspectId a) const {
    return std::find(aspects.begin(), aspects.end(), a) != aspects.end();
  }

  FaithfulnessConfig faithfulness() const {
    auto f = FaithfulnessConfig::defaults(fa.metric);
    if (fa_top_n) f.top_n = *fa_top_n;
    if (fa.metric == MetricKind::embed) {
      f.model_id = fa.model;
      f.layer = fa.layer;
    }
    f.max_source_sentences = max_source_sentences;
    return f;
  }

  nlohmann::json snapshot() const {
    auto setting = [](const MetricSetting& m) {
      nlohmann::json j = {{"metric", to_string(m.metric)}};
      if (m.metric == MetricKind::embed) {
        j["model"] = m.model;
        j["layer"] = m.layer;
      } else if (m.metric == MetricKind::sts) {
        j["model"] = m.model;
      }
      return j;
    };
    nlohmann::json aspects_json = nlohmann::json::array();
    for (auto a : aspects) aspects_json.push_back(to_string(a));
    nlohmann::json j = {{"aspects", aspects_json},
                        {"lexical_baselines", lexical_baselines}};
    if (wants(AspectId::fa)) {
      j["fa"] = setting(fa);
      j["fa"]["top_n"] = faithfulness().top_n;
      if (max_source_sentences) j["fa"]["max_source_sentences"] = *max_source_sentences;
    }
    if (wants(AspectId::fo)) j["fo"] = setting(fo);
    if (wants(AspectId::c)) j["c"] = setting(c);
    if (wants(AspectId::ic)) {
      if (ic.metric == IcMetric::nsp) {
        j["ic"] = {{"metric", "nsp"},
                   {"aggregation", to_string(ic.aggregation)},
                   {"model", ic.model}};
      } else {
        j["ic"] = {{"metric", "coherence"}, {"lambda", coherence.lambda}};
      }
    }
    if (fo.metric == MetricKind::sts || c.metric == MetricKind::sts)
      j["sts_granularity"] = to_string(sts_granularity);
    return j;
  }
};

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// Per-instance aspect scores; IC is absent for single-sentence summaries.
struct InstanceScores {
  std::optional<double> r1, r2, rl;
  std::optional<double> fa, fo, c, ic;
  bool segmentation_fallback = false;
};

class InstanceScorer {
 public:
  InstanceScorer(const RunConfig& cfg, Provider& provider,
                 const WordVectors* vectors)
      : cfg_(cfg), provider_(provider), vectors_(vectors) {}

  InstanceScores score(const EvalInstance& inst) const {
    InstanceScores s;
    if (cfg_.lexical_baselines) {
      auto sys = tokenize(inst.system_summary), ref = tokenize(inst.reference);
      s.r1 = rouge_n(sys, ref, 1).f1;
      s.r2 = rouge_n(sys, ref, 2).f1;
      s.rl = rouge_l(sys, ref).f1;
    }
    auto summary = segment_text(inst.system_summary, &provider_, abbrev_);
    s.segmentation_fallback = summary.sentences == Provenance::fallback;

    if (cfg_.wants(AspectId::fa)) {
      auto source = segment_text(inst.article, &provider_, abbrev_);
      auto metric = sentence_metric(cfg_.fa);
      s.fa = faithfulness_score(summary.text, source.text, cfg_.faithfulness(), metric)
                 .value;
    }
    if (cfg_.wants(AspectId::fo))
      s.fo = focus_score(inst.system_summary, inst.reference, text_metric(cfg_.fo)).value;
    if (cfg_.wants(AspectId::c))
      s.c = coverage_score(inst.system_summary, inst.reference, text_metric(cfg_.c)).value;
    if (cfg_.wants(AspectId::ic)) {
      if (cfg_.ic.metric == IcMetric::nsp) {
        const auto model = cfg_.ic.model;
        s.ic = nsp_score(
            summary.text,
            [&](const std::vector<SentencePair>& pairs) {
              return provider_.fetch_nsp_probabilities(pairs, model);
            },
            cfg_.ic.aggregation);
      } else {
        if (vectors_ == nullptr)
          throw UsageError("coherence IC needs a word-vector table");
        auto entities = cfg_.coherence.ne_extractor == EntitySource::provider
                            ? provider_entities(provider_)
                            : EntityExtractor(capitalized_entities);
        s.ic = coherence_baseline_score(summary.text, cfg_.coherence, *vectors_,
                                        entities);
      }
    }
    return s;
  }

 private:
  TextMetric text_metric(const MetricSetting& m) const {
    switch (m.metric) {
      case MetricKind::embed: return embedding_metric(provider_, m.model, m.layer);
      case MetricKind::sts:
        return sts_metric(provider_, m.model, cfg_.sts_granularity, abbrev_);
      default: return lexical_metric(m.metric);
    }
  }

  // Sentence-against-sentence metric for faithfulness; STS compares whole
  // sentences.
  TextMetric sentence_metric(const MetricSetting& m) const {
    if (m.metric == MetricKind::sts)
      return sts_metric(provider_, m.model, Granularity::document, abbrev_);
    return text_metric(m);
  }

  const RunConfig& cfg_;
  Provider& provider_;
  const WordVectors* vectors_;
  AbbreviationList abbrev_;
};

// Scores every instance on a bounded pool of workers, then averages per
// system. Rows are ordered by system name and do not depend on scheduling.
inline FfciReport evaluate_run(const RunConfig& cfg, Provider& provider) {
  auto instances = load_dataset(cfg.dataset);
  std::optional<WordVectors> vectors;
  if (cfg.wants(AspectId::ic) && cfg.ic.metric == IcMetric::coherence) {
    if (!cfg.word_vectors) throw UsageError("coherence IC needs --word-vectors");
    vectors = WordVectors::load(*cfg.word_vectors);
  }
  InstanceScorer scorer(cfg, provider, vectors ? &*vectors : nullptr);

  std::vector<InstanceScores> scores(instances.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      auto i = next.fetch_add(1);
      if (i >= instances.size()) return;
      try {
        scores[i] = scorer.score(instances[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = instances.size();
        return;
      }
    }
  };
  const auto n_threads = std::max<std::size_t>(
      1, std::min(cfg.threads, std::max<std::size_t>(1, instances.size())));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  FfciReport report;
  if (cfg.lexical_baselines)
    report.columns = baseline_columns();
  using Getter = std::optional<double> InstanceScores::*;
  std::vector<Getter> getters;
  if (cfg.lexical_baselines)
    getters = {&InstanceScores::r1, &InstanceScores::r2, &InstanceScores::rl};
  const std::pair<AspectId, Getter> aspect_fields[] = {
      {AspectId::fa, &InstanceScores::fa},
      {AspectId::fo, &InstanceScores::fo},
      {AspectId::c, &InstanceScores::c},
      {AspectId::ic, &InstanceScores::ic}};
  for (std::size_t k = 0; k < 4; ++k) {
    if (!cfg.wants(aspect_fields[k].first)) continue;
    report.columns.push_back(aspect_columns()[k]);
    getters.push_back(aspect_fields[k].second);
  }

  std::map<std::string, std::vector<std::size_t>> by_system;
  std::size_t fallbacks = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    by_system[instances[i].system_name].push_back(i);
    fallbacks += scores[i].segmentation_fallback ? 1 : 0;
  }
  for (const auto& name : cfg.systems) {
    if (by_system.count(name) == 0)
      report.warnings.push_back("system '" + name +
                                "' has no instances; row omitted");
  }
  for (const auto& [name, idx] : by_system) {
    if (!cfg.systems.empty() &&
        std::find(cfg.systems.begin(), cfg.systems.end(), name) == cfg.systems.end())
      continue;
    ReportRow row{name, idx.size(), {}};
    for (auto g : getters) {
      double total = 0.0;
      std::size_t n = 0;
      for (auto i : idx) {
        if (const auto& v = scores[i].*g) {
          total += *v;
          ++n;
        }
      }
      row.values.push_back(n ? std::optional<double>(total / static_cast<double>(n))
                             : std::nullopt);
    }
    report.rows.push_back(std::move(row));
  }

  report.metadata = {{"config", cfg.snapshot()},
                     {"dataset_sha256", file_digest(cfg.dataset)},
                     {"instances", instances.size()},
                     {"segmentation",
                      {{"fallback", fallbacks},
                       {"provider", instances.size() - fallbacks}}}};
  return report;
}

}  // namespace ffci
