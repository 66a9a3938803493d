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

// Acceptance gate: one PASS/FAIL line per criterion; non-zero exit on any
// failure.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ffci.hpp"

using namespace ffci;
namespace fs = std::filesystem;

namespace {

const fs::path kData = FFCI_TEST_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  (" << o.detail << ")"
            << std::endl;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- independent oracles ----

std::size_t lcs_recursive(const Tokens& a, std::size_t i, const Tokens& b, std::size_t j) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + lcs_recursive(a, i + 1, b, j + 1);
  return std::max(lcs_recursive(a, i + 1, b, j), lcs_recursive(a, i, b, j + 1));
}

double oracle_greedy(const std::vector<std::vector<double>>& from,
                     const std::vector<std::vector<double>>& to) {
  double total = 0;
  for (const auto& f : from) {
    double best = -1;
    for (const auto& t : to) {
      double d = 0;
      for (std::size_t k = 0; k < f.size(); ++k) d += f[k] * t[k];
      best = std::max(best, d);
    }
    total += std::min(1.0, std::max(0.0, best));
  }
  return total / static_cast<double>(from.size());
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

std::vector<double> oracle_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

std::vector<double> unit(std::vector<double> v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pad(std::mt19937_64& rng, const std::string& s) {
  static const char* ws[] = {"", " ", "\n", "  \t"};
  return std::string(ws[rng() % 4]) + s + ws[rng() % 4];
}

// ---- criteria ----

Outcome metric_duality() {
  std::mt19937_64 rng(20240601);
  const std::vector<std::string> vocab = {"the", "cat", "sat", "on", "mat", "a",
                                          "dog", "ran", ",",  ".",   "and", "it"};
  std::size_t checks = 0;
  auto check_pair = [&](const TextMetric& m, const std::string& a, const std::string& b) {
    ++checks;
    auto f = focus_score(a, b, m), c = coverage_score(b, a, m);
    if (f.value != c.value) throw DataError("duality broken for '" + a + "' / '" + b + "'");
  };

  for (auto kind : {MetricKind::rouge1, MetricKind::rouge2, MetricKind::rougeL}) {
    auto m = lexical_metric(kind);
    for (int i = 0; i < 1000; ++i) {
      std::string a, b;
      for (std::size_t k = rng() % 15; k > 0; --k) a += vocab[rng() % vocab.size()] + " ";
      for (std::size_t k = 1 + rng() % 15; k > 0; --k) b += vocab[rng() % vocab.size()] + " ";
      check_pair(m, a, b);
    }
  }

  auto instances = load_dataset(kData / "fixture_dataset.jsonl");
  std::vector<std::string> docs, sentences;
  for (const auto& inst : instances) {
    docs.push_back(inst.system_summary);
    docs.push_back(inst.reference);
    for (const auto* t : {&inst.system_summary, &inst.article}) {
      auto s = segment_sentences(*t);
      for (std::size_t i = 0; i < s.sentence_count(); ++i)
        sentences.emplace_back(s.sentence(i));
    }
  }
  ProviderConfig cfg;
  cfg.cache_dir = kData / "cache";
  CachingProvider provider(cfg, nullptr);
  ProviderConfig sts_cfg;
  sts_cfg.cache_dir = kData / "sts_cache";
  CachingProvider sts_provider(sts_cfg, nullptr);
  AbbreviationList abbrev;

  struct Pool {
    TextMetric metric;
    const std::vector<std::string>* texts;
  };
  std::vector<Pool> pools = {
      {embedding_metric(provider, "gpt2-xl", 29), &docs},
      {embedding_metric(provider, "gpt2-xl", 4), &docs},
      {embedding_metric(provider, "roberta-base", 10), &sentences},
      {sts_metric(sts_provider, "bert-large-nli", Granularity::sentence, abbrev), &docs},
      {sts_metric(sts_provider, "bert-large-nli", Granularity::document, abbrev), &sentences},
  };
  for (const auto& pool : pools)
    for (int i = 0; i < 1000; ++i) {
      const auto& t = *pool.texts;
      check_pair(pool.metric, pad(rng, t[rng() % t.size()]), pad(rng, t[rng() % t.size()]));
    }
  return {true, std::to_string(checks) + " pairs; rouge1/2/L, embed x3 layers, sts x2"};
}

Outcome rouge_l_oracle() {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    Tokens a(rng() % 9), b(rng() % 9);
    for (auto& w : a) w = std::string(1, static_cast<char>('a' + rng() % 4));
    for (auto& w : b) w = std::string(1, static_cast<char>('a' + rng() % 4));
    const double l = static_cast<double>(lcs_recursive(a, 0, b, 0));
    const double p = a.empty() ? 0.0 : l / static_cast<double>(a.size());
    const double r = b.empty() ? 0.0 : l / static_cast<double>(b.size());
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    auto s = rouge_l(a, b);
    if (s.precision != p || s.recall != r || s.f1 != f)
      return {false, "mismatch at trial " + std::to_string(trial)};
  }
  return {true, "500 pairs, length <= 8, exact"};
}

Outcome greedy_oracle() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  double worst = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t dim = 1 + rng() % 3;
    auto make = [&](std::size_t n) {
      std::vector<std::vector<double>> m(n, std::vector<double>(dim));
      for (auto& row : m) {
        do {
          for (auto& x : row) x = g(rng);
        } while (std::abs(row[0]) + std::abs(row[dim - 1]) < 1e-3);
        row = unit(row);
      }
      return m;
    };
    auto a = make(1 + rng() % 6), b = make(1 + rng() % 6);
    auto toks = [](std::size_t n) { return std::vector<std::string>(n, "t"); };
    auto s = greedy_match_score(EmbeddingMatrix("m", 1, toks(a.size()), a),
                                EmbeddingMatrix("m", 1, toks(b.size()), b));
    const double p = oracle_greedy(a, b), r = oracle_greedy(b, a);
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    worst = std::max({worst, std::abs(s.precision - p), std::abs(s.recall - r),
                      std::abs(s.f1 - f)});
  }
  return {worst <= 1e-12, "2000 matrices, <= 6 tokens, dim <= 3, max err " + fmt("%.3g", worst)};
}

Outcome correlation_oracles() {
  std::vector<double> a{1, 2, 3}, b{1, 3, 2};
  if (pearson(a, b) != 0.5) return {false, "pearson([1,2,3],[1,3,2]) != 0.5"};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 3 + rng() % 40;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = trial % 2 ? std::round(4 * u(rng)) : 0.3 * x[i] + u(rng);
    }
    if (trial % 2) {
      for (auto& v : x) v = std::round(3 * v);
    }
    try {
      worst = std::max(worst, std::abs(pearson(x, y) - oracle_pearson(x, y)));
      worst = std::max(worst, std::abs(spearman(x, y) -
                                       oracle_pearson(oracle_ranks(x), oracle_ranks(y))));
    } catch (const UndefinedCorrelation&) {
    }
  }
  return {worst <= 1e-12, "exact 0.5 closed form; 1000 vectors, max err " + fmt("%.3g", worst)};
}

Outcome zscore_contract() {
  std::mt19937_64 rng(5);
  double worst_mean = 0, worst_sd = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> raw(2 + rng() % 50);
    for (auto& x : raw) x = static_cast<double>(rng() % 101);
    auto z = zscore_normalize(WorkerProfile::from_scores("w", raw));
    if (z.zero_variance) continue;
    double m = 0, v = 0;
    for (double x : z.z) m += x;
    m /= static_cast<double>(z.z.size());
    for (double x : z.z) v += (x - m) * (x - m);
    worst_mean = std::max(worst_mean, std::abs(m));
    worst_sd = std::max(worst_sd, std::abs(std::sqrt(v / static_cast<double>(z.z.size())) - 1));
  }
  auto flat = zscore_normalize(WorkerProfile::from_scores("c", {42, 42, 42, 42}));
  bool flat_ok = flat.zero_variance &&
                 std::all_of(flat.z.begin(), flat.z.end(), [](double x) { return x == 0.0; });
  return {worst_mean <= 1e-9 && worst_sd <= 1e-9 && flat_ok,
          "max |mean| " + fmt("%.3g", worst_mean) + ", max |sd-1| " + fmt("%.3g", worst_sd) +
              (flat_ok ? ", constant worker flagged" : ", constant worker NOT flagged")};
}

Outcome avg_top_n_check() {
  std::vector<double> s{0.9, 0.5, 0.1};
  if (avg_top_n(s, 2) != 0.7) return {false, "top-2 of [0.9,0.5,0.1] != 0.7"};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + rng() % 10);
    for (auto& x : v) x = u(rng);
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (std::size_t n = v.size(); n < v.size() + 3; ++n)
      if (std::abs(avg_top_n(v, n) - mean) > 1e-15)
        return {false, "n >= length differs from plain mean"};
  }
  return {true, "top-2 = 0.7 exact; n >= length equals mean on 500 lists"};
}

Outcome nsp_composition() {
  std::vector<std::string> raw;
  for (int d = 0; d < 1000; ++d) {
    std::string text;
    for (int i = 0; i < 8; ++i)
      text += "Article " + std::to_string(d) + " sentence " + std::to_string(i) +
              " mentions several plain words. ";
    raw.push_back(std::move(text));
  }
  auto start = std::chrono::steady_clock::now();
  std::vector<SegmentedText> articles;
  for (const auto& text : raw) articles.push_back(segment_sentences(text));
  auto pairs = build_nsp_pairs(articles, 5, {100, 100}, 42);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t t[4] = {0, 0, 0, 0}, pos = 0;
  for (const auto& p : pairs) {
    if (p.positive) ++pos;
    else ++t[static_cast<int>(*p.negative_type)];
  }
  auto again = build_nsp_pairs(articles, 5, {100, 100}, 42);
  std::ostringstream a, b;
  write_nsp_pairs(a, pairs);
  write_nsp_pairs(b, again);
  bool ok = pos == 100 && t[0] == 50 && t[1] == 0 && t[2] == 10 && t[3] == 40 &&
            a.str() == b.str() && secs < 1.0;
  return {ok, "types 1/2/3/4 = " + std::to_string(t[0]) + "/" + std::to_string(t[1]) + "/" +
                  std::to_string(t[2]) + "/" + std::to_string(t[3]) +
                  (a.str() == b.str() ? ", deterministic" : ", NOT deterministic") +
                  ", segmenting 1000 articles and pairing in " + fmt("%.3f", secs) + " s"};
}

Outcome layer_selection() {
  std::ifstream in(kData / "faithfulness_layer_table.csv");
  auto table = read_correlation_csv(in);
  auto best = select_by_average_rank(table);
  if (best.model_id != "roberta-base" || best.layer != 10)
    return {false, "selected " + best.model_id + " layer " + std::to_string(best.layer)};

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::tuple<std::string, int, double>> cells;
    for (const char* m : {"m-b", "m-a", "m-c"})
      for (int layer : {5, 2, 9}) cells.emplace_back(m, layer, 0.5);
    std::shuffle(cells.begin(), cells.end(), rng);
    CorrelationTable t;
    for (const auto& [m, l, r] : cells)
      for (const char* p : {"p1", "p2"}) t.set(m, l, p, r);
    auto ranked = rank_candidates(t);
    if (ranked.front().candidate != Candidate{"m-a", 2} ||
        ranked.back().candidate != Candidate{"m-c", 9})
      return {false, "tie order depends on insertion order"};
  }
  return {true, "roberta-base layer 10 selected; 50 shuffled tie tables agree"};
}

Outcome quality_control() {
  auto hit = [](std::size_t correct) {
    std::vector<AnnotationRecord> recs;
    for (std::size_t k = 0; k < 10; ++k)
      recs.push_back({"c" + std::to_string(k), "w", Aspect::focus, k < correct ? 100.0 : 0.0,
                      true, 100.0, std::nullopt});
    return recs;
  };
  bool eight = quality_control_check(hit(8)).passed;
  bool six = quality_control_check(hit(6)).passed;
  return {eight && !six, std::string("8/10 ") + (eight ? "pass" : "fail") + ", 6/10 " +
                             (six ? "pass" : "fail")};
}

Outcome lambda_linearity() {
  WordVectors wv;
  wv.add("storm", {1, 0.2, 0});
  wv.add("rain", {0.7, 0.7, 0.1});
  wv.add("city", {0, 1, 0.3});
  wv.add("council", {0.1, 0.4, 0.9});
  auto s = segment_sentences(
      "A storm hit Glasgow City overnight. Heavy rain flooded Glasgow City streets. "
      "The council met in Edinburgh. The city council blamed the storm.");
  auto pairs = adjacent_similarities(s, wv, capitalized_entities);
  double ne = 0, cs = 0;
  for (const auto& p : pairs) {
    ne += p.ne_sim;
    cs += p.cos_sim;
  }
  ne /= static_cast<double>(pairs.size());
  cs /= static_cast<double>(pairs.size());
  double worst = 0;
  for (double lambda : {0.0, 0.25, 0.5, 1.0}) {
    CoherenceConfig cfg;
    cfg.lambda = lambda;
    worst = std::max(worst, std::abs(*coherence_baseline_score(s, cfg, wv) -
                                     (lambda * ne + (1 - lambda) * cs)));
  }
  return {worst <= 1e-12 && ne != cs, "lambda in {0, 0.25, 0.5, 1}, max err " + fmt("%.3g", worst)};
}

Outcome e2e_determinism() {
  auto root = fs::temp_directory_path() / "ffci_acceptance";
  fs::remove_all(root);
  double worst = 0;
  for (const char* run : {"a", "b"}) {
    std::string cmd = std::string("\"") + FFCI_CLI + "\" eval --dataset \"" +
                      (kData / "fixture_dataset.jsonl").string() +
                      "\" --cache-only --cache-dir \"" + (kData / "cache").string() +
                      "\" --out \"" + (root / run).string() + "\" >/dev/null 2>&1";
    auto start = std::chrono::steady_clock::now();
    int status = std::system(cmd.c_str());
    worst = std::max(worst, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      return {false, "eval exited with status " + std::to_string(status)};
  }
  for (const char* f : {"report.json", "report.md", "report.csv"}) {
    auto a = slurp(root / "a" / f), b = slurp(root / "b" / f);
    if (a.empty() || a != b) return {false, std::string(f) + " differs between runs"};
  }
  return {worst < 5.0, "10 instances, reports byte-identical, slowest run " + fmt("%.3f", worst) + " s"};
}

}  // namespace

int main() {
  report("metric duality", metric_duality);
  report("ROUGE-L oracle", rouge_l_oracle);
  report("greedy-match oracle", greedy_oracle);
  report("correlation oracles", correlation_oracles);
  report("z-score contract", zscore_contract);
  report("AvgTopN", avg_top_n_check);
  report("NSP-pair composition", nsp_composition);
  report("layer selection", layer_selection);
  report("quality control", quality_control);
  report("coherence linearity in lambda", lambda_linearity);
  report("end-to-end determinism", e2e_determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
