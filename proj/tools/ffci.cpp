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

// Command-line front end: eval, report, sweep, metaeval, nsp-pairs.
// Exit codes: 0 success, 1 usage, 2 data error, 3 provider error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffci.hpp"
#include "ffci/http_transport.hpp"

namespace fs = std::filesystem;
using namespace ffci;

namespace {

struct ProviderFlags {
  std::string endpoint = std::string(kCacheOnly);
  std::string cache_dir = ".ffci-cache";
  bool cache_only = false;
  std::string aux_model = "bert-base-uncased";
  int timeout_ms = 30000;
  std::size_t max_batch = 32;
  bool include_special = false;

  void add_to(CLI::App* app) {
    app->add_option("--provider", endpoint, "Provider endpoint URL or 'cache-only'");
    app->add_option("--cache-dir", cache_dir, "Provider cache directory");
    app->add_flag("--cache-only", cache_only, "Never contact the provider");
    app->add_option("--aux-model", aux_model,
                    "Model behind segment and entity requests");
    app->add_option("--timeout-ms", timeout_ms, "Provider timeout");
    app->add_option("--max-batch", max_batch, "Texts per provider request");
    app->add_flag("--include-special-tokens", include_special,
                  "Keep [CLS]/<s>-style tokens in embedding matrices");
  }

  ProviderConfig config() const {
    ProviderConfig cfg;
    cfg.endpoint = cache_only ? std::string(kCacheOnly) : endpoint;
    cfg.cache_dir = cache_dir;
    cfg.model_id = aux_model;
    cfg.timeout = std::chrono::milliseconds(timeout_ms);
    cfg.max_batch = max_batch;
    cfg.include_special_tokens = include_special;
    return cfg;
  }
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    std::stringstream ss(r);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "fa=rouge2" applies to one aspect; a bare "rouge2" applies to fa, fo and c.
std::map<std::string, std::string> per_aspect(const std::vector<std::string>& raw) {
  std::map<std::string, std::string> out;
  for (const auto& item : split_list(raw)) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      for (const char* a : {"fa", "fo", "c"}) out[a] = item;
    } else {
      auto key = item.substr(0, eq);
      parse_aspect_id(key);
      out[key] = item.substr(eq + 1);
    }
  }
  return out;
}

int parse_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw UsageError(std::string("bad ") + what + " '" + s + "'");
  }
}

// "0-12" or "1,4,9".
std::vector<int> parse_layers(const std::vector<std::string>& raw) {
  std::set<int> out;
  for (const auto& item : split_list(raw)) {
    auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      int lo = parse_int(item.substr(0, dash), "layer");
      int hi = parse_int(item.substr(dash + 1), "layer");
      if (lo > hi) throw UsageError("empty layer range " + item);
      for (int l = lo; l <= hi; ++l) out.insert(l);
    } else {
      out.insert(parse_int(item, "layer"));
    }
  }
  return {out.begin(), out.end()};
}

std::map<std::string, double> read_item_scores(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<std::string, double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("item_id", 0) == 0)) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected item_id,score");
    try {
      out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad score");
    }
  }
  return out;
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string safe_name(std::string s) {
  for (auto& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
      c = '_';
  return s;
}

void write_selection(const fs::path& out_dir, const CorrelationTable& table) {
  auto ranked = rank_candidates(table);
  nlohmann::json ranking = nlohmann::json::array();
  for (const auto& r : ranked)
    ranking.push_back({{"model", r.candidate.model_id},
                       {"layer", r.candidate.layer},
                       {"mean_rank", r.mean_rank}});
  nlohmann::json sel = {{"selected",
                         {{"model", ranked.front().candidate.model_id},
                          {"layer", ranked.front().candidate.layer}}},
                        {"ranking", ranking}};
  write_file(out_dir / "selection.json", sel.dump(2) + "\n");
  std::set<std::string> models;
  for (const auto& c : table.candidates()) models.insert(c.model_id);
  for (const auto& m : models) {
    try {
      write_file(out_dir / ("layer_curve_" + safe_name(m) + ".csv"),
                 emit_layer_curve(table, m));
    } catch (const DataError& ex) {
      std::cerr << "warning: no layer curve for " << m << ": " << ex.what() << "\n";
    }
  }
  std::cerr << "selected " << ranked.front().candidate.model_id << " layer "
            << ranked.front().candidate.layer << " (mean rank "
            << ranked.front().mean_rank << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FFCI summarization evaluation toolkit"};
  app.require_subcommand(1);

  // eval
  auto* eval = app.add_subcommand("eval", "Score a dataset and write a leaderboard");
  std::string dataset, out_dir = "ffci-out", plan_requests, word_vectors,
                       ic_metric = "nsp", ic_aggregation = "mean",
                       ic_model = "bert-base-uncased", sts_granularity = "sentence",
                       sts_model = "bert-large-nli";
  std::vector<std::string> aspects_raw{"fa,fo,c,ic"}, metric_raw, model_raw, layer_raw,
      systems_raw;
  std::size_t top_n = 0, max_source = 0, threads = 4;
  double lambda = 0.5;
  bool no_baselines = false, provider_entities_flag = false;
  ProviderFlags pflags;
  eval->add_option("--dataset", dataset, "Dataset JSONL")->required();
  eval->add_option("--aspects", aspects_raw, "Subset of fa,fo,c,ic");
  eval->add_option("--metric", metric_raw,
                   "Metric per aspect, e.g. fa=rouge2 (rouge1|rouge2|rougeL|embed|sts)");
  eval->add_option("--model", model_raw, "Model per aspect, e.g. fo=gpt2-xl");
  eval->add_option("--layer", layer_raw, "Layer per aspect, e.g. c=4");
  eval->add_option("--top-n", top_n, "AvgTopN n for faithfulness");
  eval->add_option("--max-source-sentences", max_source,
                   "Truncate the article for faithfulness");
  eval->add_option("--sts-model", sts_model, "Sentence encoder for sts metrics");
  eval->add_option("--sts-granularity", sts_granularity, "edu|sentence|document");
  eval->add_option("--ic-metric", ic_metric, "nsp|coherence");
  eval->add_option("--ic-aggregation", ic_aggregation, "mean|max|min");
  eval->add_option("--ic-model", ic_model, "NSP classifier model id");
  eval->add_option("--lambda", lambda, "Coherence-score entity weight");
  eval->add_option("--word-vectors", word_vectors, "GloVe-format vectors for coherence");
  eval->add_flag("--provider-entities", provider_entities_flag,
                 "Entities for coherence from the provider");
  eval->add_option("--systems", systems_raw, "Systems expected in the report");
  eval->add_flag("--no-baselines", no_baselines, "Omit ROUGE baseline columns");
  eval->add_option("--threads", threads, "Scoring workers");
  eval->add_option("--out", out_dir, "Output directory");
  eval->add_option("--plan-requests", plan_requests,
                   "Write the provider requests the run needs to FILE and exit");
  pflags.add_to(eval);

  // report
  auto* report_cmd = app.add_subcommand("report", "Render a saved report");
  std::string report_in, report_format = "markdown", report_out;
  report_cmd->add_option("--in", report_in, "report.json from eval")->required();
  report_cmd->add_option("--format", report_format, "markdown|csv");
  report_cmd->add_option("--out", report_out, "Output directory (default stdout)");

  // nsp-pairs
  auto* nsp_cmd = app.add_subcommand("nsp-pairs", "Build NSP training pairs from articles");
  int variant = 5;
  std::size_t positives = 0, negatives = 0;
  std::uint64_t seed = 0;
  std::string nsp_out = "ffci-out";
  nsp_cmd->add_option("--dataset", dataset, "Dataset JSONL (articles are used)")->required();
  nsp_cmd->add_option("--variant", variant, "Negative-sample variant 1..5");
  nsp_cmd->add_option("--positives", positives, "Positive pairs")->required();
  nsp_cmd->add_option("--negatives", negatives, "Negative pairs")->required();
  nsp_cmd->add_option("--seed", seed, "Random seed");
  nsp_cmd->add_option("--out", nsp_out, "Output directory");

  // metaeval
  auto* meta = app.add_subcommand("metaeval",
                                  "Aggregate annotations, correlate, select layers");
  std::string annotations, aspect_name = "focus", scores_path, table_path,
                           meta_out = "ffci-out";
  double tolerance = kDefaultControlTolerance;
  meta->add_option("--annotations", annotations, "Annotation JSONL");
  meta->add_option("--aspect", aspect_name, "focus|coverage|ic");
  meta->add_option("--tolerance", tolerance, "Control-answer tolerance on 0..100");
  meta->add_option("--scores", scores_path, "Metric scores CSV item_id,score");
  meta->add_option("--table", table_path, "Correlation CSV for layer selection");
  meta->add_option("--out", meta_out, "Output directory");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Per-layer correlation sweep");
  std::string sweep_aspect = "fa", human_path, sweep_out = "ffci-out";
  std::vector<std::string> sweep_models, sweep_layers;
  ProviderFlags sweep_pflags;
  sweep->add_option("--dataset", dataset, "Dataset JSONL")->required();
  sweep->add_option("--aspect", sweep_aspect, "fa|fo|c");
  sweep->add_option("--model", sweep_models, "Model ids")->required();
  sweep->add_option("--layer", sweep_layers, "Layers, e.g. 0-12 (default all)");
  sweep->add_option("--annotations", annotations, "Annotation JSONL (fo/c)");
  sweep->add_option("--human", human_path, "Human scores CSV item_id,score");
  sweep->add_option("--tolerance", tolerance, "Control-answer tolerance");
  sweep->add_option("--top-n", top_n, "AvgTopN n for faithfulness");
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep_pflags.add_to(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*eval) {
      RunConfig cfg;
      cfg.dataset = dataset;
      cfg.aspects.clear();
      for (const auto& a : split_list(aspects_raw)) cfg.aspects.push_back(parse_aspect_id(a));
      auto metrics = per_aspect(metric_raw), models = per_aspect(model_raw),
           layers = per_aspect(layer_raw);
      for (auto [key, setting] : {std::pair{"fa", &cfg.fa}, std::pair{"fo", &cfg.fo},
                                  std::pair{"c", &cfg.c}}) {
        if (metrics.count(key)) setting->metric = parse_metric(metrics[key]);
        if (models.count(key)) setting->model = models[key];
        if (layers.count(key)) setting->layer = parse_int(layers[key], "layer");
        if (setting->metric == MetricKind::sts && !models.count(key))
          setting->model = sts_model;
        if (setting->metric == MetricKind::embed && models.count(key) && !layers.count(key)) {
          auto info = find_model(setting->model);
          if (!info) throw UsageError("no default layer for " + setting->model + "; pass --layer");
          setting->layer = std::string(key) == "fa" ? info->fa_layer
                           : std::string(key) == "fo" ? info->fo_layer
                                                      : info->c_layer;
        }
      }
      if (top_n) cfg.fa_top_n = top_n;
      if (max_source) cfg.max_source_sentences = max_source;
      cfg.sts_granularity = parse_granularity(sts_granularity);
      cfg.ic.metric = ic_metric == "nsp" ? IcMetric::nsp
                      : ic_metric == "coherence"
                          ? IcMetric::coherence
                          : throw UsageError("unknown --ic-metric " + ic_metric);
      cfg.ic.aggregation = parse_aggregation(ic_aggregation);
      cfg.ic.model = ic_model;
      cfg.coherence.lambda = lambda;
      cfg.coherence.validate();
      cfg.coherence.ne_extractor = provider_entities_flag ? EntitySource::provider
                                                          : EntitySource::capitalized_heuristic;
      if (!word_vectors.empty()) cfg.word_vectors = word_vectors;
      cfg.systems = split_list(systems_raw);
      cfg.lexical_baselines = !no_baselines;
      cfg.threads = threads;

      if (!plan_requests.empty()) {
        RecordingProvider recorder;
        evaluate_run(cfg, recorder);
        std::string lines;
        for (const auto& r : recorder.requests()) lines += r + "\n";
        write_file(plan_requests, lines);
        std::cerr << "wrote " << recorder.requests().size() << " requests to "
                  << plan_requests << "\n";
        return 0;
      }

      auto provider = make_provider(pflags.config());
      auto report = evaluate_run(cfg, *provider);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      fs::path out(out_dir);
      write_file(out / "report.json", to_json(report).dump(2) + "\n");
      write_file(out / "report.md", render_table(report, TableFormat::markdown));
      write_file(out / "report.csv", render_table(report, TableFormat::csv));
      std::cout << render_table(report, TableFormat::markdown);
      return 0;
    }

    if (*report_cmd) {
      std::ifstream in(report_in);
      if (!in) throw DataError("cannot open " + report_in);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw DataError(report_in + ": " + e.what());
      }
      auto report = report_from_json(j);
      if (report.rows.empty()) throw DataError("report has no rows");
      auto fmt = parse_table_format(report_format);
      auto text = render_table(report, fmt);
      if (report_out.empty()) {
        std::cout << text;
      } else {
        write_file(fs::path(report_out) /
                       (fmt == TableFormat::csv ? "report.csv" : "report.md"),
                   text);
      }
      return 0;
    }

    if (*nsp_cmd) {
      auto instances = load_dataset(dataset);
      std::set<std::string> seen;
      std::vector<SegmentedText> articles;
      for (const auto& inst : instances)
        if (seen.insert(inst.article).second) articles.push_back(segment_sentences(inst.article));
      auto pairs = build_nsp_pairs(articles, variant, {positives, negatives}, seed);
      std::ostringstream ss;
      write_nsp_pairs(ss, pairs);
      write_file(fs::path(nsp_out) / "nsp_pairs.jsonl", ss.str());
      std::cerr << "wrote " << pairs.size() << " pairs\n";
      return 0;
    }

    if (*meta) {
      fs::path out(meta_out);
      std::map<std::string, double> human;
      if (!annotations.empty()) {
        auto agg = aggregate_annotations(load_annotations(annotations),
                                         parse_aspect(aspect_name), tolerance);
        std::string csv = "item_id,z\n";
        for (const auto& [item, z] : agg.scores) csv += item + "," + csv_number(z) + "\n";
        write_file(out / "human_scores.csv", csv);
        std::string missing;
        for (const auto& m : agg.missing) missing += m + "\n";
        write_file(out / "missing_items.txt", missing);
        std::string qc = "hit_id,correct,passed\n";
        for (const auto& h : agg.hits)
          qc += h.hit_id + "," + std::to_string(h.correct_count) + "," +
                (h.passed ? "true" : "false") + "\n";
        write_file(out / "quality_control.csv", qc);
        if (!agg.missing.empty())
          std::cerr << "warning: " << agg.missing.size() << " items without passing annotations\n";
        human = agg.scores;
      }
      if (!scores_path.empty()) {
        if (human.empty()) throw UsageError("--scores needs --annotations");
        auto metric = read_item_scores(scores_path);
        std::vector<double> xs, ys;
        for (const auto& [item, z] : human) {
          auto it = metric.find(item);
          if (it == metric.end()) continue;
          xs.push_back(it->second);
          ys.push_back(z);
        }
        nlohmann::json corr = {{"n", xs.size()},
                               {"pearson", pearson(xs, ys)},
                               {"spearman", spearman(xs, ys)}};
        write_file(out / "correlation.json", corr.dump(2) + "\n");
        std::cout << corr.dump() << "\n";
      }
      if (!table_path.empty()) {
        std::ifstream in(table_path);
        if (!in) throw DataError("cannot open " + table_path);
        write_selection(out, read_correlation_csv(in));
      }
      if (annotations.empty() && table_path.empty())
        throw UsageError("metaeval needs --annotations and/or --table");
      return 0;
    }

    if (*sweep) {
      auto instances = load_dataset(dataset);
      std::map<std::string, double> human;
      if (!human_path.empty()) {
        human = read_item_scores(human_path);
      } else if (!annotations.empty()) {
        if (sweep_aspect == "fa")
          throw UsageError("faithfulness sweeps take --human scores");
        auto aspect = sweep_aspect == "fo" ? Aspect::focus : Aspect::coverage;
        human = aggregate_annotations(load_annotations(annotations), aspect, tolerance).scores;
      } else {
        throw UsageError("sweep needs --human or --annotations");
      }
      auto provider = make_provider(sweep_pflags.config());
      auto aspect = parse_aspect_id(sweep_aspect);
      if (aspect == AspectId::ic) throw UsageError("sweep covers fa, fo and c");
      AbbreviationList abbrev;
      CorrelationTable table;
      for (const auto& model : split_list(sweep_models)) {
        auto info = find_model(model);
        std::vector<int> layers = parse_layers(sweep_layers);
        if (layers.empty()) {
          if (!info) throw UsageError("pass --layer for unregistered model " + model);
          for (int l = 0; l <= info->layers; ++l) layers.push_back(l);
        }
        LayerScorer scorer = [&, model](const EvalInstance& inst, int layer) {
          auto metric = embedding_metric(*provider, model, layer);
          if (aspect == AspectId::fa) {
            auto cfg = FaithfulnessConfig::defaults(MetricKind::embed);
            cfg.model_id = model;
            cfg.layer = layer;
            if (top_n) cfg.top_n = top_n;
            return faithfulness_score(segment_text(inst.system_summary, provider.get(), abbrev).text,
                                      segment_text(inst.article, provider.get(), abbrev).text,
                                      cfg, metric)
                .value;
          }
          if (aspect == AspectId::fo)
            return focus_score(inst.system_summary, inst.reference, metric).value;
          return coverage_score(inst.system_summary, inst.reference, metric).value;
        };
        table.merge(layer_sweep(model, scorer, layers, human, instances));
      }
      fs::path out(sweep_out);
      std::ostringstream csv;
      write_correlation_csv(csv, table);
      write_file(out / "correlations.csv", csv.str());
      write_selection(out, table);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
