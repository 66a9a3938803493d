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
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ffci/error.hpp"

namespace ffci {

// One scoring unit: a source article, its reference summary and the output of
// one system.
struct EvalInstance {
  std::string id;
  std::string article;
  std::string reference;
  std::string system_summary;  // may be empty
  std::string system_name;

  friend bool operator==(const EvalInstance&, const EvalInstance&) = default;
};

// Half-open byte range [begin, end) into a raw text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

using Tokens = std::vector<std::string>;

struct SegmentedText {
  std::string raw;
  std::vector<Span> sentences;
  std::vector<Span> edus;
  std::vector<Tokens> tokens_per_sentence;

  std::size_t sentence_count() const { return sentences.size(); }
  std::string_view sentence(std::size_t i) const {
    return std::string_view(raw).substr(sentences[i].begin,
                                        sentences[i].size());
  }
  std::string_view edu(std::size_t i) const {
    return std::string_view(raw).substr(edus[i].begin, edus[i].size());
  }
};

enum class Aspect { focus, coverage, ic };

inline std::string to_string(Aspect a) {
  switch (a) {
    case Aspect::focus: return "focus";
    case Aspect::coverage: return "coverage";
    case Aspect::ic: return "ic";
  }
  return "?";
}

inline Aspect parse_aspect(std::string_view s) {
  if (s == "focus") return Aspect::focus;
  if (s == "coverage") return Aspect::coverage;
  if (s == "ic") return Aspect::ic;
  throw DataError("unknown aspect '" + std::string(s) + "'");
}

// One Direct Assessment judgement on the 0..100 slider.
struct AnnotationRecord {
  std::string item_id;
  std::string worker_id;
  Aspect aspect = Aspect::focus;
  double raw_score = 0.0;
  bool is_control = false;
  std::optional<double> control_expected;
  // Not part of the required schema; defaults to "<worker_id>/<aspect>".
  std::optional<std::string> hit_id;

  std::string hit() const {
    return hit_id ? *hit_id : worker_id + "/" + to_string(aspect);
  }
};

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Bytes >= 0x80 are treated as word characters so UTF-8 words stay intact.
inline bool is_word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

// Lowercased word and punctuation tokens. Words are maximal runs of
// alphanumeric (or non-ASCII) bytes; every other non-space byte is a token.
inline Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (detail::is_space(c)) {
      ++i;
    } else if (detail::is_word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && detail::is_word_char(text[j])) ++j;
      out.push_back(detail::ascii_lower(text.substr(i, j - i)));
      i = j;
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

// Words that end in a period without ending a sentence. Mirrors
// data/abbreviations.txt.
inline const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> list = {
      "mr",   "mrs",  "ms",   "dr",   "prof", "sr",   "jr",   "st",
      "vs",   "etc",  "e.g",  "i.e",  "inc",  "ltd",  "co",   "corp",
      "jan",  "feb",  "mar",  "apr",  "jun",  "jul",  "aug",  "sep",
      "sept", "oct",  "nov",  "dec",  "no",   "gov",  "gen",  "col",
      "lt",   "sgt",  "rep",  "sen",  "mt",   "ft",   "u.s",  "u.k",
      "u.n",  "a.m",  "p.m",  "approx", "dept", "est", "fig", "rev"};
  return list;
}

class AbbreviationList {
 public:
  AbbreviationList()
      : words_(default_abbreviations().begin(), default_abbreviations().end()) {}
  explicit AbbreviationList(std::unordered_set<std::string> words)
      : words_(std::move(words)) {}

  // One abbreviation per line, without the trailing period; '#' comments.
  static AbbreviationList load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open abbreviation list " + path.string());
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
      auto t = detail::trim(line);
      if (t.empty() || t.front() == '#') continue;
      words.insert(detail::ascii_lower(t));
    }
    return AbbreviationList(std::move(words));
  }

  bool contains(std::string_view word) const {
    return words_.count(detail::ascii_lower(word)) > 0;
  }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

namespace detail {

inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

inline bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

// Length of a curly closing/opening quote (UTF-8 E2 80 98..9D) at i, else 0.
inline std::size_t curly_quote_at(std::string_view s, std::size_t i) {
  if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
      static_cast<unsigned char>(s[i + 1]) == 0x80) {
    auto u = static_cast<unsigned char>(s[i + 2]);
    if (u >= 0x98 && u <= 0x9D) return 3;
  }
  return 0;
}

inline bool starts_sentence(std::string_view s, std::size_t i) {
  if (i >= s.size()) return false;
  auto u = static_cast<unsigned char>(s[i]);
  if (std::isupper(u)) return true;
  if (s[i] == '"' || s[i] == '\'' || s[i] == '(' || s[i] == '[') return true;
  return curly_quote_at(s, i) > 0;
}

// The word immediately before position `dot`, stripped of opening
// punctuation. "(U.S" -> "U.S".
inline std::string_view word_before(std::string_view s, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(s[b - 1])) --b;
  auto w = s.substr(b, dot - b);
  while (!w.empty() && (w.front() == '(' || w.front() == '"' ||
                        w.front() == '\'' || w.front() == '['))
    w.remove_prefix(1);
  return w;
}

inline bool is_initial(std::string_view w) {
  return w.size() == 1 && std::isupper(static_cast<unsigned char>(w[0]));
}

}  // namespace detail

// Rule-based splitter: a sentence ends at [.!?] (plus trailing closers) when
// followed by whitespace and then a capital letter or a quote/bracket.
// Periods after known abbreviations or single capital initials do not split.
// Spans exclude surrounding whitespace.
inline std::vector<Span> split_sentences(std::string_view text,
                                         const AbbreviationList& abbrev) {
  std::vector<Span> out;
  const std::size_t n = text.size();
  std::size_t start = 0;
  while (start < n && detail::is_space(text[start])) ++start;
  std::size_t i = start;
  while (i < n) {
    if (!detail::is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && detail::is_terminator(text[j])) ++j;
    for (;;) {
      if (j < n && detail::is_closer(text[j])) {
        ++j;
      } else if (auto q = detail::curly_quote_at(text, j); q > 0) {
        j += q;
      } else {
        break;
      }
    }
    if (j >= n || !detail::is_space(text[j])) {
      i = j;
      continue;
    }
    std::size_t k = j;
    while (k < n && detail::is_space(text[k])) ++k;
    if (!detail::starts_sentence(text, k)) {
      i = k;
      continue;
    }
    if (text[i] == '.' && j == i + 1) {
      auto w = detail::word_before(text, i);
      if (abbrev.contains(w) || detail::is_initial(w)) {
        i = k;
        continue;
      }
    }
    out.push_back({start, j});
    start = k;
    i = k;
  }
  std::size_t end = n;
  while (end > start && detail::is_space(text[end - 1])) --end;
  if (end > start) out.push_back({start, end});
  return out;
}

// Sentence spans plus per-sentence tokens. EDUs default to the sentence
// spans; a discourse segmenter from the provider may replace them.
inline SegmentedText segment_sentences(std::string text,
                                       const AbbreviationList& abbrev) {
  SegmentedText seg;
  seg.raw = std::move(text);
  seg.sentences = split_sentences(seg.raw, abbrev);
  seg.edus = seg.sentences;
  seg.tokens_per_sentence.reserve(seg.sentences.size());
  for (std::size_t i = 0; i < seg.sentences.size(); ++i)
    seg.tokens_per_sentence.push_back(tokenize(seg.sentence(i)));
  return seg;
}

inline SegmentedText segment_sentences(std::string text) {
  static const AbbreviationList defaults;
  return segment_sentences(std::move(text), defaults);
}

// Throws DataError if spans overlap, are out of order, fall outside raw, or
// an EDU is not inside exactly one sentence.
inline void validate(const SegmentedText& seg) {
  auto check_order = [&](const std::vector<Span>& spans, const char* what) {
    std::size_t prev_end = 0;
    for (const auto& s : spans) {
      if (s.begin > s.end || s.end > seg.raw.size() || s.begin < prev_end)
        throw DataError(std::string("invalid ") + what + " span");
      prev_end = s.end;
    }
  };
  check_order(seg.sentences, "sentence");
  check_order(seg.edus, "edu");
  for (const auto& e : seg.edus) {
    auto owners = std::count_if(seg.sentences.begin(), seg.sentences.end(),
                                [&](const Span& s) { return s.contains(e); });
    if (owners != 1) throw DataError("edu span not inside exactly one sentence");
  }
}

// ---------------------------------------------------------------------------
// JSONL I/O

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw DataError("line " + std::to_string(line) + ": missing key '" + key +
                    "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_string())
    throw DataError("line " + std::to_string(line) + ": key '" + key +
                    "' must be a string");
  return v.get<std::string>();
}

template <typename F>
void for_each_jsonl(std::istream& in, F&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.is_object())
      throw DataError("line " + std::to_string(lineno) +
                      ": expected a JSON object");
    fn(obj, lineno);
  }
}

}  // namespace detail

inline std::vector<EvalInstance> read_dataset(std::istream& in) {
  std::vector<EvalInstance> out;
  std::set<std::string> seen;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line) {
    EvalInstance inst{
        detail::require_string(obj, "id", line),
        detail::require_string(obj, "article", line),
        detail::require_string(obj, "reference", line),
        detail::require_string(obj, "system_summary", line),
        detail::require_string(obj, "system_name", line)};
    if (detail::trim(inst.article).empty())
      throw DataError("line " + std::to_string(line) + ": empty article");
    if (detail::trim(inst.reference).empty())
      throw DataError("line " + std::to_string(line) + ": empty reference");
    if (!seen.insert(inst.id).second)
      throw DataError("duplicate id '" + inst.id + "' at line " +
                      std::to_string(line));
    out.push_back(std::move(inst));
  });
  return out;
}

inline std::vector<EvalInstance> load_dataset(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return read_dataset(in);
}

inline void write_dataset(std::ostream& out,
                          const std::vector<EvalInstance>& instances) {
  for (const auto& i : instances) {
    nlohmann::json obj = {{"id", i.id},
                          {"article", i.article},
                          {"reference", i.reference},
                          {"system_summary", i.system_summary},
                          {"system_name", i.system_name}};
    out << obj.dump() << '\n';
  }
}

inline std::vector<AnnotationRecord> read_annotations(std::istream& in) {
  std::vector<AnnotationRecord> out;
  detail::for_each_jsonl(in, [&](const nlohmann::json& obj, std::size_t line) {
    auto fail = [line](const std::string& msg) {
      return DataError("line " + std::to_string(line) + ": " + msg);
    };
    AnnotationRecord r;
    r.item_id = detail::require_string(obj, "item_id", line);
    r.worker_id = detail::require_string(obj, "worker_id", line);
    r.aspect = parse_aspect(detail::require_string(obj, "aspect", line));
    const auto& score = detail::require(obj, "raw_score", line);
    if (!score.is_number()) throw fail("raw_score must be a number");
    r.raw_score = score.get<double>();
    if (!(r.raw_score >= 0.0 && r.raw_score <= 100.0))
      throw fail("raw_score outside [0,100]");
    const auto& ctl = detail::require(obj, "is_control", line);
    if (!ctl.is_boolean()) throw fail("is_control must be a boolean");
    r.is_control = ctl.get<bool>();
    if (auto it = obj.find("control_expected");
        it != obj.end() && !it->is_null()) {
      if (!it->is_number()) throw fail("control_expected must be a number");
      r.control_expected = it->get<double>();
    }
    if (r.is_control != r.control_expected.has_value())
      throw fail("control_expected must be present iff is_control");
    if (auto it = obj.find("hit_id"); it != obj.end() && it->is_string())
      r.hit_id = it->get<std::string>();
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<AnnotationRecord> load_annotations(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open annotations " + path.string());
  return read_annotations(in);
}

inline void write_annotations(std::ostream& out,
                              const std::vector<AnnotationRecord>& records) {
  for (const auto& r : records) {
    nlohmann::json obj = {{"item_id", r.item_id},
                          {"worker_id", r.worker_id},
                          {"aspect", to_string(r.aspect)},
                          {"raw_score", r.raw_score},
                          {"is_control", r.is_control},
                          {"control_expected", nullptr}};
    if (r.control_expected) obj["control_expected"] = *r.control_expected;
    if (r.hit_id) obj["hit_id"] = *r.hit_id;
    out << obj.dump() << '\n';
  }
}

}  // namespace ffci
