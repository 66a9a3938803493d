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

#include <chrono>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ffci/corpus.hpp"
#include "ffci/error.hpp"
#include "ffci/sha256.hpp"

namespace ffci {

// Request kinds, as they appear in cache keys and headers.
inline constexpr std::string_view kTokenEmbeddings = "token_embeddings";
inline constexpr std::string_view kStsEmbeddings = "sts_embeddings";
inline constexpr std::string_view kNsp = "nsp";
inline constexpr std::string_view kSegments = "segments";
inline constexpr std::string_view kEntities = "entities";

// Canonical request objects. Text is trimmed of surrounding whitespace
// before it enters a key. The key is the SHA-256 of the compact,
// sorted-key JSON serialization.
namespace request {

inline nlohmann::json token_embeddings(std::string_view text,
                                       const std::string& model, int layer) {
  return {{"kind", kTokenEmbeddings},
          {"model", model},
          {"layer", layer},
          {"text", std::string(detail::trim(text))}};
}

inline nlohmann::json sts_embeddings(std::string_view text,
                                     const std::string& model) {
  return {{"kind", kStsEmbeddings},
          {"model", model},
          {"text", std::string(detail::trim(text))}};
}

inline nlohmann::json nsp(std::string_view first, std::string_view second,
                          const std::string& model) {
  return {{"kind", kNsp},
          {"model", model},
          {"first", std::string(detail::trim(first))},
          {"second", std::string(detail::trim(second))}};
}

inline nlohmann::json segments(std::string_view text,
                               const std::string& granularity,
                               const std::string& model) {
  return {{"kind", kSegments},
          {"model", model},
          {"granularity", granularity},
          {"text", std::string(detail::trim(text))}};
}

inline nlohmann::json entities(std::string_view text, const std::string& model) {
  return {{"kind", kEntities},
          {"model", model},
          {"text", std::string(detail::trim(text))}};
}

}  // namespace request

inline std::string canonical_json(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

inline std::string cache_key(const nlohmann::json& normalized_request) {
  return sha256_hex(canonical_json(normalized_request));
}

// One stored provider answer.
//
// File layout: the line "FFCI-CACHE 1", one line of sorted-key JSON header
// (request_kind, model, layer, dim, count, created_at and any list payload:
// tokens, spans or entities), then the binary payload: count x dim float32
// little-endian vectors, or one float64 little-endian probability for nsp.
struct CacheEntry {
  std::string key;
  std::string request_kind;
  std::string model;
  int layer = -1;
  std::size_t dim = 0;
  std::string created_at;
  std::vector<std::string> tokens;                        // token_embeddings
  std::vector<float> vectors;                             // row-major
  std::optional<double> probability;                      // nsp
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // segments
  std::vector<std::string> entities;                      // entities

  std::size_t count() const { return dim == 0 ? 0 : vectors.size() / dim; }

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

inline constexpr std::string_view kCacheMagic = "FFCI-CACHE 1";

inline std::string utc_timestamp() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline void put_le32(std::string& out, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

inline void put_le64(std::string& out, double d) {
  std::uint64_t u;
  std::memcpy(&u, &d, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

inline float get_le32(const unsigned char* p) {
  std::uint32_t u = 0;
  for (int i = 3; i >= 0; --i) u = (u << 8) | p[i];
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

inline double get_le64(const unsigned char* p) {
  std::uint64_t u = 0;
  for (int i = 7; i >= 0; --i) u = (u << 8) | p[i];
  double d;
  std::memcpy(&d, &u, 8);
  return d;
}

}  // namespace detail

inline std::string serialize(const CacheEntry& e) {
  nlohmann::json h = {{"request_kind", e.request_kind},
                      {"model", e.model},
                      {"layer", e.layer},
                      {"dim", e.dim},
                      {"count", e.count()},
                      {"created_at", e.created_at}};
  if (e.request_kind == kTokenEmbeddings) h["tokens"] = e.tokens;
  if (e.request_kind == kSegments) h["spans"] = e.spans;
  if (e.request_kind == kEntities) h["entities"] = e.entities;
  std::string out(kCacheMagic);
  out.push_back('\n');
  out += canonical_json(h);
  out.push_back('\n');
  for (float f : e.vectors) detail::put_le32(out, f);
  if (e.probability) detail::put_le64(out, *e.probability);
  return out;
}

inline CacheEntry deserialize(std::string_view bytes, std::string key) {
  auto bad = [&](const std::string& why) {
    return ProviderError("corrupt cache entry " + key + ": " + why);
  };
  auto nl1 = bytes.find('\n');
  if (nl1 == std::string_view::npos || bytes.substr(0, nl1) != kCacheMagic)
    throw bad("bad magic");
  auto nl2 = bytes.find('\n', nl1 + 1);
  if (nl2 == std::string_view::npos) throw bad("missing header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(nl1 + 1, nl2 - nl1 - 1));
  } catch (const nlohmann::json::exception& ex) {
    throw bad(ex.what());
  }
  CacheEntry e;
  e.key = std::move(key);
  try {
    e.request_kind = h.at("request_kind").get<std::string>();
    e.model = h.at("model").get<std::string>();
    e.layer = h.at("layer").get<int>();
    e.dim = h.at("dim").get<std::size_t>();
    e.created_at = h.at("created_at").get<std::string>();
    auto count = h.at("count").get<std::size_t>();
    if (h.contains("tokens")) e.tokens = h["tokens"].get<std::vector<std::string>>();
    if (h.contains("spans"))
      e.spans = h["spans"].get<std::vector<std::pair<std::size_t, std::size_t>>>();
    if (h.contains("entities"))
      e.entities = h["entities"].get<std::vector<std::string>>();
    auto payload = bytes.substr(nl2 + 1);
    const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
    const std::size_t floats = count * e.dim;
    std::size_t need = 4 * floats + (e.request_kind == kNsp ? 8 : 0);
    if (payload.size() != need) throw bad("payload size mismatch");
    e.vectors.reserve(floats);
    for (std::size_t i = 0; i < floats; ++i) e.vectors.push_back(detail::get_le32(p + 4 * i));
    if (e.request_kind == kNsp) e.probability = detail::get_le64(p + 4 * floats);
    if (e.request_kind == kTokenEmbeddings && e.tokens.size() != count)
      throw bad("token count mismatch");
  } catch (const nlohmann::json::exception& ex) {
    throw bad(ex.what());
  }
  return e;
}

// Directory of content-addressed entries, one file per key. Writes go to a
// temporary file that is renamed into place, so readers never see partial
// entries.
class ProviderCache {
 public:
  ProviderCache() = default;
  explicit ProviderCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  bool enabled() const { return !dir_.empty(); }

  std::filesystem::path path_for(const std::string& key) const { return dir_ / key; }

  std::optional<CacheEntry> read(const std::string& key) const {
    if (!enabled()) return std::nullopt;
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str(), key);
  }

  void write(const CacheEntry& e) const {
    if (!enabled()) return;
    std::filesystem::create_directories(dir_);
    thread_local std::mt19937_64 rng{std::random_device{}()};
    auto tmp = dir_ / (".tmp-" + e.key + "-" + std::to_string(rng()));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw ProviderError("cannot write cache file " + tmp.string());
      auto bytes = serialize(e);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw ProviderError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_for(e.key), ec);
    if (ec) {
      std::filesystem::remove(tmp);
      throw ProviderError("cannot publish cache entry " + e.key + ": " + ec.message());
    }
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace ffci
