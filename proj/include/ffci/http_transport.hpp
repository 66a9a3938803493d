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
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "ffci/error.hpp"
#include "ffci/provider.hpp"

namespace ffci {

// JSON-over-HTTP transport for the provider protocol. A fresh client per
// call keeps concurrent batches independent.
class HttpTransport : public Transport {
 public:
  HttpTransport(std::string endpoint, std::chrono::milliseconds timeout)
      : endpoint_(std::move(endpoint)), timeout_(timeout) {}

  nlohmann::json post(const std::string& path,
                      const nlohmann::json& body) override {
    httplib::Client cli(endpoint_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    auto res = cli.Post(path, canonical_json(body), "application/json");
    if (!res) {
      auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::Write ||
          err == httplib::Error::ConnectionTimeout)
        throw ProviderError(path + ": provider timeout or I/O failure (" +
                            httplib::to_string(err) + ")");
      throw ProviderUnavailable(path + ": provider unreachable at " + endpoint_ +
                                " (" + httplib::to_string(err) + ")");
    }
    if (res->status == 404)
      throw ProviderError(path + ": not found (unknown model?): " + res->body);
    if (res->status != 200)
      throw ProviderError(path + ": HTTP " + std::to_string(res->status) + ": " +
                          res->body);
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& ex) {
      throw ProviderError(path + ": response is not JSON: " + ex.what());
    }
  }

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

inline std::shared_ptr<CachingProvider> make_provider(const ProviderConfig& cfg) {
  std::shared_ptr<Transport> transport;
  if (!cfg.cache_only())
    transport = std::make_shared<HttpTransport>(cfg.endpoint, cfg.timeout);
  return std::make_shared<CachingProvider>(cfg, std::move(transport));
}

}  // namespace ffci
