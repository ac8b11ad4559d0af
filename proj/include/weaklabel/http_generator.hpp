// Copyright 2026 The weaklabel Authors.
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

// Remote ASR backend over HTTP.
//
// Request:  POST <endpoint>  {"uri", "parent_id", "start", "end"}  (seconds)
// Response: 200 {"text": "..."}
// Connection failures, timeouts and 5xx responses are retried with exponential
// backoff; 4xx fails immediately.

#include <chrono>
#include <semaphore>
#include <string>
#include <thread>

#include "httplib.h"
#include "weaklabel/generators.hpp"

namespace weaklabel {

class HttpGenerator final : public HypothesisGenerator {
 public:
  HttpGenerator(std::string id, HttpSettings settings)
      : HypothesisGenerator(std::move(id)),
        settings_(std::move(settings)),
        slots_(static_cast<std::ptrdiff_t>(settings_.max_in_flight)) {
    if (settings_.max_in_flight == 0 || settings_.max_in_flight > kMaxSlots)
      throw ValidationError("max_in_flight must be in [1, " + std::to_string(kMaxSlots) + "]");
    split_endpoint(settings_.endpoint, host_, path_);
  }

  Hypothesis generate(const Segment& s, std::string_view audio_uri = {}) const override {
    Json body{{"uri", std::string(audio_uri)},
              {"parent_id", s.parent_id},
              {"start", seconds_json(s.start)},
              {"end", seconds_json(s.end)}};
    const std::string payload = body.dump();
    std::string last_error;
    auto backoff = settings_.initial_backoff;
    for (int attempt = 0; attempt <= settings_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      httplib::Result res = post(payload);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw BackendError("generator '" + id() + "': HTTP " + std::to_string(res->status));
      try {
        Json reply = Json::parse(res->body);
        return {id(), reply.at("text").get<std::string>()};
      } catch (const nlohmann::json::exception& e) {
        throw BackendError("generator '" + id() + "': bad response body: " + e.what());
      }
    }
    throw BackendError("generator '" + id() + "' failed after " + std::to_string(settings_.retries + 1) +
                       " attempts: " + last_error);
  }

  const HttpSettings& settings() const noexcept { return settings_; }

  /// Splits "http://host:port/path" into "http://host:port" and "/path".
  static void split_endpoint(const std::string& endpoint, std::string& host, std::string& path) {
    auto scheme = endpoint.find("://");
    if (scheme == std::string::npos) throw ValidationError("endpoint must include a scheme: " + endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (endpoint.compare(0, scheme, "http") != 0)
      throw ValidationError("only http:// endpoints are supported in this build: " + endpoint);
#endif
    auto slash = endpoint.find('/', scheme + 3);
    host = endpoint.substr(0, slash);
    path = slash == std::string::npos ? "/" : endpoint.substr(slash);
  }

 private:
  static constexpr std::size_t kMaxSlots = 1024;

  httplib::Result post(const std::string& payload) const {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<kMaxSlots>& s;
      ~Release() { s.release(); }
    } release{slots_};
    httplib::Client client(host_);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(settings_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(settings_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!settings_.auth_token.empty()) headers.emplace("Authorization", "Bearer " + settings_.auth_token);
    return client.Post(path_, headers, payload, "application/json");
  }

  HttpSettings settings_;
  std::string host_;
  std::string path_;
  mutable std::counting_semaphore<kMaxSlots> slots_;
};

}  // namespace weaklabel
