/*
 * Copyright 2026 The crossrisk Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <regex>
#include <thread>

#include "crossrisk/eval.hpp"
#include "httplib.h"
#include "json.hpp"

namespace crossrisk::eval {

struct HttpToxicityScorer::Impl {
  HttpScorerConfig config;
  std::string base;  // scheme://host[:port]
  std::string path;

  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;
};

HttpToxicityScorer::HttpToxicityScorer(HttpScorerConfig config)
    : impl_(std::make_unique<Impl>()) {
  static const std::regex kUrl(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config.endpoint, m, kUrl)) {
    throw Error(ErrorCode::kInvalidArgument,
                "toxicity endpoint must be http://host[:port]/path: " + config.endpoint);
  }
  if (config.retries < 0 || config.max_in_flight < 1 || config.timeout_ms < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad toxicity scorer limits");
  }
  impl_->base = m[1].str();
  impl_->path = m[2].matched ? m[2].str() : "/";
  impl_->config = std::move(config);
}

HttpToxicityScorer::~HttpToxicityScorer() = default;

std::optional<HttpScorerConfig> HttpToxicityScorer::ConfigFromEnvironment() {
  const char* endpoint = std::getenv("TOXICITY_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') return std::nullopt;
  HttpScorerConfig cfg;
  cfg.endpoint = endpoint;
  if (const char* key = std::getenv("TOXICITY_KEY")) cfg.key = key;
  return cfg;
}

std::optional<double> HttpToxicityScorer::Score(std::string_view text) const {
  Impl& s = *impl_;
  {
    std::unique_lock lock(s.mu);
    s.cv.wait(lock, [&] { return s.in_flight < s.config.max_in_flight; });
    ++s.in_flight;
  }
  struct Release {
    Impl& s;
    ~Release() {
      { std::lock_guard lock(s.mu); --s.in_flight; }
      s.cv.notify_one();
    }
  } release{s};

  httplib::Client client(s.base);
  const auto timeout = std::chrono::milliseconds(s.config.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!s.config.key.empty()) {
    headers.emplace("Authorization", "Bearer " + s.config.key);
  }
  const std::string body = nlohmann::json{{"text", std::string(text)}}.dump();

  for (int attempt = 0; attempt <= s.config.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 << (attempt - 1)));
    }
    auto res = client.Post(s.path, headers, body, "application/json");
    if (!res) continue;
    // 4xx other than throttling will not get better on retry.
    if (res->status >= 400 && res->status < 500 && res->status != 429) break;
    if (res->status != 200) continue;
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("score") ||
        !j["score"].is_number()) {
      continue;
    }
    const double score = j["score"].get<double>();
    if (std::isfinite(score) && score >= 0.0 && score <= 1.0) return score;
  }
  return std::nullopt;
}

}  // namespace crossrisk::eval
