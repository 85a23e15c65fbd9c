/*
 * Copyright 2026 The Abasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "abasim/backend.hpp"
#include "abasim/errors.hpp"

namespace abasim {

struct HttpBackendConfig {
  std::string base_url;  // e.g. "http://localhost:8080/v1"
  std::string model;
  std::string api_key_env = "ABASIM_API_KEY";  // secret travels via environment only
  int timeout_seconds = 60;
  int max_retries = 3;
  double backoff_base_ms = 500.0;
  double backoff_cap_ms = 8000.0;
  bool sleep_between_retries = true;  // disabled in tests to keep them fast
};

// Chat-completions client. Transient failures (connection errors, 408/429,
// 5xx) are retried with exponential backoff up to max_retries; the retry
// count and the backoff schedule taken are recorded on the response.
class HttpBackend : public TextBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ArgumentError("http backend requires a base_url");
    auto scheme_end = config_.base_url.find("://");
    std::size_t path_start = scheme_end == std::string::npos
                                 ? config_.base_url.find('/')
                                 : config_.base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      host_ = config_.base_url;
    } else {
      host_ = config_.base_url.substr(0, path_start);
      path_prefix_ = config_.base_url.substr(path_start);
    }
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ArgumentError("environment variable " + config_.api_key_env +
                          " must hold the API key");
    }
    api_key_ = key;
  }

  GenerationResponse complete(const GenerationRequest& request) override {
    validate_request(request);
    nlohmann::json body;
    body["model"] = config_.model;
    nlohmann::json messages = nlohmann::json::array();
    if (!request.system_prompt.empty()) {
      messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    for (const ChatMessage& m : request.messages) {
      messages.push_back({{"role", m.role}, {"content", m.text}});
    }
    body["messages"] = std::move(messages);
    body["temperature"] = request.params.temperature;
    body["max_tokens"] = request.params.max_tokens;
    if (request.params.seed) body["seed"] = *request.params.seed;
    const std::string payload = body.dump();

    GenerationResponse out;
    auto started = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        double delay = config_.backoff_base_ms * std::pow(2.0, attempt - 1);
        if (delay > config_.backoff_cap_ms) delay = config_.backoff_cap_ms;
        out.backoff_ms.push_back(delay);
        if (config_.sleep_between_retries) {
          std::this_thread::sleep_for(
              std::chrono::milliseconds(static_cast<long long>(delay)));
        }
        out.retry_count = attempt;
      }
      httplib::Client client(host_);
      client.set_connection_timeout(config_.timeout_seconds);
      client.set_read_timeout(config_.timeout_seconds);
      httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
      auto result =
          client.Post(path_prefix_ + "/chat/completions", headers, payload, "application/json");
      if (!result) {
        last_error = "connection failure: " + httplib::to_string(result.error());
        continue;
      }
      if (is_transient(result->status)) {
        last_error = "transient provider status " + std::to_string(result->status);
        continue;
      }
      if (result->status != 200) {
        throw BackendError("provider returned status " + std::to_string(result->status) + ": " +
                               result->body,
                           result->status);
      }
      nlohmann::json reply = nlohmann::json::parse(result->body, nullptr, false);
      if (reply.is_discarded()) throw BackendError("provider returned malformed JSON");
      try {
        out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("unexpected completion shape: ") + e.what());
      }
      if (reply.contains("usage")) {
        const auto& usage = reply["usage"];
        if (usage.contains("prompt_tokens")) out.prompt_tokens = usage["prompt_tokens"].get<int>();
        if (usage.contains("completion_tokens")) {
          out.completion_tokens = usage["completion_tokens"].get<int>();
        }
      }
      out.latency_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      return out;
    }
    throw BackendError("backend failed after " + std::to_string(config_.max_retries) +
                       " retries: " + last_error);
  }

 private:
  static bool is_transient(int status) {
    return status == 408 || status == 429 || status >= 500;
  }

  HttpBackendConfig config_;
  std::string host_;
  std::string path_prefix_;
  std::string api_key_;
};

}  // namespace abasim
