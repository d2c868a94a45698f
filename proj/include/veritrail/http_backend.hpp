#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "veritrail/lm.hpp"

namespace veritrail {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{200};
  std::chrono::milliseconds max_delay{5000};
  double jitter = 0.2;  // each delay is scaled by 1 + jitter * u, u uniform in [-1, 1]
  uint64_t jitter_seed = 0;
};

// Chat-completions client. Retries transport failures, 429 and 5xx with
// exponential backoff; other failures surface immediately.
class HttpBackend : public LmBackend {
 public:
  HttpBackend(std::string endpoint, std::string model, std::string api_key,
              RetryPolicy retry = {}, std::chrono::milliseconds timeout = std::chrono::seconds(60),
              int max_inflight = 4)
      : model_(std::move(model)),
        api_key_(std::move(api_key)),
        retry_(retry),
        timeout_(timeout),
        rng_(mix64(retry.jitter_seed ^ 0x9a3c12f4d17ull)),
        inflight_(max_inflight < 1 ? 1 : max_inflight) {
    if (api_key_.empty())
      throw LmError(LmError::Kind::AuthMissing, "no API key configured");
    split_endpoint(endpoint);
  }

  // Reads VERITRAIL_API_KEY and, when no explicit endpoint is given,
  // VERITRAIL_ENDPOINT; refuses to construct without credentials.
  static std::unique_ptr<HttpBackend> from_env(const std::string& model,
                                               const std::string& endpoint = "",
                                               RetryPolicy retry = {}) {
    const char* key = std::getenv("VERITRAIL_API_KEY");
    if (key == nullptr || *key == '\0')
      throw LmError(LmError::Kind::AuthMissing,
                    "VERITRAIL_API_KEY is not set; refusing to call a backend");
    std::string ep = endpoint;
    if (ep.empty()) {
      const char* env_ep = std::getenv("VERITRAIL_ENDPOINT");
      if (env_ep != nullptr) ep = env_ep;
    }
    if (ep.empty())
      throw Error("no endpoint configured: pass --endpoint or set VERITRAIL_ENDPOINT");
    return std::make_unique<HttpBackend>(ep, model, key, retry);
  }

  GenerationResult generate(const GenerationRequest& request) override {
    nlohmann::json body;
    body["model"] = model_;
    body["messages"] = {{{"role", "system"}, {"content", request.system_prompt}},
                        {{"role", "user"}, {"content", request.user_prompt}}};
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    if (request.seed) body["seed"] = *request.seed;
    const std::string payload = body.dump();

    LmError last(LmError::Kind::TransportError, "request was never attempted");
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
      if (attempt > 1) std::this_thread::sleep_for(backoff_delay(attempt - 1));
      auto started = std::chrono::steady_clock::now();
      httplib::Result res = post(payload);
      auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);

      if (!res) {
        bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                         res.error() == httplib::Error::Read || res.error() == httplib::Error::Write;
        last = LmError(timed_out ? LmError::Kind::Timeout : LmError::Kind::TransportError,
                       "transport failure: " + httplib::to_string(res.error()));
        continue;
      }
      if (res->status == 429) {
        last = LmError(LmError::Kind::RateLimited, "backend returned 429");
        continue;
      }
      if (res->status >= 500) {
        last = LmError(LmError::Kind::ServerError,
                       "backend returned " + std::to_string(res->status));
        continue;
      }
      if (res->status == 401 || res->status == 403)
        throw LmError(LmError::Kind::AuthMissing,
                      "backend rejected credentials with " + std::to_string(res->status));
      if (res->status != 200)
        throw LmError(LmError::Kind::MalformedResponse,
                      "backend returned " + std::to_string(res->status));
      return parse_response(res->body, elapsed);
    }
    throw last;
  }

 private:
  void split_endpoint(const std::string& endpoint) {
    size_t scheme = endpoint.find("://");
    size_t path = scheme == std::string::npos ? endpoint.find('/')
                                              : endpoint.find('/', scheme + 3);
    if (path == std::string::npos) {
      base_ = endpoint;
      prefix_.clear();
    } else {
      base_ = endpoint.substr(0, path);
      prefix_ = endpoint.substr(path);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
    if (base_.empty()) throw Error("endpoint '" + endpoint + "' has no host");
  }

  httplib::Result post(const std::string& payload) {
    inflight_.acquire();
    httplib::Client client(base_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    httplib::Result res =
        client.Post(prefix_ + "/chat/completions", headers, payload, "application/json");
    inflight_.release();
    return res;
  }

  GenerationResult parse_response(const std::string& body, std::chrono::milliseconds latency) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded())
      throw LmError(LmError::Kind::MalformedResponse, "backend response is not JSON");
    GenerationResult out;
    try {
      out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw LmError(LmError::Kind::MalformedResponse,
                    "backend response is missing choices[0].message.content");
    }
    if (j.contains("usage") && j["usage"].is_object()) {
      out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
      out.usage.completion_tokens = j["usage"].value("completion_tokens", 0L);
    }
    out.latency = latency;
    return out;
  }

  std::chrono::milliseconds backoff_delay(int retry_index) {
    auto delay = retry_.base_delay;
    for (int i = 1; i < retry_index; ++i) {
      delay *= 2;
      if (delay >= retry_.max_delay) break;
    }
    delay = std::min(delay, retry_.max_delay);
    double u;
    {
      std::lock_guard<std::mutex> lock(rng_mu_);
      u = rng_.unit() * 2.0 - 1.0;
    }
    double scaled = static_cast<double>(delay.count()) * (1.0 + retry_.jitter * u);
    if (scaled < 0.0) scaled = 0.0;
    return std::chrono::milliseconds(static_cast<long>(scaled));
  }

  std::string model_;
  std::string api_key_;
  std::string base_;
  std::string prefix_;
  RetryPolicy retry_;
  std::chrono::milliseconds timeout_;
  std::mutex rng_mu_;
  SplitMix rng_;
  std::counting_semaphore<256> inflight_;
};

}  // namespace veritrail
