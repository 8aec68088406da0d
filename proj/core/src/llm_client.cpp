#include "drift/llm_client.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "drift/errors.hpp"
#include "drift/sha256.hpp"
#include "drift/util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace drift {

std::string DecodingParams::canonical_json() const {
  json j;
  j["temperature"] = temperature;
  j["top_p"] = top_p;
  j["max_tokens"] = max_tokens;
  return j.dump();
}

std::string llm_cache_key(const std::string& llm_id, const std::string& prompt,
                          const DecodingParams& params) {
  Sha256 h;
  h.update(llm_id);
  h.update(std::string(1, '\0'));
  h.update(prompt);
  h.update(std::string(1, '\0'));
  h.update(params.canonical_json());
  auto digest = h.finish();
  static const char* kHex = "0123456789abcdef";
  std::string key(64, '0');
  for (int i = 0; i < 32; i++) {
    key[2 * i] = kHex[digest[size_t(i)] >> 4];
    key[2 * i + 1] = kHex[digest[size_t(i)] & 0xf];
  }
  return key;
}

std::string extract_completion_text(const std::string& raw_response_json) {
  json j = json::parse(raw_response_json, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
    raise(ErrorKind::Endpoint, "chat response missing choices");
  }
  const json& msg = j["choices"][0];
  if (msg.contains("message") && msg["message"].contains("content")) {
    return msg["message"]["content"].get<std::string>();
  }
  if (msg.contains("text")) return msg["text"].get<std::string>();
  raise(ErrorKind::Endpoint, "chat response missing message content");
}

std::string make_chat_response_json(const std::string& text) {
  json j;
  j["choices"] = json::array({json{{"message", json{{"content", text}}}}});
  return j.dump();
}

namespace {

class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(LlmEndpointConfig config) : config_(std::move(config)) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }

  std::string llm_id() const override { return config_.llm_id; }
  uint64_t endpoint_calls() const override { return calls_.load(); }

  CompletionResult complete(const std::string& prompt, const DecodingParams& params) override {
    json body;
    body["model"] = config_.model;
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = params.temperature;
    body["top_p"] = params.top_p;
    body["max_tokens"] = params.max_tokens;
    std::string payload = body.dump();

    std::string last_error;
    bool timed_out = false;
    for (int attempt = 0; attempt <= config_.retries; attempt++) {
      if (attempt > 0) {
        double delay = config_.backoff_initial_s * std::pow(2.0, attempt - 1);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      }
      httplib::Client client(config_.base_url);
      client.set_connection_timeout(config_.timeout_s, 0);
      client.set_read_timeout(config_.timeout_s, 0);
      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
      calls_.fetch_add(1);
      auto res = client.Post(config_.path, headers, payload, "application/json");
      if (!res) {
        timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                    res.error() == httplib::Error::Read;
        last_error = "transport: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        timed_out = false;
        continue;
      }
      if (res->status != 200) {
        raise(ErrorKind::Endpoint, "llm endpoint returned HTTP " + std::to_string(res->status));
      }
      CompletionResult result;
      result.raw_response_json = res->body;
      result.text = extract_completion_text(res->body);
      result.retries_used = attempt;
      return result;
    }
    raise(timed_out ? ErrorKind::Timeout : ErrorKind::Endpoint,
          "llm endpoint '" + config_.llm_id + "' failed after " +
              std::to_string(config_.retries + 1) + " attempts (" + last_error + ")");
  }

 private:
  LlmEndpointConfig config_;
  std::string api_key_;
  std::atomic<uint64_t> calls_{0};
};

class CachingLlmClient : public LlmClient {
 public:
  CachingLlmClient(std::shared_ptr<LlmClient> upstream, std::string cache_dir)
      : upstream_(std::move(upstream)), cache_dir_(std::move(cache_dir)) {
    fs::create_directories(cache_dir_);
  }

  std::string llm_id() const override { return upstream_->llm_id(); }
  uint64_t endpoint_calls() const override { return upstream_->endpoint_calls(); }

  CompletionResult complete(const std::string& prompt, const DecodingParams& params) override {
    std::string key = llm_cache_key(llm_id(), prompt, params);
    fs::path file = fs::path(cache_dir_) / (key + ".json");
    {
      std::ifstream in(file, std::ios::binary);
      if (in) {
        std::string body((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        CompletionResult result;
        result.raw_response_json = body;
        result.text = extract_completion_text(body);
        result.from_cache = true;
        return result;
      }
    }
    CompletionResult result = upstream_->complete(prompt, params);
    {
      std::lock_guard<std::mutex> lock(write_mu_);
      write_file_atomic(file.string(), result.raw_response_json);
    }
    return result;
  }

 private:
  std::shared_ptr<LlmClient> upstream_;
  std::string cache_dir_;
  std::mutex write_mu_;
};

}  // namespace

std::unique_ptr<LlmClient> make_http_llm_client(const LlmEndpointConfig& config) {
  return std::make_unique<HttpLlmClient>(config);
}

std::unique_ptr<LlmClient> make_caching_llm_client(std::shared_ptr<LlmClient> upstream,
                                                   const std::string& cache_dir) {
  return std::make_unique<CachingLlmClient>(std::move(upstream), cache_dir);
}

}  // namespace drift
