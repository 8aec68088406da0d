// In-process deterministic endpoints for tests: direct Embedder/LlmClient
// implementations plus httplib servers speaking the wire formats.
#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "drift/embedding.hpp"
#include "drift/llm_client.hpp"

namespace drift_test {

using EmbedRule = std::function<std::vector<double>(const std::string&)>;
using ChatRule = std::function<std::string(const std::string&)>;

class FunctionEmbedder : public drift::Embedder {
 public:
  FunctionEmbedder(std::string model, EmbedRule rule)
      : model_(std::move(model)), rule_(std::move(rule)) {}

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    calls_.fetch_add(1);
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(drift::unit_normalize(rule_(t)));
    return out;
  }
  std::string model_id() const override { return model_; }
  uint64_t endpoint_calls() const override { return calls_.load(); }

 private:
  std::string model_;
  EmbedRule rule_;
  std::atomic<uint64_t> calls_{0};
};

class FunctionLlm : public drift::LlmClient {
 public:
  FunctionLlm(std::string id, ChatRule rule) : id_(std::move(id)), rule_(std::move(rule)) {}

  drift::CompletionResult complete(const std::string& prompt,
                                   const drift::DecodingParams&) override {
    calls_.fetch_add(1);
    drift::CompletionResult r;
    r.text = rule_(prompt);
    r.raw_response_json = drift::make_chat_response_json(r.text);
    return r;
  }
  std::string llm_id() const override { return id_; }
  uint64_t endpoint_calls() const override { return calls_.load(); }

 private:
  std::string id_;
  ChatRule rule_;
  std::atomic<uint64_t> calls_{0};
};

// Marker-driven embedding geometry: a text carrying "driftmark<k>" maps to
// the unit vector whose cosine against the plain-text vector (1,0) equals
// 0.95 - 0.1k; "unanswerable" maps to (0,1); anything else to (1,0).
inline double marker_similarity(int k) {
  double s = 0.95 - 0.1 * double(k);
  return s < 0.0 ? 0.0 : s;
}

inline std::vector<double> marker_embed_rule(const std::string& text) {
  size_t pos = text.find("driftmark");
  if (pos != std::string::npos) {
    int k = 0;
    size_t i = pos + 9;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      k = k * 10 + (text[i] - '0');
      i++;
    }
    double c = marker_similarity(k);
    return {c, std::sqrt(std::max(0.0, 1.0 - c * c))};
  }
  if (text.find("unanswerable") != std::string::npos) return {0.0, 1.0};
  return {1.0, 0.0};
}

// HTTP wrapper around an embed rule, OpenAI-style wire format. Optionally
// answers the first `fail_first` requests with HTTP 500.
class MockEmbedServer {
 public:
  explicit MockEmbedServer(EmbedRule rule, int fail_first = 0)
      : rule_(std::move(rule)), fail_remaining_(fail_first) {
    server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
      requests_.fetch_add(1);
      if (fail_remaining_.fetch_sub(1) > 0) {
        res.status = 500;
        res.set_content("{\"error\":\"scripted failure\"}", "application/json");
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      nlohmann::json data = nlohmann::json::array();
      for (const auto& text : body["input"]) {
        nlohmann::json item;
        item["embedding"] = rule_(text.get<std::string>());
        data.push_back(item);
      }
      nlohmann::json out;
      out["data"] = data;
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockEmbedServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  uint64_t requests() const { return requests_.load(); }

 private:
  EmbedRule rule_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<uint64_t> requests_{0};
  std::atomic<int> fail_remaining_;
};

// HTTP chat endpoint with an optional scripted failure prefix (HTTP 500 for
// the first `fail_first` requests).
class MockChatServer {
 public:
  explicit MockChatServer(ChatRule rule, int fail_first = 0)
      : rule_(std::move(rule)), fail_remaining_(fail_first) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   requests_.fetch_add(1);
                   if (fail_remaining_.fetch_sub(1) > 0) {
                     res.status = 500;
                     res.set_content("{\"error\":\"scripted failure\"}", "application/json");
                     return;
                   }
                   auto body = nlohmann::json::parse(req.body);
                   std::string prompt =
                       body["messages"][0]["content"].get<std::string>();
                   res.set_content(drift::make_chat_response_json(rule_(prompt)),
                                   "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockChatServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  uint64_t requests() const { return requests_.load(); }

 private:
  ChatRule rule_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<uint64_t> requests_{0};
  std::atomic<int> fail_remaining_;
};

// Pulls the passage between the first and last triple quotes, empty when
// the prompt is question-only.
inline std::string prompt_passage(const std::string& prompt) {
  size_t first = prompt.find("\"\"\"");
  if (first == std::string::npos) return "";
  size_t last = prompt.rfind("\"\"\"");
  if (last == first) return "";
  return prompt.substr(first + 3, last - first - 3);
}

inline std::string prompt_question(const std::string& prompt) {
  size_t pos = prompt.rfind("Question: ");
  if (pos == std::string::npos) return "";
  std::string q = prompt.substr(pos + 10);
  size_t eol = q.find('\n');
  if (eol != std::string::npos) q = q.substr(0, eol);
  return q;
}

}  // namespace drift_test
