#include "drift/embedding.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"

#include "drift/errors.hpp"
#include "drift/sha256.hpp"
#include "drift/util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace drift {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    raise(ErrorKind::DimensionMismatch,
          "cosine over dims " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); i++) dot += a[i] * b[i];
  if (dot > 1.0) dot = 1.0;
  if (dot < -1.0) dot = -1.0;
  return dot;
}

double clamped_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  double c = cosine(a, b);
  return c < 0.0 ? 0.0 : c;
}

std::vector<double> unit_normalize(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm <= 0.0 || !std::isfinite(norm)) {
    raise(ErrorKind::Endpoint, "embedding vector has zero or non-finite norm");
  }
  for (double& x : v) x /= norm;
  return v;
}

std::string embedding_cache_key(const std::string& model_id, const std::string& text) {
  Sha256 h;
  h.update(model_id);
  h.update(std::string(1, '\0'));
  h.update(text);
  auto digest = h.finish();
  static const char* kHex = "0123456789abcdef";
  std::string key(64, '0');
  for (int i = 0; i < 32; i++) {
    key[2 * i] = kHex[digest[size_t(i)] >> 4];
    key[2 * i + 1] = kHex[digest[size_t(i)] & 0xf];
  }
  return key;
}

namespace {

class HttpEmbedder : public Embedder {
 public:
  explicit HttpEmbedder(EmbeddingEndpointConfig config) : config_(std::move(config)) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }

  std::string model_id() const override { return config_.model; }
  uint64_t endpoint_calls() const override { return calls_.load(); }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    if (texts.empty()) return {};
    std::vector<std::vector<double>> out(texts.size());
    size_t batch = size_t(std::max(config_.batch_size, 1));
    std::vector<std::pair<size_t, size_t>> ranges;
    for (size_t start = 0; start < texts.size(); start += batch) {
      ranges.emplace_back(start, std::min(start + batch, texts.size()));
    }
    parallel_for(ranges.size(), unsigned(std::max(config_.max_in_flight, 1)), [&](size_t ri) {
      auto [lo, hi] = ranges[ri];
      std::vector<std::string> slice(texts.begin() + long(lo), texts.begin() + long(hi));
      auto vectors = embed_batch(slice);
      for (size_t i = 0; i < vectors.size(); i++) out[lo + i] = std::move(vectors[i]);
    });
    size_t dim = out.empty() ? 0 : out[0].size();
    for (const auto& v : out) {
      if (v.size() != dim) {
        raise(ErrorKind::DimensionMismatch, "embedding dimensions differ across batch");
      }
    }
    return out;
  }

 private:
  std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) {
    json body;
    body["model"] = config_.model;
    body["input"] = texts;
    std::string payload = body.dump();

    std::string last_error;
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
        last_error = "transport: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        raise(ErrorKind::Endpoint,
              "embedding endpoint returned HTTP " + std::to_string(res->status));
      }
      json parsed = json::parse(res->body, nullptr, false);
      if (parsed.is_discarded() || !parsed.contains("data")) {
        last_error = "malformed response body";
        continue;
      }
      const json& data = parsed["data"];
      if (!data.is_array() || data.size() != texts.size()) {
        raise(ErrorKind::Endpoint, "embedding response count mismatch");
      }
      std::vector<std::vector<double>> vectors;
      vectors.reserve(data.size());
      for (const auto& item : data) {
        vectors.push_back(unit_normalize(item.at("embedding").get<std::vector<double>>()));
      }
      return vectors;
    }
    raise(ErrorKind::Endpoint, "embedding endpoint failed after " +
                                   std::to_string(config_.retries + 1) + " attempts (" +
                                   last_error + ")");
  }

  EmbeddingEndpointConfig config_;
  std::string api_key_;
  std::atomic<uint64_t> calls_{0};
};

class CachingEmbedder : public Embedder {
 public:
  CachingEmbedder(std::shared_ptr<Embedder> upstream, std::string cache_dir)
      : upstream_(std::move(upstream)), cache_dir_(std::move(cache_dir)) {
    if (!cache_dir_.empty()) fs::create_directories(cache_dir_);
  }

  std::string model_id() const override { return upstream_->model_id(); }
  uint64_t endpoint_calls() const override { return upstream_->endpoint_calls(); }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    std::vector<std::vector<double>> out(texts.size());
    std::vector<size_t> missing;
    for (size_t i = 0; i < texts.size(); i++) {
      std::string key = embedding_cache_key(model_id(), texts[i]);
      auto hit = lookup(key);
      if (hit) {
        out[i] = std::move(*hit);
      } else {
        missing.push_back(i);
      }
    }
    if (missing.empty()) return out;
    // Dedupe upstream requests; identical texts share one vector.
    std::vector<std::string> unique_texts;
    std::unordered_map<std::string, size_t> position;
    std::vector<size_t> slot(missing.size());
    for (size_t m = 0; m < missing.size(); m++) {
      const std::string& t = texts[missing[m]];
      auto it = position.find(t);
      if (it == position.end()) {
        position.emplace(t, unique_texts.size());
        slot[m] = unique_texts.size();
        unique_texts.push_back(t);
      } else {
        slot[m] = it->second;
      }
    }
    auto fresh = upstream_->embed(unique_texts);
    for (size_t u = 0; u < unique_texts.size(); u++) {
      store(embedding_cache_key(model_id(), unique_texts[u]), fresh[u]);
    }
    for (size_t m = 0; m < missing.size(); m++) out[missing[m]] = fresh[slot[m]];
    return out;
  }

 private:
  std::optional<std::vector<double>> lookup(const std::string& key) {
    {
      std::shared_lock lock(mu_);
      auto it = memory_.find(key);
      if (it != memory_.end()) return it->second;
    }
    if (cache_dir_.empty()) return std::nullopt;
    fs::path file = disk_path(key);
    std::ifstream in(file);
    if (!in) return std::nullopt;
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("embedding")) return std::nullopt;
    auto vec = j["embedding"].get<std::vector<double>>();
    {
      std::unique_lock lock(mu_);
      memory_[key] = vec;
    }
    return vec;
  }

  void store(const std::string& key, const std::vector<double>& vec) {
    {
      std::unique_lock lock(mu_);
      memory_[key] = vec;
    }
    if (cache_dir_.empty()) return;
    json j;
    j["model"] = model_id();
    j["embedding"] = vec;
    write_file_atomic(disk_path(key).string(), j.dump());
  }

  fs::path disk_path(const std::string& key) const {
    return fs::path(cache_dir_) / (key + ".json");
  }

  std::shared_ptr<Embedder> upstream_;
  std::string cache_dir_;
  std::shared_mutex mu_;
  std::unordered_map<std::string, std::vector<double>> memory_;
};

}  // namespace

std::unique_ptr<Embedder> make_http_embedder(const EmbeddingEndpointConfig& config) {
  return std::make_unique<HttpEmbedder>(config);
}

std::unique_ptr<Embedder> make_caching_embedder(std::shared_ptr<Embedder> upstream,
                                                const std::string& cache_dir) {
  return std::make_unique<CachingEmbedder>(std::move(upstream), cache_dir);
}

}  // namespace drift
