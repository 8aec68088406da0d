#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace drift {

// Producer of unit-normalized embedding vectors, order-preserving over the
// input batch. Implementations must be safe for concurrent embed() calls.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
  virtual std::string model_id() const = 0;
  // Network round trips actually performed; cache hits do not count.
  virtual uint64_t endpoint_calls() const = 0;
};

struct EmbeddingEndpointConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8089
  std::string path = "/v1/embeddings";
  std::string model;
  std::string api_key_env = "EMBED_API_KEY";
  int batch_size = 64;
  int max_in_flight = 4;
  int retries = 3;
  double backoff_initial_s = 0.25;
  int timeout_s = 60;
};

// HTTP client for an embeddings endpoint:
//   request  {"model": ..., "input": [text, ...]}
//   response {"data": [{"embedding": [...]}, ...]}
// Batched with bounded in-flight concurrency; bounded retries with
// exponential backoff; raises EndpointError / DimensionMismatch.
std::unique_ptr<Embedder> make_http_embedder(const EmbeddingEndpointConfig& config);

// Content-hash cache in front of any Embedder. `cache_dir` may be empty for
// a purely in-memory cache. Concurrent reads, serialized writes.
std::unique_ptr<Embedder> make_caching_embedder(std::shared_ptr<Embedder> upstream,
                                                const std::string& cache_dir);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Cosine clamped into [0,1]; negatives land at 0 so bin 0 stays meaningful.
double clamped_similarity(const std::vector<double>& a, const std::vector<double>& b);

std::vector<double> unit_normalize(std::vector<double> v);

std::string embedding_cache_key(const std::string& model_id, const std::string& text);

}  // namespace drift
