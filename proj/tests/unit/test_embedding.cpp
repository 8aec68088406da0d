#include "doctest.h"

#include <cmath>
#include <set>

#include "drift/embedding.hpp"
#include "drift/errors.hpp"
#include "mock_endpoints.hpp"

using namespace drift;
using namespace drift_test;

namespace {

// 4-dim deterministic vector derived from the text bytes.
std::vector<double> hash_rule(const std::string& text) {
  double h = 1.0;
  for (char c : text) h = h * 31.0 + double(uint8_t(c));
  return {std::fmod(h, 97.0) + 1.0, std::fmod(h, 83.0) + 1.0, std::fmod(h, 71.0) + 1.0,
          std::fmod(h, 59.0) + 1.0};
}

EmbeddingEndpointConfig endpoint_for(const MockEmbedServer& server) {
  EmbeddingEndpointConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model = "mock-embed";
  cfg.retries = 2;
  cfg.backoff_initial_s = 0.01;
  return cfg;
}

}  // namespace

TEST_CASE("http embedder: order, unit norm, identical inputs") {
  MockEmbedServer server(hash_rule);
  auto embedder = make_http_embedder(endpoint_for(server));
  auto vectors = embedder->embed({"x", "y", "x"});
  REQUIRE(vectors.size() == 3);
  for (const auto& v : vectors) {
    double norm = 0;
    for (double d : v) norm += d * d;
    CHECK(std::abs(norm - 1.0) < 1e-12);
  }
  CHECK(vectors[0] == vectors[2]);  // embed(["x","x"]) gives identical vectors
  CHECK(vectors[0] != vectors[1]);
  CHECK(cosine(vectors[0], vectors[2]) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("http embedder: batching splits requests, order preserved") {
  MockEmbedServer server(hash_rule);
  EmbeddingEndpointConfig cfg = endpoint_for(server);
  cfg.batch_size = 64;
  cfg.max_in_flight = 2;
  auto embedder = make_http_embedder(cfg);
  std::vector<std::string> texts;
  for (int i = 0; i < 150; i++) texts.push_back("text-" + std::to_string(i));
  auto vectors = embedder->embed(texts);
  REQUIRE(vectors.size() == 150);
  CHECK(server.requests() == 3);  // 64 + 64 + 22
  // order preserved: each slot equals a direct single-text embedding
  auto single = embedder->embed({texts[149]});
  CHECK(vectors[149] == single[0]);
}

TEST_CASE("http embedder: retries then succeeds, raises after exhaustion") {
  SUBCASE("two failures then success") {
    MockEmbedServer server(hash_rule, /*fail_first=*/2);
    auto embedder = make_http_embedder(endpoint_for(server));
    auto vectors = embedder->embed({"t"});
    REQUIRE(vectors.size() == 1);
    CHECK(server.requests() == 3);
  }
  SUBCASE("exhausted retries raise EndpointError") {
    MockEmbedServer server(hash_rule, /*fail_first=*/50);
    auto embedder = make_http_embedder(endpoint_for(server));
    try {
      embedder->embed({"t"});
      FAIL("expected EndpointError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Endpoint);
    }
    CHECK(server.requests() == 3);  // initial + 2 retries
  }
}

TEST_CASE("http embedder: dimension mismatch across a batch") {
  MockEmbedServer server([](const std::string& text) -> std::vector<double> {
    if (text == "wide") return {1.0, 0.0, 0.0};
    return {1.0, 0.0};
  });
  EmbeddingEndpointConfig cfg = endpoint_for(server);
  cfg.batch_size = 1;  // forces the vectors into separate requests
  auto embedder = make_http_embedder(cfg);
  try {
    embedder->embed({"narrow", "wide"});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("cosine rejects mismatched dimensions") {
  CHECK_THROWS_AS(cosine({1.0, 0.0}, {1.0, 0.0, 0.0}), Error);
}

TEST_CASE("unit_normalize rejects zero vectors") {
  CHECK_THROWS_AS(unit_normalize({0.0, 0.0}), Error);
}
