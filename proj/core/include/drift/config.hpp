#pragma once

#include <map>
#include <string>
#include <vector>

#include "drift/embedding.hpp"
#include "drift/llm_client.hpp"
#include "drift/simdrift.hpp"
#include "drift/types.hpp"

namespace drift {

struct DatasetConfig {
  DatasetId id = DatasetId::SQUAD11;
  std::string path;    // canonical benchmark JSONL, or native with format=native
  std::string format = "canonical";
};

struct RevisionsConfig {
  std::string path;  // revision JSONL or MediaWiki XML, optionally .gz
};

struct CorpusConfig {
  std::string tag;
  std::string path;
};

struct LlmRunConfig {
  LlmEndpointConfig endpoint;
  std::string corpus_tag;  // which snapshot this model's similarity uses
};

// The single declarative source of truth for a run. Flags may override
// individual fields; the manifest records the effective configuration.
struct RunConfig {
  std::string out_dir;
  uint64_t seed = 0;
  double z = 1.96;
  double semantic_threshold = 0.6;
  ApcMode apc_mode = ApcMode::ANY;
  MultihopReduction multihop_reduction = MultihopReduction::MEAN;
  int bins = 10;  // fixed; config may restate it but not change it
  uint64_t min_bin_n = 10;
  double descend_floor = 0.5;
  bool weighted_trend = false;
  std::vector<PromptMode> modes = {PromptMode::WITH_CONTEXT, PromptMode::QUESTION_ONLY};
  int endpoint_failure_budget = 0;
  size_t chunk_tokens = 256;
  size_t chunk_stride = 128;
  uint64_t max_index_bytes = 1ull << 31;

  EmbeddingEndpointConfig embedding;
  DecodingParams decoding;          // max_tokens for short-form answers
  int max_tokens_long = 512;        // FREEFORM and CoT calls

  std::vector<DatasetConfig> datasets;
  std::vector<RevisionsConfig> revisions;
  std::vector<CorpusConfig> corpora;
  std::vector<LlmRunConfig> llms;

  std::string config_path;

  // Stable serialization of the effective configuration; hashed into every
  // stage manifest. Credentials never appear (only env var names do).
  std::string canonical_json() const;
  std::string digest() const;
};

// Parses and validates; every violated invariant is collected and reported
// in one ConfigError naming the offending key paths. No partial acceptance.
RunConfig validate_config(const std::string& path);

}  // namespace drift
