#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace drift {

struct DecodingParams {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 256;  // FREEFORM / CoT calls use the long form

  std::string canonical_json() const;  // stable form used in cache keys
};

struct CompletionResult {
  std::string text;               // assistant message content
  std::string raw_response_json;  // exact body (or synthesized equivalent)
  int retries_used = 0;
  bool from_cache = false;
};

// Chat endpoint abstraction. complete() throws EndpointError/TimeoutError
// after bounded retries; callers record failures per prediction record.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual CompletionResult complete(const std::string& prompt, const DecodingParams& params) = 0;
  virtual std::string llm_id() const = 0;
  virtual uint64_t endpoint_calls() const = 0;
};

struct LlmEndpointConfig {
  std::string llm_id;
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env = "LLM_API_KEY";
  int retries = 3;
  double backoff_initial_s = 0.25;
  int timeout_s = 120;
};

// Chat-completion-compatible HTTP client:
//   request  {"model","messages":[{"role":"user","content":prompt}],
//             "temperature","top_p","max_tokens"}
//   response {"choices":[{"message":{"content": ...}}]}
std::unique_ptr<LlmClient> make_http_llm_client(const LlmEndpointConfig& config);

// Content-addressed response cache in front of any LlmClient, keyed by
// SHA-256 of (llm_id, prompt, params) and storing the raw response JSON.
std::unique_ptr<LlmClient> make_caching_llm_client(std::shared_ptr<LlmClient> upstream,
                                                   const std::string& cache_dir);

std::string llm_cache_key(const std::string& llm_id, const std::string& prompt,
                          const DecodingParams& params);

// Pulls choices[0].message.content out of a chat response body.
std::string extract_completion_text(const std::string& raw_response_json);

// Synthesizes a chat response body; mock clients use it so cached and
// fresh paths share one extraction route.
std::string make_chat_response_json(const std::string& text);

}  // namespace drift
