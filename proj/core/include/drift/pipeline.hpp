#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "drift/config.hpp"
#include "drift/embedding.hpp"
#include "drift/llm_client.hpp"

namespace drift {

enum class Stage { INGEST, EVOLVE, SIMILARITY, VERBATIM, INFER, SCORE, ANALYZE, REPORT };

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);
std::vector<Stage> all_stages();

// Endpoint construction is injectable so tests can run the whole pipeline
// against deterministic in-process clients. The default factory builds the
// HTTP clients from the run configuration.
struct ClientFactory {
  std::function<std::shared_ptr<Embedder>(const RunConfig&)> make_embedder;
  std::function<std::shared_ptr<LlmClient>(const RunConfig&, const LlmRunConfig&)> make_llm;
};

ClientFactory http_client_factory();

enum class StageOutcome { RAN, SKIPPED };

// Runs one stage: validates upstream digests (StaleInput on mismatch),
// skips when this stage already ran over identical inputs and config
// (unless force), writes outputs atomically plus a digest manifest.
// Endpoint caches live under <out_dir>/cache and survive forced reruns.
StageOutcome run_stage(Stage stage, const RunConfig& config, const ClientFactory& clients,
                       bool force = false);

struct RunSummary {
  std::vector<std::pair<Stage, StageOutcome>> stages;
};

RunSummary run_all(const RunConfig& config, const ClientFactory& clients, bool force = false);

// Exclusive ownership of an output directory via a lock file, released on
// destruction.
class RunLock {
 public:
  explicit RunLock(const std::string& out_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::string path_;
};

}  // namespace drift
