// Deterministic synthetic evaluation world: scripted articles with revision
// chains of controlled edit magnitude, benchmark questions over them, a
// training-corpus snapshot, and the ground truth needed by an independent
// enumeration oracle. The marker geometry makes similarity a known
// decreasing function of injected edit distance (see marker_embed_rule),
// and the scripted LLM answers correctly iff the evidence token survives
// within the first 200 characters of the passage it is shown.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "drift/types.hpp"

namespace drift_test {

struct EditEvent {
  std::string title;
  int k = 0;             // injected edit magnitude, 1..9
  std::string edited;    // full edited paragraph text
  bool duplicate_of_previous = false;  // scripted revert+repeat, collapses
};

struct SyntheticWorld {
  std::vector<drift::QAInstance> instances;
  std::map<std::string, std::vector<drift::RevisionRecord>> histories;
  std::vector<drift::CorpusDoc> corpus_docs;
  std::set<std::string> corpus_titles;       // titles with same-title docs
  std::map<std::string, std::string> base_paragraph;  // title -> original
  std::map<std::string, std::vector<EditEvent>> events;  // title -> scripted edits
  std::set<std::string> known_questions;  // answered correctly context-free

  // question -> gold answers, for the scripted LLM
  std::map<std::string, std::vector<std::string>> gold_by_question;
};

SyntheticWorld build_synthetic_world();

// The scripted LLM behavior shared by the in-process client and the HTTP
// mock: `passage` empty means question-only.
std::string scripted_llm_answer(const SyntheticWorld& world, const std::string& passage,
                                const std::string& question);

// Expected aggregates computed by brute-force enumeration of the script,
// independent of the pipeline implementation.
struct OracleExpectations {
  // dataset -> bin -> (n, k)
  std::map<drift::DatasetId, std::map<int, std::pair<uint64_t, uint64_t>>> bins;
  std::map<drift::DatasetId, double> filter_percent;
  std::map<drift::DatasetId, uint64_t> apc_answer_lost;
  std::map<drift::DatasetId, uint64_t> apc_too_short;
  uint64_t total_variants = 0;
};

OracleExpectations enumerate_oracle(const SyntheticWorld& world);

}  // namespace drift_test
