#pragma once

#include <set>
#include <string>
#include <vector>

#include "drift/embedding.hpp"
#include "drift/types.hpp"

namespace drift {

// Inclusion Match: 1 iff the normalized, ASCII-case-folded output contains
// any normalized, case-folded gold answer as a substring. For YESNO the
// predicted label must be present as a word and the opposite label absent,
// so outputs naming both labels score 0.
int score_inclusion_match(const std::string& raw_output,
                          const std::vector<std::string>& gold_answers,
                          TaskKind task_kind = TaskKind::EXTRACTIVE);

struct SemanticScore {
  int correct = 0;
  double similarity = 0.0;
};

// Free-form scoring: 1 iff cosine(embed(output), embed(gold)) is strictly
// above the threshold.
SemanticScore score_semantic(const std::string& raw_output, const std::string& gold,
                             Embedder& embedder, double threshold = 0.6);

// Max over golds; correct if any clears the threshold.
SemanticScore score_semantic_multi(const std::string& raw_output,
                                   const std::vector<std::string>& gold_answers,
                                   Embedder& embedder, double threshold = 0.6);

// For WITH_CONTEXT_COT outputs: the text after the final "Answer:" marker
// when present, the whole output otherwise.
std::string cot_answer_span(const std::string& raw_output);

struct ParametricFilterResult {
  std::set<std::string> excluded_instance_ids;
  uint64_t instances_probed = 0;
  uint64_t instances_filtered = 0;
  double filtered_percent = 0.0;  // the context-free success rate analogue
};

// One (dataset, llm) group: excludes every instance whose QUESTION_ONLY
// probe was scored correct. MissingProbe when an id in `instance_ids` has
// no probe record among `records` for this llm.
ParametricFilterResult parametric_filter(const std::vector<PredictionRecord>& records,
                                         const std::vector<std::string>& instance_ids,
                                         const std::string& llm_id);

void write_predictions_jsonl(const std::string& path,
                             const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path);

}  // namespace drift
