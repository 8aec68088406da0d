#include "drift/scoring.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "drift/errors.hpp"
#include "drift/text.hpp"
#include "drift/util.hpp"

namespace drift {

int score_inclusion_match(const std::string& raw_output,
                          const std::vector<std::string>& gold_answers, TaskKind task_kind) {
  std::string output = normalize_text(raw_output);
  if (task_kind == TaskKind::YESNO) {
    bool has_true = contains_word_ci(output, "TRUE");
    bool has_false = contains_word_ci(output, "FALSE");
    if (has_true == has_false) return 0;  // neither, or contradictory both
    const std::string& gold = gold_answers.at(0);
    return (gold == "TRUE" ? has_true : has_false) ? 1 : 0;
  }
  std::string folded = ascii_fold(output);
  for (const auto& gold : gold_answers) {
    std::string needle = ascii_fold(normalize_text(gold));
    if (!needle.empty() && contains_substring(folded, needle)) return 1;
  }
  return 0;
}

SemanticScore score_semantic(const std::string& raw_output, const std::string& gold,
                             Embedder& embedder, double threshold) {
  auto vectors = embedder.embed({normalize_text(raw_output), normalize_text(gold)});
  SemanticScore score;
  score.similarity = cosine(vectors[0], vectors[1]);
  score.correct = score.similarity > threshold ? 1 : 0;
  return score;
}

SemanticScore score_semantic_multi(const std::string& raw_output,
                                   const std::vector<std::string>& gold_answers,
                                   Embedder& embedder, double threshold) {
  SemanticScore best;
  bool first = true;
  for (const auto& gold : gold_answers) {
    SemanticScore s = score_semantic(raw_output, gold, embedder, threshold);
    if (first || s.similarity > best.similarity) {
      best = s;
      first = false;
    }
  }
  return best;
}

std::string cot_answer_span(const std::string& raw_output) {
  static const std::string kMarker = "Answer:";
  size_t pos = raw_output.rfind(kMarker);
  if (pos == std::string::npos) return raw_output;
  size_t start = pos + kMarker.size();
  while (start < raw_output.size() && (raw_output[start] == ' ' || raw_output[start] == '\n')) {
    start++;
  }
  return raw_output.substr(start);
}

ParametricFilterResult parametric_filter(const std::vector<PredictionRecord>& records,
                                         const std::vector<std::string>& instance_ids,
                                         const std::string& llm_id) {
  std::unordered_map<std::string, const PredictionRecord*> probes;
  for (const auto& r : records) {
    if (r.mode == PromptMode::QUESTION_ONLY && r.llm_id == llm_id) {
      probes.emplace(r.instance_id, &r);
    }
  }
  ParametricFilterResult result;
  std::unordered_set<std::string> seen;
  for (const auto& id : instance_ids) {
    if (!seen.insert(id).second) continue;
    auto it = probes.find(id);
    if (it == probes.end()) {
      raise(ErrorKind::MissingProbe,
            "instance '" + id + "' has no question-only record for llm '" + llm_id + "'");
    }
    result.instances_probed++;
    if (it->second->correct == 1) {
      result.instances_filtered++;
      result.excluded_instance_ids.insert(id);
    }
  }
  if (result.instances_probed > 0) {
    result.filtered_percent =
        100.0 * double(result.instances_filtered) / double(result.instances_probed);
  }
  return result;
}

void write_predictions_jsonl(const std::string& path,
                             const std::vector<PredictionRecord>& records) {
  std::string content;
  for (const auto& r : records) {
    content += prediction_to_json_line(r);
    content += '\n';
  }
  write_file_atomic(path, content);
}

std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path) {
  std::vector<PredictionRecord> out;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    line_no++;
    if (line.empty()) continue;
    out.push_back(prediction_from_json_line(line, line_no));
  }
  return out;
}

}  // namespace drift
