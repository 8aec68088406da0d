#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace drift {

enum class DatasetId { SQUAD11, SQUAD20, ADVQA_DROBERTA, BOOLQ, WIKIWHY, HOTPOTQA };
enum class TaskKind { EXTRACTIVE, YESNO, FREEFORM, MULTIHOP };

const char* dataset_id_name(DatasetId id);
DatasetId dataset_id_from_name(const std::string& name);
TaskKind task_kind_for(DatasetId id);
const char* task_kind_name(TaskKind k);

// One benchmark question with its original passage(s).
struct QAInstance {
  std::string instance_id;
  DatasetId dataset_id = DatasetId::SQUAD11;
  TaskKind task_kind = TaskKind::EXTRACTIVE;
  std::vector<std::string> titles;
  std::map<std::string, std::vector<std::string>> original_paragraphs;
  std::vector<std::string> gold_titles;  // MULTIHOP only; subset of titles
  std::string question;
  std::vector<std::string> gold_answers;

  bool unanswerable() const {
    return dataset_id == DatasetId::SQUAD20 && gold_answers.size() == 1 &&
           gold_answers[0] == "unanswerable";
  }
};

struct RevisionRecord {
  std::string title;
  uint64_t rev_id = 0;
  std::string timestamp;  // ISO-8601 UTC
  std::string text;       // markup-stripped plain text, normalized
};

struct CorpusDoc {
  std::string doc_id;
  std::string title;  // empty when unknown (excluded from title matching)
  std::string text;
  std::string source_tag;
};

enum class ApcStatus { KEPT, DROPPED_ANSWER_LOST, DROPPED_TOO_SHORT };
const char* apc_status_name(ApcStatus s);
ApcStatus apc_status_from_name(const std::string& name);

enum class ApcMode { ANY, ALL };

// A naturally evolved successor of an original benchmark paragraph.
struct EditedVariant {
  std::string variant_id;
  std::string instance_id;
  std::string title;
  std::string original_paragraph;
  std::string edited_paragraph;
  uint64_t first_seen_rev = 0;  // rev id where the original last appeared
  uint64_t edited_rev = 0;      // rev id where the edited successor appears
  std::string timestamp;        // of edited_rev
  ApcStatus apc_status = ApcStatus::KEPT;
  uint32_t occurrence_index = 0;
};

struct SimilarityRecord {
  std::string variant_id;
  std::string corpus_tag;
  std::string embed_model_id;
  double max_similarity = 0.0;  // in [0,1]
  std::string matched_doc_id;
  int bin_index = 0;  // 0..9
  std::map<std::string, double> per_title_scores;  // MULTIHOP only
};

enum class PromptMode { WITH_CONTEXT, QUESTION_ONLY, WITH_CONTEXT_COT };
const char* prompt_mode_name(PromptMode m);
PromptMode prompt_mode_from_name(const std::string& name);

enum class Scorer { INCLUSION_MATCH, SEMANTIC_THRESHOLD };
const char* scorer_name(Scorer s);

struct PredictionRecord {
  std::string variant_id;   // empty for QUESTION_ONLY probes
  std::string instance_id;
  std::string llm_id;
  PromptMode mode = PromptMode::WITH_CONTEXT;
  std::string raw_output;
  int correct = 0;  // 0 or 1
  Scorer scorer = Scorer::INCLUSION_MATCH;
  std::optional<double> score_detail;  // semantic similarity when applicable
  bool endpoint_failed = false;        // recorded, never silently dropped
};

struct BinSummary {
  int bin_index = 0;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  uint64_t n = 0;
  uint64_t k = 0;
  std::optional<double> accuracy_percent;  // absent when n == 0
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  bool low_support = false;
};

struct TrendSummary {
  double slope = 0.0;      // accuracy-percent per unit similarity
  double intercept = 0.0;  // percent
  std::optional<double> pearson_r;  // absent when a coordinate has no variance
  int n_points = 0;
};

struct HumanBinResult {
  int bin_index = 0;
  uint64_t n_annotated = 0;
  uint64_t k_correct = 0;
  std::optional<double> accuracy_percent;
};

// JSONL codecs for the external interfaces. Each *_from_json_line throws
// SchemaError naming the offending field.
std::string instance_to_json_line(const QAInstance& q);
QAInstance instance_from_json_line(const std::string& line, size_t record_index);

std::string revision_to_json_line(const RevisionRecord& r);
RevisionRecord revision_from_json_line(const std::string& line, size_t line_number);

std::string corpus_doc_to_json_line(const CorpusDoc& d);

std::string variant_to_json_line(const EditedVariant& v);
EditedVariant variant_from_json_line(const std::string& line, size_t line_number);

std::string similarity_to_json_line(const SimilarityRecord& s);
SimilarityRecord similarity_from_json_line(const std::string& line, size_t line_number);

std::string prediction_to_json_line(const PredictionRecord& p);
PredictionRecord prediction_from_json_line(const std::string& line, size_t line_number);

}  // namespace drift
