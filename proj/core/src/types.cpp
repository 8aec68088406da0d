#include "drift/types.hpp"

#include "json.hpp"

#include "drift/errors.hpp"

using nlohmann::json;

namespace drift {

const char* dataset_id_name(DatasetId id) {
  switch (id) {
    case DatasetId::SQUAD11: return "SQUAD11";
    case DatasetId::SQUAD20: return "SQUAD20";
    case DatasetId::ADVQA_DROBERTA: return "ADVQA_DROBERTA";
    case DatasetId::BOOLQ: return "BOOLQ";
    case DatasetId::WIKIWHY: return "WIKIWHY";
    case DatasetId::HOTPOTQA: return "HOTPOTQA";
  }
  return "?";
}

DatasetId dataset_id_from_name(const std::string& name) {
  if (name == "SQUAD11") return DatasetId::SQUAD11;
  if (name == "SQUAD20") return DatasetId::SQUAD20;
  if (name == "ADVQA_DROBERTA") return DatasetId::ADVQA_DROBERTA;
  if (name == "BOOLQ") return DatasetId::BOOLQ;
  if (name == "WIKIWHY") return DatasetId::WIKIWHY;
  if (name == "HOTPOTQA") return DatasetId::HOTPOTQA;
  raise(ErrorKind::UnknownDataset, "unknown dataset id '" + name + "'");
}

TaskKind task_kind_for(DatasetId id) {
  switch (id) {
    case DatasetId::SQUAD11:
    case DatasetId::SQUAD20:
    case DatasetId::ADVQA_DROBERTA: return TaskKind::EXTRACTIVE;
    case DatasetId::BOOLQ: return TaskKind::YESNO;
    case DatasetId::WIKIWHY: return TaskKind::FREEFORM;
    case DatasetId::HOTPOTQA: return TaskKind::MULTIHOP;
  }
  return TaskKind::EXTRACTIVE;
}

const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::EXTRACTIVE: return "EXTRACTIVE";
    case TaskKind::YESNO: return "YESNO";
    case TaskKind::FREEFORM: return "FREEFORM";
    case TaskKind::MULTIHOP: return "MULTIHOP";
  }
  return "?";
}

const char* apc_status_name(ApcStatus s) {
  switch (s) {
    case ApcStatus::KEPT: return "KEPT";
    case ApcStatus::DROPPED_ANSWER_LOST: return "DROPPED_ANSWER_LOST";
    case ApcStatus::DROPPED_TOO_SHORT: return "DROPPED_TOO_SHORT";
  }
  return "?";
}

ApcStatus apc_status_from_name(const std::string& name) {
  if (name == "KEPT") return ApcStatus::KEPT;
  if (name == "DROPPED_ANSWER_LOST") return ApcStatus::DROPPED_ANSWER_LOST;
  if (name == "DROPPED_TOO_SHORT") return ApcStatus::DROPPED_TOO_SHORT;
  raise(ErrorKind::Schema, "unknown apc_status '" + name + "'");
}

const char* prompt_mode_name(PromptMode m) {
  switch (m) {
    case PromptMode::WITH_CONTEXT: return "WITH_CONTEXT";
    case PromptMode::QUESTION_ONLY: return "QUESTION_ONLY";
    case PromptMode::WITH_CONTEXT_COT: return "WITH_CONTEXT_COT";
  }
  return "?";
}

PromptMode prompt_mode_from_name(const std::string& name) {
  if (name == "WITH_CONTEXT") return PromptMode::WITH_CONTEXT;
  if (name == "QUESTION_ONLY") return PromptMode::QUESTION_ONLY;
  if (name == "WITH_CONTEXT_COT") return PromptMode::WITH_CONTEXT_COT;
  raise(ErrorKind::Schema, "unknown mode '" + name + "'");
}

const char* scorer_name(Scorer s) {
  switch (s) {
    case Scorer::INCLUSION_MATCH: return "INCLUSION_MATCH";
    case Scorer::SEMANTIC_THRESHOLD: return "SEMANTIC_THRESHOLD";
  }
  return "?";
}

namespace {

json parse_line(const std::string& line, size_t where, const char* what) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    raise(ErrorKind::Parse, std::string(what) + " record " + std::to_string(where) +
                                ": not a JSON object");
  }
  return j;
}

const json& need(const json& j, const char* field, size_t where, const char* what) {
  auto it = j.find(field);
  if (it == j.end()) {
    raise(ErrorKind::Schema, std::string(what) + " record " + std::to_string(where) +
                                 ": missing field '" + field + "'");
  }
  return *it;
}

std::string need_string(const json& j, const char* field, size_t where, const char* what) {
  const json& v = need(j, field, where, what);
  if (!v.is_string()) {
    raise(ErrorKind::Schema, std::string(what) + " record " + std::to_string(where) +
                                 ": field '" + field + "' must be a string");
  }
  return v.get<std::string>();
}

uint64_t need_uint(const json& j, const char* field, size_t where, const char* what) {
  const json& v = need(j, field, where, what);
  if (!v.is_number_unsigned() && !v.is_number_integer()) {
    raise(ErrorKind::Schema, std::string(what) + " record " + std::to_string(where) +
                                 ": field '" + field + "' must be an integer");
  }
  return v.get<uint64_t>();
}

}  // namespace

std::string instance_to_json_line(const QAInstance& q) {
  json j;
  j["instance_id"] = q.instance_id;
  j["dataset_id"] = dataset_id_name(q.dataset_id);
  j["question"] = q.question;
  j["titles"] = q.titles;
  json paras = json::object();
  for (const auto& [title, ps] : q.original_paragraphs) paras[title] = ps;
  j["paragraphs"] = paras;
  j["gold_titles"] = q.gold_titles;
  j["gold_answers"] = q.gold_answers;
  return j.dump();
}

QAInstance instance_from_json_line(const std::string& line, size_t record_index) {
  json j = parse_line(line, record_index, "benchmark");
  QAInstance q;
  q.instance_id = need_string(j, "instance_id", record_index, "benchmark");
  q.dataset_id = dataset_id_from_name(need_string(j, "dataset_id", record_index, "benchmark"));
  q.task_kind = task_kind_for(q.dataset_id);
  q.question = need_string(j, "question", record_index, "benchmark");
  const json& titles = need(j, "titles", record_index, "benchmark");
  if (!titles.is_array() || titles.empty()) {
    raise(ErrorKind::Schema, "benchmark record " + std::to_string(record_index) +
                                 ": field 'titles' must be a nonempty array");
  }
  for (const auto& t : titles) q.titles.push_back(t.get<std::string>());
  const json& paras = need(j, "paragraphs", record_index, "benchmark");
  for (auto it = paras.begin(); it != paras.end(); ++it) {
    std::vector<std::string> ps;
    for (const auto& p : it.value()) ps.push_back(p.get<std::string>());
    q.original_paragraphs[it.key()] = std::move(ps);
  }
  if (j.contains("gold_titles")) {
    for (const auto& t : j["gold_titles"]) q.gold_titles.push_back(t.get<std::string>());
  }
  const json& golds = need(j, "gold_answers", record_index, "benchmark");
  if (!golds.is_array() || golds.empty()) {
    raise(ErrorKind::Schema, "benchmark record " + std::to_string(record_index) +
                                 ": field 'gold_answers' must be a nonempty array");
  }
  for (const auto& g : golds) {
    if (g.is_boolean()) {
      q.gold_answers.push_back(g.get<bool>() ? "TRUE" : "FALSE");
    } else {
      q.gold_answers.push_back(g.get<std::string>());
    }
  }
  if (q.task_kind == TaskKind::YESNO) {
    for (auto& g : q.gold_answers) {
      if (g == "true" || g == "True") g = "TRUE";
      if (g == "false" || g == "False") g = "FALSE";
    }
    if (q.gold_answers.size() != 1 ||
        (q.gold_answers[0] != "TRUE" && q.gold_answers[0] != "FALSE")) {
      raise(ErrorKind::Schema, "benchmark record " + std::to_string(record_index) +
                                   ": YESNO gold_answers must be [\"TRUE\"] or [\"FALSE\"]");
    }
  }
  for (const auto& gt : q.gold_titles) {
    bool found = false;
    for (const auto& t : q.titles) found |= (t == gt);
    if (!found) {
      raise(ErrorKind::Schema, "benchmark record " + std::to_string(record_index) +
                                   ": gold_title '" + gt + "' not in titles");
    }
  }
  return q;
}

std::string revision_to_json_line(const RevisionRecord& r) {
  json j;
  j["title"] = r.title;
  j["rev_id"] = r.rev_id;
  j["timestamp"] = r.timestamp;
  j["text"] = r.text;
  return j.dump();
}

RevisionRecord revision_from_json_line(const std::string& line, size_t line_number) {
  json j = parse_line(line, line_number, "revision");
  RevisionRecord r;
  r.title = need_string(j, "title", line_number, "revision");
  r.rev_id = need_uint(j, "rev_id", line_number, "revision");
  r.timestamp = need_string(j, "timestamp", line_number, "revision");
  r.text = need_string(j, "text", line_number, "revision");
  return r;
}

std::string corpus_doc_to_json_line(const CorpusDoc& d) {
  json j;
  j["doc_id"] = d.doc_id;
  if (!d.title.empty()) j["title"] = d.title;
  j["text"] = d.text;
  return j.dump();
}

std::string variant_to_json_line(const EditedVariant& v) {
  json j;
  j["variant_id"] = v.variant_id;
  j["instance_id"] = v.instance_id;
  j["title"] = v.title;
  j["original_paragraph"] = v.original_paragraph;
  j["edited_paragraph"] = v.edited_paragraph;
  j["first_seen_rev"] = v.first_seen_rev;
  j["edited_rev"] = v.edited_rev;
  j["timestamp"] = v.timestamp;
  j["apc_status"] = apc_status_name(v.apc_status);
  j["occurrence_index"] = v.occurrence_index;
  return j.dump();
}

EditedVariant variant_from_json_line(const std::string& line, size_t line_number) {
  json j = parse_line(line, line_number, "variant");
  EditedVariant v;
  v.variant_id = need_string(j, "variant_id", line_number, "variant");
  v.instance_id = need_string(j, "instance_id", line_number, "variant");
  v.title = need_string(j, "title", line_number, "variant");
  v.original_paragraph = need_string(j, "original_paragraph", line_number, "variant");
  v.edited_paragraph = need_string(j, "edited_paragraph", line_number, "variant");
  v.first_seen_rev = need_uint(j, "first_seen_rev", line_number, "variant");
  v.edited_rev = need_uint(j, "edited_rev", line_number, "variant");
  v.timestamp = need_string(j, "timestamp", line_number, "variant");
  v.apc_status = apc_status_from_name(need_string(j, "apc_status", line_number, "variant"));
  v.occurrence_index = uint32_t(need_uint(j, "occurrence_index", line_number, "variant"));
  return v;
}

std::string similarity_to_json_line(const SimilarityRecord& s) {
  json j;
  j["variant_id"] = s.variant_id;
  j["corpus_tag"] = s.corpus_tag;
  j["embed_model_id"] = s.embed_model_id;
  j["max_similarity"] = s.max_similarity;
  j["matched_doc_id"] = s.matched_doc_id;
  j["bin_index"] = s.bin_index;
  if (!s.per_title_scores.empty()) {
    json scores = json::object();
    for (const auto& [title, score] : s.per_title_scores) scores[title] = score;
    j["per_title_scores"] = scores;
  }
  return j.dump();
}

SimilarityRecord similarity_from_json_line(const std::string& line, size_t line_number) {
  json j = parse_line(line, line_number, "similarity");
  SimilarityRecord s;
  s.variant_id = need_string(j, "variant_id", line_number, "similarity");
  s.corpus_tag = need_string(j, "corpus_tag", line_number, "similarity");
  s.embed_model_id = need_string(j, "embed_model_id", line_number, "similarity");
  s.max_similarity = need(j, "max_similarity", line_number, "similarity").get<double>();
  s.matched_doc_id = need_string(j, "matched_doc_id", line_number, "similarity");
  s.bin_index = int(need_uint(j, "bin_index", line_number, "similarity"));
  if (j.contains("per_title_scores")) {
    for (auto it = j["per_title_scores"].begin(); it != j["per_title_scores"].end(); ++it) {
      s.per_title_scores[it.key()] = it.value().get<double>();
    }
  }
  return s;
}

std::string prediction_to_json_line(const PredictionRecord& p) {
  json j;
  if (!p.variant_id.empty()) j["variant_id"] = p.variant_id;
  j["instance_id"] = p.instance_id;
  j["llm_id"] = p.llm_id;
  j["mode"] = prompt_mode_name(p.mode);
  j["raw_output"] = p.raw_output;
  j["correct"] = p.correct;
  j["scorer"] = scorer_name(p.scorer);
  if (p.score_detail) j["score_detail"] = *p.score_detail;
  if (p.endpoint_failed) j["endpoint_failed"] = true;
  return j.dump();
}

PredictionRecord prediction_from_json_line(const std::string& line, size_t line_number) {
  json j = parse_line(line, line_number, "prediction");
  PredictionRecord p;
  if (j.contains("variant_id")) p.variant_id = j["variant_id"].get<std::string>();
  p.instance_id = need_string(j, "instance_id", line_number, "prediction");
  p.llm_id = need_string(j, "llm_id", line_number, "prediction");
  p.mode = prompt_mode_from_name(need_string(j, "mode", line_number, "prediction"));
  p.raw_output = need_string(j, "raw_output", line_number, "prediction");
  p.correct = int(need_uint(j, "correct", line_number, "prediction"));
  std::string sc = need_string(j, "scorer", line_number, "prediction");
  p.scorer = sc == "SEMANTIC_THRESHOLD" ? Scorer::SEMANTIC_THRESHOLD : Scorer::INCLUSION_MATCH;
  if (j.contains("score_detail")) p.score_detail = j["score_detail"].get<double>();
  if (j.contains("endpoint_failed")) p.endpoint_failed = j["endpoint_failed"].get<bool>();
  return p;
}

}  // namespace drift
