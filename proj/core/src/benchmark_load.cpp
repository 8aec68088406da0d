#include "drift/benchmark_load.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "drift/errors.hpp"
#include "drift/text.hpp"
#include "drift/util.hpp"

using nlohmann::json;

namespace drift {

namespace {

// Canonical instances carry normalized text everywhere downstream.
void normalize_instance(QAInstance& q) {
  q.question = normalize_text(q.question);
  for (auto& g : q.gold_answers) g = normalize_text(g);
  std::map<std::string, std::vector<std::string>> paras;
  for (auto& [title, ps] : q.original_paragraphs) {
    std::vector<std::string> out;
    for (auto& p : ps) {
      for (auto& seg : segment_paragraphs(normalize_text(p))) out.push_back(std::move(seg));
    }
    paras[title] = std::move(out);
  }
  q.original_paragraphs = std::move(paras);
}

void validate_instance(const QAInstance& q, size_t index) {
  if (q.titles.empty()) {
    raise(ErrorKind::Schema, "benchmark record " + std::to_string(index) + ": titles empty");
  }
  if (q.gold_answers.empty()) {
    raise(ErrorKind::Schema,
          "benchmark record " + std::to_string(index) + ": gold_answers empty");
  }
  if (q.task_kind != TaskKind::MULTIHOP && q.titles.size() != 1) {
    raise(ErrorKind::Schema, "benchmark record " + std::to_string(index) +
                                 ": non-MULTIHOP instance must have exactly one title");
  }
}

std::vector<QAInstance> adapt_squad(const std::string& path, DatasetId dataset_id) {
  json root = json::parse(read_file(path), nullptr, false);
  if (root.is_discarded()) raise(ErrorKind::Parse, "not valid JSON: " + path);
  if (!root.contains("data")) {
    raise(ErrorKind::Schema, "benchmark record 0: missing field 'data'");
  }
  std::vector<QAInstance> out;
  for (const auto& article : root["data"]) {
    std::string title = article.value("title", "");
    size_t para_index = 0;
    for (const auto& para : article["paragraphs"]) {
      std::string context = para.value("context", "");
      for (const auto& qa : para["qas"]) {
        QAInstance q;
        q.dataset_id = dataset_id;
        q.task_kind = TaskKind::EXTRACTIVE;
        q.instance_id = qa.value("id", title + "#" + std::to_string(para_index));
        q.question = qa.value("question", "");
        q.titles = {title};
        q.original_paragraphs[title] = {context};
        bool impossible = qa.value("is_impossible", false);
        if (impossible) {
          q.gold_answers = {"unanswerable"};
        } else {
          std::set<std::string> answers;
          for (const auto& a : qa["answers"]) answers.insert(a.value("text", ""));
          answers.erase("");
          q.gold_answers.assign(answers.begin(), answers.end());
        }
        if (q.gold_answers.empty()) continue;  // malformed qa entry, skip
        out.push_back(std::move(q));
      }
      para_index++;
    }
  }
  return out;
}

std::vector<QAInstance> adapt_boolq(const std::string& path) {
  std::vector<QAInstance> out;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    line_no++;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      raise(ErrorKind::Parse, "benchmark record " + std::to_string(line_no) + ": bad JSON");
    }
    QAInstance q;
    q.dataset_id = DatasetId::BOOLQ;
    q.task_kind = TaskKind::YESNO;
    q.instance_id = j.contains("id") ? j["id"].get<std::string>()
                                     : "boolq-" + std::to_string(line_no);
    q.question = j.value("question", "");
    std::string title = j.value("title", "untitled-" + std::to_string(line_no));
    q.titles = {title};
    q.original_paragraphs[title] = {j.value("passage", "")};
    if (!j.contains("answer")) {
      raise(ErrorKind::Schema,
            "benchmark record " + std::to_string(line_no) + ": missing field 'answer'");
    }
    q.gold_answers = {j["answer"].get<bool>() ? "TRUE" : "FALSE"};
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<QAInstance> adapt_wikiwhy(const std::string& path) {
  std::string content = read_file(path);
  std::vector<json> records;
  json root = json::parse(content, nullptr, false);
  if (!root.is_discarded() && root.is_array()) {
    for (auto& r : root) records.push_back(std::move(r));
  } else {
    size_t line_no = 0;
    std::istringstream is(content);
    std::string line;
    while (std::getline(is, line)) {
      line_no++;
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        raise(ErrorKind::Parse, "benchmark record " + std::to_string(line_no) + ": bad JSON");
      }
      records.push_back(std::move(j));
    }
  }
  std::vector<QAInstance> out;
  size_t index = 0;
  for (const auto& j : records) {
    index++;
    QAInstance q;
    q.dataset_id = DatasetId::WIKIWHY;
    q.task_kind = TaskKind::FREEFORM;
    q.instance_id = j.contains("id") ? j["id"].get<std::string>()
                                     : "wikiwhy-" + std::to_string(index);
    q.question = j.value("question", "");
    std::string title = j.value("title", "untitled-" + std::to_string(index));
    q.titles = {title};
    q.original_paragraphs[title] = {j.value("passage", j.value("context", ""))};
    if (!j.contains("answer")) {
      raise(ErrorKind::Schema,
            "benchmark record " + std::to_string(index) + ": missing field 'answer'");
    }
    q.gold_answers = {j["answer"].get<std::string>()};
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<QAInstance> adapt_hotpotqa(const std::string& path) {
  json root = json::parse(read_file(path), nullptr, false);
  if (root.is_discarded() || !root.is_array()) {
    raise(ErrorKind::Parse, "HotpotQA input must be a JSON array: " + path);
  }
  std::vector<QAInstance> out;
  size_t index = 0;
  for (const auto& j : root) {
    index++;
    QAInstance q;
    q.dataset_id = DatasetId::HOTPOTQA;
    q.task_kind = TaskKind::MULTIHOP;
    q.instance_id = j.contains("_id") ? j["_id"].get<std::string>()
                                      : "hotpot-" + std::to_string(index);
    q.question = j.value("question", "");
    if (!j.contains("answer")) {
      raise(ErrorKind::Schema,
            "benchmark record " + std::to_string(index) + ": missing field 'answer'");
    }
    q.gold_answers = {j["answer"].get<std::string>()};
    if (!j.contains("context")) {
      raise(ErrorKind::Schema,
            "benchmark record " + std::to_string(index) + ": missing field 'context'");
    }
    for (const auto& entry : j["context"]) {
      std::string title = entry[0].get<std::string>();
      std::string text;
      for (const auto& sent : entry[1]) text += sent.get<std::string>();
      q.titles.push_back(title);
      q.original_paragraphs[title] = {text};
    }
    std::set<std::string> golds;
    if (!j.contains("supporting_facts")) {
      raise(ErrorKind::Schema, "benchmark record " + std::to_string(index) +
                                   ": missing field 'supporting_facts'");
    }
    for (const auto& fact : j["supporting_facts"]) golds.insert(fact[0].get<std::string>());
    for (const auto& t : q.titles) {
      if (golds.count(t)) q.gold_titles.push_back(t);
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace

std::vector<QAInstance> load_benchmark(const std::string& path, DatasetId dataset_id) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open " + path);
  std::vector<QAInstance> out;
  std::string line;
  size_t index = 0;
  while (std::getline(in, line)) {
    index++;
    if (line.empty()) continue;
    QAInstance q = instance_from_json_line(line, index);
    if (q.dataset_id != dataset_id) {
      raise(ErrorKind::Schema, "benchmark record " + std::to_string(index) +
                                   ": dataset_id mismatch, expected " +
                                   dataset_id_name(dataset_id));
    }
    normalize_instance(q);
    validate_instance(q, index);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<QAInstance> adapt_native_benchmark(const std::string& path, DatasetId dataset_id) {
  std::vector<QAInstance> out;
  switch (dataset_id) {
    case DatasetId::SQUAD11:
    case DatasetId::SQUAD20:
    case DatasetId::ADVQA_DROBERTA:
      out = adapt_squad(path, dataset_id);
      break;
    case DatasetId::BOOLQ:
      out = adapt_boolq(path);
      break;
    case DatasetId::WIKIWHY:
      out = adapt_wikiwhy(path);
      break;
    case DatasetId::HOTPOTQA:
      out = adapt_hotpotqa(path);
      break;
  }
  size_t index = 0;
  for (auto& q : out) {
    index++;
    normalize_instance(q);
    validate_instance(q, index);
  }
  return out;
}

void write_benchmark_jsonl(const std::string& path, const std::vector<QAInstance>& instances) {
  std::string content;
  for (const auto& q : instances) {
    content += instance_to_json_line(q);
    content += '\n';
  }
  write_file_atomic(path, content);
}

}  // namespace drift
