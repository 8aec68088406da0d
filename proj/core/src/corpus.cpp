#include "drift/corpus.hpp"

#include <zlib.h>

#include <unordered_set>

#include "json.hpp"

#include "drift/errors.hpp"
#include "drift/text.hpp"
#include "drift/util.hpp"

using nlohmann::json;

namespace drift {

std::string derive_title_from_text(const std::string& normalized_text) {
  size_t eol = normalized_text.find('\n');
  std::string first =
      eol == std::string::npos ? normalized_text : normalized_text.substr(0, eol);
  if (first.empty()) return "";
  if (utf8_scalar_count(first) >= 120) return "";
  // A sentence-final period followed by more text marks the line as prose.
  // Normalized lines carry no trailing spaces, so ". " implies more text.
  if (first.find(". ") != std::string::npos) return "";
  return first;
}

size_t stream_corpus_snapshot(const std::string& path, const std::string& source_tag,
                              const CorpusSink& sink) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (!file) raise(ErrorKind::Io, "cannot open " + path);
  std::string carry;
  std::unordered_set<std::string> seen_ids;
  size_t line_no = 0;
  size_t count = 0;

  auto handle_line = [&](const std::string& line) {
    line_no++;
    if (line.empty()) return;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      gzclose(file);
      raise(ErrorKind::Parse, "corpus line " + std::to_string(line_no) + ": bad JSON");
    }
    if (!j.contains("doc_id") || !j.contains("text")) {
      gzclose(file);
      raise(ErrorKind::Parse,
            "corpus line " + std::to_string(line_no) + ": missing doc_id or text");
    }
    CorpusDoc d;
    d.doc_id = j["doc_id"].get<std::string>();
    d.text = normalize_text(j["text"].get<std::string>());
    d.source_tag = source_tag;
    if (d.text.empty()) {
      gzclose(file);
      raise(ErrorKind::Parse, "corpus line " + std::to_string(line_no) + ": empty text");
    }
    if (!seen_ids.insert(d.doc_id).second) {
      gzclose(file);
      raise(ErrorKind::Parse,
            "corpus line " + std::to_string(line_no) + ": duplicate doc_id " + d.doc_id);
    }
    if (j.contains("title")) {
      d.title = normalize_text(j["title"].get<std::string>());
    } else {
      d.title = derive_title_from_text(d.text);
    }
    count++;
    sink(std::move(d));
  };

  char buf[1 << 16];
  for (;;) {
    int n = gzread(file, buf, sizeof(buf));
    if (n < 0) {
      gzclose(file);
      raise(ErrorKind::Io, "read error (gz): " + path);
    }
    if (n == 0) break;
    carry.append(buf, size_t(n));
    size_t start = 0;
    size_t eol;
    while ((eol = carry.find('\n', start)) != std::string::npos) {
      handle_line(carry.substr(start, eol - start));
      start = eol + 1;
    }
    carry.erase(0, start);
  }
  if (!carry.empty()) handle_line(carry);
  gzclose(file);
  return count;
}

std::vector<CorpusDoc> load_corpus_snapshot(const std::string& path,
                                            const std::string& source_tag) {
  std::vector<CorpusDoc> docs;
  stream_corpus_snapshot(path, source_tag, [&](CorpusDoc&& d) { docs.push_back(std::move(d)); });
  return docs;
}

std::map<std::string, std::vector<CorpusDoc>> index_corpus_by_title(
    const std::vector<CorpusDoc>& docs) {
  std::map<std::string, std::vector<CorpusDoc>> by_title;
  for (const auto& d : docs) {
    if (!d.title.empty()) by_title[d.title].push_back(d);
  }
  return by_title;
}

void write_corpus_jsonl(const std::string& path, const std::vector<CorpusDoc>& docs) {
  std::string content;
  for (const auto& d : docs) {
    content += corpus_doc_to_json_line(d);
    content += '\n';
  }
  write_file_atomic(path, content);
}

}  // namespace drift
