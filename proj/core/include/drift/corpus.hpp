#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "drift/types.hpp"

namespace drift {

using CorpusSink = std::function<void(CorpusDoc&&)>;

// Streams a corpus snapshot: JSONL, one {"doc_id","title"?,"text"} per line,
// plain or gzipped. Text is normalized. When "title" is absent it is taken
// from the first line of the text if that line is under 120 characters and
// contains no sentence-final period followed by more text; otherwise the doc
// is title-unknown (title stays empty) and is excluded from title matching.
// Malformed lines raise ParseError with the line number; duplicate doc_ids
// within one snapshot raise ParseError as well.
size_t stream_corpus_snapshot(const std::string& path, const std::string& source_tag,
                              const CorpusSink& sink);

std::vector<CorpusDoc> load_corpus_snapshot(const std::string& path,
                                            const std::string& source_tag);

// Groups docs by title; title-unknown docs are omitted.
std::map<std::string, std::vector<CorpusDoc>> index_corpus_by_title(
    const std::vector<CorpusDoc>& docs);

// First-line title heuristic, exposed for tests. Empty result = unknown.
std::string derive_title_from_text(const std::string& normalized_text);

void write_corpus_jsonl(const std::string& path, const std::vector<CorpusDoc>& docs);

}  // namespace drift
