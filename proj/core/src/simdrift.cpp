#include "drift/simdrift.hpp"

#include <algorithm>

#include "drift/errors.hpp"
#include "drift/text.hpp"
#include "drift/util.hpp"

namespace drift {

const char* multihop_reduction_name(MultihopReduction m) {
  switch (m) {
    case MultihopReduction::MEAN: return "mean";
    case MultihopReduction::MIN: return "min";
    case MultihopReduction::MAX: return "max";
  }
  return "?";
}

double bin_lo(int bin_index) { return double(bin_index) / 10.0; }
double bin_hi(int bin_index) { return double(bin_index + 1) / 10.0; }
double bin_midpoint(int bin_index) { return (bin_lo(bin_index) + bin_hi(bin_index)) / 2.0; }

int assign_bin(double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    raise(ErrorKind::Domain, "similarity score " + std::to_string(score) + " outside [0,1]");
  }
  // Compare against the exact double boundaries rather than multiplying by
  // ten, so that e.g. 0.3 lands in [0.3,0.4) as the decimal grid intends.
  for (int b = 0; b < kNumBins - 1; b++) {
    if (score >= bin_lo(b) && score < bin_hi(b)) return b;
  }
  return kNumBins - 1;  // [0.9, 1.0]
}

std::vector<std::string> chunk_text(const std::string& text, size_t window_tokens,
                                    size_t stride_tokens) {
  if (window_tokens == 0 || stride_tokens == 0) {
    raise(ErrorKind::Domain, "chunk window and stride must be positive");
  }
  std::vector<std::string> tokens = whitespace_tokens(text);
  if (tokens.size() <= window_tokens) {
    return text.empty() ? std::vector<std::string>{} : std::vector<std::string>{text};
  }
  std::vector<std::string> chunks;
  for (size_t start = 0;; start += stride_tokens) {
    size_t end = std::min(start + window_tokens, tokens.size());
    std::string chunk;
    for (size_t i = start; i < end; i++) {
      if (i > start) chunk += ' ';
      chunk += tokens[i];
    }
    chunks.push_back(std::move(chunk));
    if (end == tokens.size()) break;
  }
  return chunks;
}

std::optional<TitleMatch> max_title_similarity(
    const std::string& text, const std::string& title,
    const std::map<std::string, std::vector<CorpusDoc>>& corpus_by_title, Embedder& embedder,
    size_t window_tokens, size_t stride_tokens) {
  auto docs_it = corpus_by_title.find(title);
  if (docs_it == corpus_by_title.end() || docs_it->second.empty()) return std::nullopt;
  const auto& docs = docs_it->second;

  std::vector<std::string> batch;
  batch.push_back(text);
  std::vector<std::pair<size_t, size_t>> doc_chunk_range;  // [lo,hi) into batch
  for (const auto& doc : docs) {
    size_t lo = batch.size();
    for (auto& chunk : chunk_text(doc.text, window_tokens, stride_tokens)) {
      batch.push_back(std::move(chunk));
    }
    doc_chunk_range.emplace_back(lo, batch.size());
  }
  auto vectors = embedder.embed(batch);
  TitleMatch best;
  bool found = false;
  for (size_t d = 0; d < docs.size(); d++) {
    auto [lo, hi] = doc_chunk_range[d];
    for (size_t c = lo; c < hi; c++) {
      double sim = clamped_similarity(vectors[0], vectors[c]);
      if (!found || sim > best.max_similarity) {
        best.max_similarity = sim;
        best.matched_doc_id = docs[d].doc_id;
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;  // all docs had empty text (cannot happen post-ingest)
  return best;
}

double multihop_reduce(const std::map<std::string, double>& per_title_scores,
                       MultihopReduction mode) {
  if (per_title_scores.empty()) {
    raise(ErrorKind::NoScorableTitle, "no gold title has corpus content");
  }
  double mean = 0.0, lo = 1.0, hi = 0.0;
  for (const auto& [title, score] : per_title_scores) {
    (void)title;
    mean += score;
    lo = std::min(lo, score);
    hi = std::max(hi, score);
  }
  mean /= double(per_title_scores.size());
  switch (mode) {
    case MultihopReduction::MEAN: return mean;
    case MultihopReduction::MIN: return lo;
    case MultihopReduction::MAX: return hi;
  }
  return mean;
}

std::optional<SimilarityRecord> compute_similarity_record(
    const EditedVariant& variant, const QAInstance& instance,
    const std::map<std::string, std::vector<CorpusDoc>>& corpus_by_title, Embedder& embedder,
    const SimilarityOptions& options) {
  SimilarityRecord record;
  record.variant_id = variant.variant_id;
  record.corpus_tag = options.corpus_tag;
  record.embed_model_id = embedder.model_id();

  if (instance.task_kind == TaskKind::MULTIHOP) {
    double best_single = -1.0;
    for (const auto& gold_title : instance.gold_titles) {
      std::vector<std::string> texts;
      if (gold_title == variant.title) {
        texts.push_back(variant.edited_paragraph);
      } else {
        auto paras = instance.original_paragraphs.find(gold_title);
        if (paras != instance.original_paragraphs.end()) texts = paras->second;
      }
      std::optional<double> title_score;
      std::string title_doc;
      for (const auto& text : texts) {
        auto match = max_title_similarity(text, gold_title, corpus_by_title, embedder,
                                          options.window_tokens, options.stride_tokens);
        if (match && (!title_score || match->max_similarity > *title_score)) {
          title_score = match->max_similarity;
          title_doc = match->matched_doc_id;
        }
      }
      if (title_score) {
        record.per_title_scores[gold_title] = *title_score;
        if (*title_score > best_single) {
          best_single = *title_score;
          record.matched_doc_id = title_doc;
        }
      }
    }
    if (record.per_title_scores.empty()) return std::nullopt;
    record.max_similarity = multihop_reduce(record.per_title_scores, options.reduction);
  } else {
    auto match = max_title_similarity(variant.edited_paragraph, variant.title, corpus_by_title,
                                      embedder, options.window_tokens, options.stride_tokens);
    if (!match) return std::nullopt;
    record.max_similarity = match->max_similarity;
    record.matched_doc_id = match->matched_doc_id;
  }
  record.bin_index = assign_bin(record.max_similarity);
  return record;
}

void write_similarity_jsonl(const std::string& path,
                            const std::vector<SimilarityRecord>& records) {
  std::string content;
  for (const auto& r : records) {
    content += similarity_to_json_line(r);
    content += '\n';
  }
  write_file_atomic(path, content);
}

std::vector<SimilarityRecord> read_similarity_jsonl(const std::string& path) {
  std::vector<SimilarityRecord> out;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    line_no++;
    if (line.empty()) continue;
    out.push_back(similarity_from_json_line(line, line_no));
  }
  return out;
}

}  // namespace drift
