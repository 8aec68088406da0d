#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drift/embedding.hpp"
#include "drift/types.hpp"

namespace drift {

enum class MultihopReduction { MEAN, MIN, MAX };
const char* multihop_reduction_name(MultihopReduction m);

// Ten similarity bins over [0,1]: [0.0,0.1), [0.1,0.2), ... [0.9,1.0].
// Left-closed, right-open, last bin closed. DomainError outside [0,1].
int assign_bin(double score);
constexpr int kNumBins = 10;
double bin_lo(int bin_index);
double bin_hi(int bin_index);
double bin_midpoint(int bin_index);

// Sliding window over whitespace tokens for corpus docs longer than the
// embedding context; the doc score is the max over its chunks.
std::vector<std::string> chunk_text(const std::string& text, size_t window_tokens = 256,
                                    size_t stride_tokens = 128);

struct TitleMatch {
  double max_similarity = 0.0;  // clamped to [0,1]
  std::string matched_doc_id;
};

// Max cosine between `text` and every same-title corpus doc (max over
// chunks per doc). Absent when the title has no corpus docs.
std::optional<TitleMatch> max_title_similarity(
    const std::string& text, const std::string& title,
    const std::map<std::string, std::vector<CorpusDoc>>& corpus_by_title, Embedder& embedder,
    size_t window_tokens = 256, size_t stride_tokens = 128);

// Mean (default) / min / max over available gold-title scores.
// NoScorableTitle when the map is empty.
double multihop_reduce(const std::map<std::string, double>& per_title_scores,
                       MultihopReduction mode = MultihopReduction::MEAN);

struct SimilarityOptions {
  std::string corpus_tag;
  MultihopReduction reduction = MultihopReduction::MEAN;
  size_t window_tokens = 256;
  size_t stride_tokens = 128;
};

// Full per-variant record. For MULTIHOP every gold title contributes a
// score (the edited paragraph for the variant's own title, the original
// paragraphs otherwise); the reduction gives max_similarity. Absent when no
// relevant title has corpus content ("no-corpus-match").
std::optional<SimilarityRecord> compute_similarity_record(
    const EditedVariant& variant, const QAInstance& instance,
    const std::map<std::string, std::vector<CorpusDoc>>& corpus_by_title, Embedder& embedder,
    const SimilarityOptions& options);

void write_similarity_jsonl(const std::string& path,
                            const std::vector<SimilarityRecord>& records);
std::vector<SimilarityRecord> read_similarity_jsonl(const std::string& path);

}  // namespace drift
