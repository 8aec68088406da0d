#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drift/types.hpp"

namespace drift {

// 2*match/(len_a+len_b) over Unicode scalars, LCS-based. 1.0 for identical
// inputs (including both empty), 0.0 for disjoint.
double diff_similarity(const std::string& a, const std::string& b);

// A maximal run of consecutive revisions (indices into the chain) in which
// the original paragraph appears verbatim as a whole paragraph.
struct OccurrenceSpan {
  uint32_t occurrence_index = 0;
  size_t begin = 0;  // chain index of first revision containing the paragraph
  size_t end = 0;    // chain index of last revision containing it (inclusive)
};

std::vector<OccurrenceSpan> match_occurrences(const std::string& original_paragraph,
                                              const std::vector<RevisionRecord>& chain);

// Picks the edited descendant of the original inside the first revision after
// the span: the paragraph with maximal diff similarity, if it clears
// `descend_floor`. Absent when the span runs to the end of the chain or the
// paragraph was deleted outright.
std::optional<std::string> extract_successor(const OccurrenceSpan& occurrence,
                                             const std::vector<RevisionRecord>& chain,
                                             const std::string& original_paragraph,
                                             double descend_floor = 0.5);

ApcStatus apc_check(const EditedVariant& variant, const QAInstance& instance,
                    ApcMode mode = ApcMode::ANY);

struct SkipRecord {
  std::string instance_id;
  std::string title;
  std::string reason;
};

struct BuildVariantsResult {
  std::vector<EditedVariant> variants;  // KEPT and DROPPED_*, canonical order
  std::vector<SkipRecord> skips;
};

// For each instance and each of its gold original paragraphs, emits every
// occurrence x successor pair, collapses duplicates, and applies APC. For
// MULTIHOP instances only gold titles are processed. Instances whose title
// has no chain produce a skip record. Deterministic: identical inputs yield
// identical variant sets and identifiers.
BuildVariantsResult build_variants(
    const std::vector<QAInstance>& instances,
    const std::map<std::string, std::vector<RevisionRecord>>& histories,
    ApcMode mode = ApcMode::ANY, double descend_floor = 0.5, unsigned threads = 0);

void write_variants_jsonl(const std::string& path, const std::vector<EditedVariant>& variants);
std::vector<EditedVariant> read_variants_jsonl(const std::string& path);

}  // namespace drift
