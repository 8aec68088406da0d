#include "drift/evolve.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "drift/errors.hpp"
#include "drift/sha256.hpp"
#include "drift/text.hpp"
#include "drift/util.hpp"

namespace drift {

namespace {

// Frequency-intersection upper bound on the LCS ratio, same trick difflib
// uses to skip hopeless pairs before the quadratic pass.
double ratio_upper_bound(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::unordered_map<uint32_t, int> count;
  for (uint32_t c : a) count[c]++;
  size_t common = 0;
  for (uint32_t c : b) {
    auto it = count.find(c);
    if (it != count.end() && it->second > 0) {
      it->second--;
      common++;
    }
  }
  return 2.0 * double(common) / double(a.size() + b.size());
}

size_t lcs_length(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  if (a.empty() || b.empty()) return 0;
  const std::vector<uint32_t>& rows = a.size() <= b.size() ? a : b;
  const std::vector<uint32_t>& cols = a.size() <= b.size() ? b : a;
  std::vector<size_t> prev(cols.size() + 1, 0), curr(cols.size() + 1, 0);
  for (size_t i = 1; i <= rows.size(); i++) {
    for (size_t j = 1; j <= cols.size(); j++) {
      curr[j] = rows[i - 1] == cols[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[cols.size()];
}

}  // namespace

double diff_similarity(const std::string& a, const std::string& b) {
  if (a == b) return 1.0;
  std::vector<uint32_t> ua = utf8_decode(a);
  std::vector<uint32_t> ub = utf8_decode(b);
  if (ua.empty() && ub.empty()) return 1.0;
  if (ua.empty() || ub.empty()) return 0.0;
  return 2.0 * double(lcs_length(ua, ub)) / double(ua.size() + ub.size());
}

std::vector<OccurrenceSpan> match_occurrences(const std::string& original_paragraph,
                                              const std::vector<RevisionRecord>& chain) {
  std::vector<OccurrenceSpan> spans;
  bool in_span = false;
  OccurrenceSpan current;
  for (size_t i = 0; i < chain.size(); i++) {
    bool present = false;
    for (const auto& para : segment_paragraphs(chain[i].text)) {
      if (para == original_paragraph) {
        present = true;
        break;
      }
    }
    if (present) {
      if (!in_span) {
        current.begin = i;
        in_span = true;
      }
      current.end = i;
    } else if (in_span) {
      current.occurrence_index = uint32_t(spans.size());
      spans.push_back(current);
      in_span = false;
    }
  }
  if (in_span) {
    current.occurrence_index = uint32_t(spans.size());
    spans.push_back(current);
  }
  return spans;
}

std::optional<std::string> extract_successor(const OccurrenceSpan& occurrence,
                                             const std::vector<RevisionRecord>& chain,
                                             const std::string& original_paragraph,
                                             double descend_floor) {
  size_t next = occurrence.end + 1;
  if (next >= chain.size()) return std::nullopt;
  std::vector<uint32_t> original_scalars = utf8_decode(original_paragraph);
  double best = -1.0;
  std::string best_para;
  for (const auto& para : segment_paragraphs(chain[next].text)) {
    std::vector<uint32_t> candidate = utf8_decode(para);
    double bound =
        2.0 * double(std::min(original_scalars.size(), candidate.size())) /
        double(original_scalars.size() + candidate.size());
    if (bound <= best) continue;
    if (ratio_upper_bound(original_scalars, candidate) <= std::max(best, 0.0)) continue;
    double sim = original_scalars.empty() && candidate.empty()
                     ? 1.0
                     : 2.0 * double(lcs_length(original_scalars, candidate)) /
                           double(original_scalars.size() + candidate.size());
    if (sim > best) {
      best = sim;
      best_para = para;
    }
  }
  if (best < descend_floor) return std::nullopt;
  return best_para;
}

ApcStatus apc_check(const EditedVariant& variant, const QAInstance& instance, ApcMode mode) {
  switch (instance.task_kind) {
    case TaskKind::FREEFORM:
      return ApcStatus::KEPT;
    case TaskKind::YESNO:
      return utf8_scalar_count(variant.edited_paragraph) >= 56 ? ApcStatus::KEPT
                                                               : ApcStatus::DROPPED_TOO_SHORT;
    case TaskKind::EXTRACTIVE:
    case TaskKind::MULTIHOP: {
      if (instance.unanswerable()) return ApcStatus::KEPT;  // no span to preserve
      size_t found = 0;
      for (const auto& gold : instance.gold_answers) {
        if (contains_substring(variant.edited_paragraph, gold)) found++;
      }
      bool kept = mode == ApcMode::ANY ? found > 0 : found == instance.gold_answers.size();
      return kept ? ApcStatus::KEPT : ApcStatus::DROPPED_ANSWER_LOST;
    }
  }
  return ApcStatus::KEPT;
}

namespace {

std::string make_variant_id(const std::string& instance_id, const std::string& title,
                            const std::string& original, uint32_t occurrence_index,
                            uint64_t edited_rev, const std::string& edited) {
  Sha256 h;
  h.update(instance_id);
  h.update("\x1f");
  h.update(title);
  h.update("\x1f");
  h.update(original);
  h.update("\x1f");
  h.update(std::to_string(occurrence_index));
  h.update("\x1f");
  h.update(std::to_string(edited_rev));
  h.update("\x1f");
  h.update(edited);
  auto digest = h.finish();
  static const char* kHex = "0123456789abcdef";
  std::string id(16, '0');
  for (int i = 0; i < 8; i++) {
    id[2 * i] = kHex[digest[size_t(i)] >> 4];
    id[2 * i + 1] = kHex[digest[size_t(i)] & 0xf];
  }
  return id;
}

}  // namespace

BuildVariantsResult build_variants(
    const std::vector<QAInstance>& instances,
    const std::map<std::string, std::vector<RevisionRecord>>& histories, ApcMode mode,
    double descend_floor, unsigned threads) {
  BuildVariantsResult result;
  std::vector<std::vector<EditedVariant>> per_instance(instances.size());
  std::vector<std::vector<SkipRecord>> per_instance_skips(instances.size());

  parallel_for(instances.size(), threads, [&](size_t idx) {
    const QAInstance& instance = instances[idx];
    const std::vector<std::string>& process_titles =
        instance.task_kind == TaskKind::MULTIHOP ? instance.gold_titles : instance.titles;
    std::set<std::string> seen_edits;  // dedupe key: original + edited text
    for (const auto& title : process_titles) {
      auto hist = histories.find(title);
      if (hist == histories.end()) {
        per_instance_skips[idx].push_back({instance.instance_id, title, "MissingHistory"});
        continue;
      }
      const auto& chain = hist->second;
      auto paras = instance.original_paragraphs.find(title);
      if (paras == instance.original_paragraphs.end()) continue;
      for (const auto& original : paras->second) {
        for (const auto& span : match_occurrences(original, chain)) {
          auto successor = extract_successor(span, chain, original, descend_floor);
          if (!successor) continue;
          if (*successor == original) continue;  // no-op guard
          std::string dedupe_key = original + "\x1f" + *successor;
          if (!seen_edits.insert(dedupe_key).second) continue;
          EditedVariant v;
          v.instance_id = instance.instance_id;
          v.title = title;
          v.original_paragraph = original;
          v.edited_paragraph = *successor;
          v.first_seen_rev = chain[span.end].rev_id;
          v.edited_rev = chain[span.end + 1].rev_id;
          v.timestamp = chain[span.end + 1].timestamp;
          v.occurrence_index = span.occurrence_index;
          v.variant_id = make_variant_id(v.instance_id, title, original, v.occurrence_index,
                                         v.edited_rev, v.edited_paragraph);
          v.apc_status = apc_check(v, instance, mode);
          per_instance[idx].push_back(std::move(v));
        }
      }
    }
  });

  for (size_t i = 0; i < instances.size(); i++) {
    for (auto& v : per_instance[i]) result.variants.push_back(std::move(v));
    for (auto& s : per_instance_skips[i]) result.skips.push_back(std::move(s));
  }
  std::sort(result.variants.begin(), result.variants.end(),
            [](const EditedVariant& a, const EditedVariant& b) {
              return std::tie(a.instance_id, a.title, a.original_paragraph, a.occurrence_index,
                              a.edited_rev, a.variant_id) <
                     std::tie(b.instance_id, b.title, b.original_paragraph, b.occurrence_index,
                              b.edited_rev, b.variant_id);
            });
  std::sort(result.skips.begin(), result.skips.end(),
            [](const SkipRecord& a, const SkipRecord& b) {
              return std::tie(a.instance_id, a.title) < std::tie(b.instance_id, b.title);
            });
  return result;
}

void write_variants_jsonl(const std::string& path, const std::vector<EditedVariant>& variants) {
  std::string content;
  for (const auto& v : variants) {
    content += variant_to_json_line(v);
    content += '\n';
  }
  write_file_atomic(path, content);
}

std::vector<EditedVariant> read_variants_jsonl(const std::string& path) {
  std::vector<EditedVariant> out;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    line_no++;
    if (line.empty()) continue;
    out.push_back(variant_from_json_line(line, line_no));
  }
  return out;
}

}  // namespace drift
