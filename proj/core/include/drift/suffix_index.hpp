#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drift/types.hpp"

namespace drift {

// Exact-substring containment index over a corpus snapshot: concatenated
// normalized doc texts separated by a 0x01 sentinel (a byte normalization
// never emits), plus a suffix array over the blob bytes. Queries are binary
// searches; matches cannot span document boundaries because needles never
// contain the sentinel. Immutable once built.
class CorpusIndex {
 public:
  CorpusIndex() = default;

  static constexpr char kSentinel = '\x01';
  static constexpr uint64_t kDefaultMaxBlobBytes = 1ull << 31;

  // CapacityError when the accumulated blob would exceed max_blob_bytes.
  static CorpusIndex build(const std::vector<CorpusDoc>& docs,
                           uint64_t max_blob_bytes = kDefaultMaxBlobBytes);

  // Doc id containing the needle, or nullopt. EmptyNeedle on "";
  // DomainError when the needle is not valid UTF-8 or is not in normalized
  // form (contains bytes normalization strips).
  std::optional<std::string> contains(const std::string& needle) const;

  size_t doc_count() const { return doc_ids_.size(); }
  size_t blob_size() const { return blob_.size(); }
  const std::string& blob() const { return blob_; }
  const std::vector<uint32_t>& suffix_array() const { return sa_; }

  // Binary persistence: magic "DEVI", version byte, little-endian 64-bit
  // lengths, blob, suffix array, doc offset table.
  void save(const std::string& path) const;
  static CorpusIndex load(const std::string& path);

 private:
  std::string blob_;
  std::vector<uint32_t> sa_;
  std::vector<uint64_t> doc_starts_;  // sorted; parallel to doc_ids_
  std::vector<std::string> doc_ids_;
};

std::vector<uint32_t> build_suffix_array(const std::string& text);

struct LeakageReport {
  uint64_t n = 0;                 // KEPT variants queried
  std::vector<std::string> hits;  // variant ids found verbatim, sorted
  std::optional<double> rate_percent;  // absent when n == 0 (flagged empty)
};

// Percentage of KEPT variants whose edited paragraph appears verbatim in
// the index. Independent of variant order.
LeakageReport leakage_rate(const std::vector<EditedVariant>& variants,
                           const CorpusIndex& index);

}  // namespace drift
