#include "drift/suffix_index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

#include "drift/errors.hpp"
#include "drift/util.hpp"

namespace drift {

// Prefix doubling with counting-sort passes, O(n log n).
std::vector<uint32_t> build_suffix_array(const std::string& text) {
  const int64_t n = int64_t(text.size());
  const size_t un = text.size();
  std::vector<uint32_t> sa(un);
  if (n == 0) return sa;
  std::vector<int32_t> rank(un);
  std::vector<int32_t> tmp(un);
  for (int64_t i = 0; i < n; i++) rank[size_t(i)] = uint8_t(text[size_t(i)]);

  // Initial order: counting sort by first byte.
  {
    std::vector<int64_t> cnt(257, 0);
    for (int64_t i = 0; i < n; i++) cnt[size_t(rank[size_t(i)]) + 1]++;
    for (size_t b = 1; b < cnt.size(); b++) cnt[b] += cnt[b - 1];
    for (int64_t i = 0; i < n; i++) sa[size_t(cnt[size_t(rank[size_t(i)])]++)] = uint32_t(i);
  }

  std::vector<uint32_t> order(un);
  std::vector<int64_t> cnt;
  for (int64_t k = 1;; k <<= 1) {
    // Re-rank after the previous pass (for k == 1 ranks are raw bytes,
    // already dense enough for counting sort).
    auto second_rank = [&](uint32_t i) {
      return int64_t(i) + k < n ? rank[size_t(i + k)] : -1;
    };

    // Sort by second key: suffixes with i+k >= n first, then the rest in
    // the order of the previous pass (which is sorted by rank[i+k]).
    size_t at = 0;
    for (int64_t i = n - k; i < n; i++) {
      if (i >= 0) order[at++] = uint32_t(i);
    }
    for (int64_t j = 0; j < n; j++) {
      if (int64_t(sa[size_t(j)]) >= k) order[at++] = sa[size_t(j)] - uint32_t(k);
    }

    // Stable counting sort by first key.
    int32_t max_rank = 0;
    for (int64_t i = 0; i < n; i++) max_rank = std::max(max_rank, rank[size_t(i)]);
    cnt.assign(size_t(max_rank) + 2, 0);
    for (int64_t i = 0; i < n; i++) cnt[size_t(rank[size_t(i)]) + 1]++;
    for (size_t b = 1; b < cnt.size(); b++) cnt[b] += cnt[b - 1];
    for (int64_t j = 0; j < n; j++) {
      uint32_t i = order[size_t(j)];
      sa[size_t(cnt[size_t(rank[i])]++)] = i;
    }

    tmp[sa[0]] = 0;
    for (int64_t j = 1; j < n; j++) {
      uint32_t prev = sa[size_t(j - 1)], curr = sa[size_t(j)];
      bool differs = rank[prev] != rank[curr] || second_rank(prev) != second_rank(curr);
      tmp[curr] = tmp[prev] + (differs ? 1 : 0);
    }
    rank.swap(tmp);
    if (rank[sa[size_t(n - 1)]] == int32_t(n - 1)) break;
  }
  return sa;
}

CorpusIndex CorpusIndex::build(const std::vector<CorpusDoc>& docs, uint64_t max_blob_bytes) {
  CorpusIndex index;
  uint64_t total = 0;
  for (const auto& d : docs) total += d.text.size() + 1;
  if (total > max_blob_bytes) {
    raise(ErrorKind::Capacity, "corpus blob " + std::to_string(total) +
                                   " bytes exceeds configured maximum " +
                                   std::to_string(max_blob_bytes));
  }
  index.blob_.reserve(size_t(total));
  for (const auto& d : docs) {
    if (d.text.empty()) continue;
    if (d.text.find(kSentinel) != std::string::npos) {
      raise(ErrorKind::Parse, "doc " + d.doc_id + " contains the sentinel byte; not normalized");
    }
    index.doc_starts_.push_back(index.blob_.size());
    index.doc_ids_.push_back(d.doc_id);
    index.blob_ += d.text;
    index.blob_ += kSentinel;
  }
  if (!index.blob_.empty()) index.blob_.pop_back();  // no trailing sentinel
  index.sa_ = build_suffix_array(index.blob_);
  return index;
}

std::optional<std::string> CorpusIndex::contains(const std::string& needle) const {
  if (needle.empty()) raise(ErrorKind::EmptyNeedle, "containment query with empty needle");
  if (!utf8_valid(needle)) {
    raise(ErrorKind::Domain, "needle is not a whole-scalar UTF-8 sequence");
  }
  if (needle.find(kSentinel) != std::string::npos) {
    raise(ErrorKind::Domain, "needle contains a byte normalization never emits");
  }
  if (blob_.empty() || needle.size() > blob_.size()) return std::nullopt;

  const size_t m = needle.size();
  size_t lo = 0, hi = sa_.size();
  while (lo < hi) {
    size_t mid = lo + (hi - lo) / 2;
    if (blob_.compare(sa_[mid], m, needle) < 0) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == sa_.size() || blob_.compare(sa_[lo], m, needle) != 0) return std::nullopt;
  size_t pos = sa_[lo];
  size_t doc = size_t(std::upper_bound(doc_starts_.begin(), doc_starts_.end(), uint64_t(pos)) -
                      doc_starts_.begin()) - 1;
  return doc_ids_[doc];
}

namespace {

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; i++) out += char(uint8_t(v >> (8 * i)));
}

uint64_t get_u64(const std::string& in, size_t& pos) {
  if (pos + 8 > in.size()) raise(ErrorKind::Parse, "truncated index file");
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) v |= uint64_t(uint8_t(in[pos + size_t(i)])) << (8 * i);
  pos += 8;
  return v;
}

}  // namespace

void CorpusIndex::save(const std::string& path) const {
  std::string out;
  out.reserve(blob_.size() + sa_.size() * 8 + 64);
  out += "DEVI";
  out += char(1);  // version
  put_u64(out, blob_.size());
  out += blob_;
  put_u64(out, sa_.size());
  for (uint32_t v : sa_) put_u64(out, v);
  put_u64(out, doc_starts_.size());
  for (size_t d = 0; d < doc_starts_.size(); d++) {
    put_u64(out, doc_starts_[d]);
    put_u64(out, doc_ids_[d].size());
    out += doc_ids_[d];
  }
  write_file_atomic(path, out);
}

CorpusIndex CorpusIndex::load(const std::string& path) {
  std::string in = read_file(path);
  if (in.size() < 5 || in.compare(0, 4, "DEVI") != 0) {
    raise(ErrorKind::Parse, "bad magic in " + path);
  }
  if (in[4] != char(1)) raise(ErrorKind::Parse, "unsupported index version in " + path);
  size_t pos = 5;
  CorpusIndex index;
  uint64_t blob_len = get_u64(in, pos);
  if (pos + blob_len > in.size()) raise(ErrorKind::Parse, "truncated index file");
  index.blob_ = in.substr(pos, size_t(blob_len));
  pos += size_t(blob_len);
  uint64_t sa_len = get_u64(in, pos);
  if (sa_len != blob_len) raise(ErrorKind::Parse, "suffix array length mismatch");
  index.sa_.resize(size_t(sa_len));
  for (uint64_t i = 0; i < sa_len; i++) {
    uint64_t v = get_u64(in, pos);
    if (v >= blob_len) raise(ErrorKind::Parse, "suffix array entry out of range");
    index.sa_[size_t(i)] = uint32_t(v);
  }
  uint64_t doc_count = get_u64(in, pos);
  for (uint64_t d = 0; d < doc_count; d++) {
    index.doc_starts_.push_back(get_u64(in, pos));
    uint64_t id_len = get_u64(in, pos);
    if (pos + id_len > in.size()) raise(ErrorKind::Parse, "truncated index file");
    index.doc_ids_.push_back(in.substr(pos, size_t(id_len)));
    pos += size_t(id_len);
  }
  return index;
}

LeakageReport leakage_rate(const std::vector<EditedVariant>& variants,
                           const CorpusIndex& index) {
  LeakageReport report;
  for (const auto& v : variants) {
    if (v.apc_status != ApcStatus::KEPT) continue;
    report.n++;
    if (index.contains(v.edited_paragraph)) report.hits.push_back(v.variant_id);
  }
  std::sort(report.hits.begin(), report.hits.end());
  if (report.n > 0) {
    report.rate_percent = 100.0 * double(report.hits.size()) / double(report.n);
  }
  return report;
}

}  // namespace drift
