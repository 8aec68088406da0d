#include "drift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "drift/errors.hpp"
#include "drift/simdrift.hpp"
#include "drift/util.hpp"

namespace drift {

WilsonInterval wilson_interval(uint64_t k, uint64_t n, double z) {
  if (n == 0) raise(ErrorKind::Domain, "wilson interval needs n >= 1");
  if (k > n) raise(ErrorKind::Domain, "wilson interval needs k <= n");
  if (!(z > 0.0)) raise(ErrorKind::Domain, "wilson interval needs z > 0");
  double p = double(k) / double(n);
  double nn = double(n);
  double z2 = z * z;
  double denom = 1.0 + z2 / nn;
  double center = (p + z2 / (2.0 * nn)) / denom;
  double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  WilsonInterval w;
  w.raw_low = center - half;
  w.raw_high = center + half;
  w.low = std::clamp(w.raw_low, 0.0, 1.0);
  w.high = std::clamp(w.raw_high, 0.0, 1.0);
  // rounding can leave the bounds a few ulps inside k/n; they must bracket it
  w.low = std::min(w.low, p);
  w.high = std::max(w.high, p);
  return w;
}

std::vector<BinSummary> bin_accuracy(const std::vector<std::pair<int, int>>& joined_records,
                                     double z, uint64_t min_bin_n) {
  std::map<int, std::pair<uint64_t, uint64_t>> counts;  // bin -> (n, k)
  for (const auto& [bin, correct] : joined_records) {
    if (bin < 0 || bin >= kNumBins) {
      raise(ErrorKind::Domain, "bin index " + std::to_string(bin) + " outside 0..9");
    }
    if (correct != 0 && correct != 1) {
      raise(ErrorKind::Domain, "correctness label must be 0 or 1");
    }
    counts[bin].first++;
    counts[bin].second += uint64_t(correct);
  }
  std::vector<BinSummary> summaries;
  for (const auto& [bin, nk] : counts) {
    BinSummary s;
    s.bin_index = bin;
    s.bin_lo = bin_lo(bin);
    s.bin_hi = bin_hi(bin);
    s.n = nk.first;
    s.k = nk.second;
    s.accuracy_percent = 100.0 * double(s.k) / double(s.n);
    WilsonInterval w = wilson_interval(s.k, s.n, z);
    s.wilson_low = w.low;
    s.wilson_high = w.high;
    s.low_support = s.n < min_bin_n;
    summaries.push_back(std::move(s));
  }
  return summaries;
}

namespace {

TrendSummary fit_trend_impl(const std::vector<std::pair<double, double>>& points,
                            const std::vector<double>* weights) {
  if (points.size() < 2) {
    raise(ErrorKind::InsufficientPoints,
          "trend fit needs at least 2 points, got " + std::to_string(points.size()));
  }
  double wsum = 0.0, mean_x = 0.0, mean_y = 0.0;
  for (size_t i = 0; i < points.size(); i++) {
    double w = weights ? (*weights)[i] : 1.0;
    wsum += w;
    mean_x += w * points[i].first;
    mean_y += w * points[i].second;
  }
  mean_x /= wsum;
  mean_y /= wsum;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < points.size(); i++) {
    double w = weights ? (*weights)[i] : 1.0;
    double dx = points[i].first - mean_x;
    double dy = points[i].second - mean_y;
    sxx += w * dx * dx;
    syy += w * dy * dy;
    sxy += w * dx * dy;
  }
  if (sxx <= 0.0) {
    raise(ErrorKind::InsufficientPoints, "trend fit needs variance in x");
  }
  TrendSummary t;
  t.n_points = int(points.size());
  t.slope = sxy / sxx;
  t.intercept = mean_y - t.slope * mean_x;
  if (syy > 0.0) t.pearson_r = sxy / std::sqrt(sxx * syy);
  return t;
}

}  // namespace

TrendSummary fit_trend(const std::vector<std::pair<double, double>>& points) {
  return fit_trend_impl(points, nullptr);
}

TrendSummary fit_trend_weighted(const std::vector<std::pair<double, double>>& points,
                                const std::vector<double>& weights) {
  if (weights.size() != points.size()) {
    raise(ErrorKind::Domain, "weights must match points");
  }
  return fit_trend_impl(points, &weights);
}

TrendAggregate aggregate_trends(const std::vector<TrendSummary>& trends) {
  if (trends.empty()) raise(ErrorKind::EmptyGroup, "no trends to aggregate");
  TrendAggregate agg;
  agg.n_trends = trends.size();
  double slope_sum = 0.0;
  for (const auto& t : trends) slope_sum += t.slope;
  agg.mean_slope = slope_sum / double(trends.size());
  double slope_var = 0.0;
  for (const auto& t : trends) {
    slope_var += (t.slope - agg.mean_slope) * (t.slope - agg.mean_slope);
  }
  agg.std_slope = std::sqrt(slope_var / double(trends.size()));

  std::vector<double> rs;
  for (const auto& t : trends) {
    if (t.pearson_r) {
      rs.push_back(*t.pearson_r);
    } else {
      agg.n_r_excluded++;
    }
  }
  if (!rs.empty()) {
    double r_sum = 0.0;
    for (double r : rs) r_sum += r;
    agg.mean_r = r_sum / double(rs.size());
    double r_var = 0.0;
    for (double r : rs) r_var += (r - agg.mean_r) * (r - agg.mean_r);
    agg.std_r = std::sqrt(r_var / double(rs.size()));
  }
  return agg;
}

StratifiedSample stratified_sample(const std::vector<std::pair<int, std::string>>& records,
                                   uint64_t per_bin, uint64_t seed) {
  if (per_bin == 0) raise(ErrorKind::Domain, "per_bin must be >= 1");
  std::map<int, std::vector<std::string>> by_bin;
  for (const auto& [bin, id] : records) by_bin[bin].push_back(id);
  StratifiedSample sample;
  for (auto& [bin, ids] : by_bin) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() <= per_bin) {
      if (ids.size() < per_bin) sample.short_bins.push_back(bin);
      for (const auto& id : ids) sample.items.emplace_back(bin, id);
      continue;
    }
    // Partial Fisher-Yates over the sorted ids; splitmix keyed by
    // (seed, bin) keeps bins independent and runs reproducible.
    SplitMix64 rng(seed * 0x9e3779b97f4a7c15ull + uint64_t(bin) + 1);
    for (uint64_t i = 0; i < per_bin; i++) {
      uint64_t j = i + rng.next_below(uint64_t(ids.size()) - i);
      std::swap(ids[size_t(i)], ids[size_t(j)]);
      sample.items.emplace_back(bin, ids[size_t(i)]);
    }
  }
  std::sort(sample.items.begin(), sample.items.end());
  return sample;
}

std::vector<HumanBinResult> human_bin_accuracy(const std::vector<AnnotationRow>& rows) {
  struct Item {
    int bin_index = -1;
    std::vector<bool> labels;            // non-adjudicator labels, row order
    std::optional<bool> adjudication;
  };
  std::map<std::string, Item> items;
  for (const auto& row : rows) {
    Item& item = items[row.variant_id];
    if (item.bin_index >= 0 && item.bin_index != row.bin_index) {
      raise(ErrorKind::Parse, "variant " + row.variant_id + " has inconsistent bin_index");
    }
    item.bin_index = row.bin_index;
    if (row.annotator_id == "adjudicator") {
      item.adjudication = row.correct;
    } else {
      item.labels.push_back(row.correct);
    }
  }
  std::map<int, std::pair<uint64_t, uint64_t>> counts;  // bin -> (n, k)
  for (const auto& [variant_id, item] : items) {
    if (item.labels.size() != 2) {
      raise(ErrorKind::Parse, "variant " + variant_id + " needs exactly 2 annotator labels, has " +
                                  std::to_string(item.labels.size()));
    }
    bool verdict;
    if (item.labels[0] == item.labels[1]) {
      verdict = item.labels[0];
    } else if (item.adjudication) {
      verdict = *item.adjudication;
    } else {
      raise(ErrorKind::MissingAdjudication,
            "variant " + variant_id + " has disagreeing annotators and no adjudicator row");
    }
    counts[item.bin_index].first++;
    if (verdict) counts[item.bin_index].second++;
  }
  std::vector<HumanBinResult> results;
  for (const auto& [bin, nk] : counts) {
    HumanBinResult r;
    r.bin_index = bin;
    r.n_annotated = nk.first;
    r.k_correct = nk.second;
    r.accuracy_percent = 100.0 * double(nk.second) / double(nk.first);
    results.push_back(r);
  }
  return results;
}

std::vector<AnnotationRow> read_annotation_csv(const std::string& path) {
  std::vector<AnnotationRow> rows;
  size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    line_no++;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("variant_id,", 0) == 0) continue;  // header
    std::vector<std::string> fields;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); i++) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 4) {
      raise(ErrorKind::Parse,
            "annotation line " + std::to_string(line_no) + ": expected 4 fields");
    }
    AnnotationRow row;
    row.variant_id = fields[0];
    try {
      row.bin_index = std::stoi(fields[1]);
    } catch (...) {
      raise(ErrorKind::Parse, "annotation line " + std::to_string(line_no) + ": bad bin_index");
    }
    row.annotator_id = fields[2];
    if (fields[3] == "correct") {
      row.correct = true;
    } else if (fields[3] == "incorrect") {
      row.correct = false;
    } else {
      raise(ErrorKind::Parse, "annotation line " + std::to_string(line_no) +
                                  ": label must be correct|incorrect");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace drift
