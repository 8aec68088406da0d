#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drift/types.hpp"

namespace drift {

struct WilsonInterval {
  double low = 0.0;   // clamped to [0,1]
  double high = 0.0;
  double raw_low = 0.0;   // pre-clamp values, for oracle comparison
  double raw_high = 0.0;
};

// Wilson score interval: center (p + z^2/2n)/(1 + z^2/n), half-width
// (z/(1+z^2/n)) * sqrt(p(1-p)/n + z^2/4n^2). DomainError when n = 0 or
// k > n or z <= 0.
WilsonInterval wilson_interval(uint64_t k, uint64_t n, double z = 1.96);

// One summary per non-empty bin, ordered by bin index. Bins with
// n < min_bin_n are flagged low_support but still reported.
std::vector<BinSummary> bin_accuracy(const std::vector<std::pair<int, int>>& joined_records,
                                     double z = 1.96, uint64_t min_bin_n = 10);

// Unweighted OLS over (bin midpoint, accuracy percent) points plus Pearson
// r; r is absent when either coordinate has zero variance.
// InsufficientPoints when fewer than two points (or x carries no variance).
TrendSummary fit_trend(const std::vector<std::pair<double, double>>& points);

// Per-bin-n weighted variant, offered behind the config flag.
TrendSummary fit_trend_weighted(const std::vector<std::pair<double, double>>& points,
                                const std::vector<double>& weights);

struct TrendAggregate {
  double mean_slope = 0.0;
  double std_slope = 0.0;  // population standard deviation
  double mean_r = 0.0;
  double std_r = 0.0;
  size_t n_trends = 0;
  size_t n_r_excluded = 0;  // undefined Pearson r values left out
};

// EmptyGroup when `trends` is empty.
TrendAggregate aggregate_trends(const std::vector<TrendSummary>& trends);

struct StratifiedSample {
  std::vector<std::pair<int, std::string>> items;  // (bin_index, variant_id)
  std::vector<int> short_bins;  // bins with fewer than per_bin items
};

// Deterministic equal-per-bin sampling without replacement. Bins with fewer
// than per_bin items contribute everything and are flagged short. Stable
// across runs and platforms for a fixed seed.
StratifiedSample stratified_sample(const std::vector<std::pair<int, std::string>>& records,
                                   uint64_t per_bin, uint64_t seed);

struct AnnotationRow {
  std::string variant_id;
  int bin_index = 0;
  std::string annotator_id;  // "adjudicator" resolves disagreements
  bool correct = false;
};

// Majority-with-tiebreaker adjudication: two annotators per item, third
// label required only on disagreement (else MissingAdjudication).
std::vector<HumanBinResult> human_bin_accuracy(const std::vector<AnnotationRow>& rows);

std::vector<AnnotationRow> read_annotation_csv(const std::string& path);

}  // namespace drift
