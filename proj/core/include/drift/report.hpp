#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "drift/stats.hpp"
#include "drift/types.hpp"

namespace drift {

struct GroupResult {
  std::vector<BinSummary> bins;           // non-empty bins, ascending
  std::optional<TrendSummary> trend;      // absent when < 2 usable bins
  std::string insufficient_reason;        // set when trend is absent
};

struct FilterRateRow {
  std::string dataset;
  std::string llm;
  uint64_t instances_probed = 0;
  uint64_t instances_filtered = 0;
  double filtered_percent = 0.0;
};

// (dataset, llm, mode) -> results
using GroupKey = std::tuple<std::string, std::string, std::string>;

struct ReportInputs {
  std::map<GroupKey, GroupResult> groups;
  std::vector<FilterRateRow> filter_rates;
  std::string leakage_json = "{}";  // verbatim stage output, copied through
  std::string config_digest;
  std::map<std::string, std::string> input_digests;  // path -> sha256
};

// Writes the report tree under out_dir:
//   <dataset>/<llm>/<mode>/bins.csv   (bin_lo,bin_hi,n,k,accuracy_percent,
//                                      wilson_low,wilson_high)
//   <dataset>/<llm>/<mode>/trend.json
//   filter_rates.csv
//   leakage.json
//   aggregates.json                   (per-dataset and per-llm slope/r stats)
//   manifest.json                     (config hash + input digests)
// Reruns over identical inputs produce byte-identical files.
void emit_report(const ReportInputs& inputs, const std::string& out_dir);

}  // namespace drift
