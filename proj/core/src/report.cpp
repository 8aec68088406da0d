#include "drift/report.hpp"

#include <cstdio>
#include <filesystem>

#include "json.hpp"

#include "drift/errors.hpp"
#include "drift/util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace drift {

namespace {

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string bins_csv(const std::vector<BinSummary>& bins) {
  std::string out = "bin_lo,bin_hi,n,k,accuracy_percent,wilson_low,wilson_high\n";
  for (const auto& b : bins) {
    out += fmt(b.bin_lo, 1) + "," + fmt(b.bin_hi, 1) + "," + std::to_string(b.n) + "," +
           std::to_string(b.k) + "," + fmt(b.accuracy_percent.value_or(0.0), 6) + "," +
           fmt(b.wilson_low, 6) + "," + fmt(b.wilson_high, 6) + "\n";
  }
  return out;
}

json trend_json(const GroupResult& group) {
  json j;
  if (group.trend) {
    j["slope"] = group.trend->slope;
    j["intercept"] = group.trend->intercept;
    if (group.trend->pearson_r) {
      j["pearson_r"] = *group.trend->pearson_r;
      j["r_defined"] = true;
    } else {
      j["pearson_r"] = nullptr;
      j["r_defined"] = false;
    }
    j["n_points"] = group.trend->n_points;
  } else {
    j["slope"] = nullptr;
    j["insufficient"] = group.insufficient_reason;
  }
  std::vector<int> low_support;
  for (const auto& b : group.bins) {
    if (b.low_support) low_support.push_back(b.bin_index);
  }
  j["low_support_bins"] = low_support;
  j["x"] = "bin_midpoint";
  j["y"] = "accuracy_percent";
  j["weighted"] = false;
  return j;
}

json aggregates_json(const std::map<GroupKey, GroupResult>& groups) {
  // Group defined trends by dataset and by llm, WITH_CONTEXT mode only.
  std::map<std::string, std::vector<TrendSummary>> by_dataset, by_llm;
  for (const auto& [key, group] : groups) {
    if (std::get<2>(key) != "WITH_CONTEXT") continue;
    if (!group.trend) continue;
    by_dataset[std::get<0>(key)].push_back(*group.trend);
    by_llm[std::get<1>(key)].push_back(*group.trend);
  }
  auto render = [](const std::map<std::string, std::vector<TrendSummary>>& grouped) {
    json out = json::object();
    for (const auto& [name, trends] : grouped) {
      TrendAggregate agg = aggregate_trends(trends);
      json a;
      a["mean_slope"] = agg.mean_slope;
      a["std_slope"] = agg.std_slope;
      a["mean_pearson_r"] = agg.mean_r;
      a["std_pearson_r"] = agg.std_r;
      a["n_trends"] = agg.n_trends;
      a["n_r_excluded"] = agg.n_r_excluded;
      out[name] = a;
    }
    return out;
  };
  json j;
  j["by_dataset"] = render(by_dataset);
  j["by_llm"] = render(by_llm);
  j["std_form"] = "population";
  return j;
}

}  // namespace

void emit_report(const ReportInputs& inputs, const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& [key, group] : inputs.groups) {
    const auto& [dataset, llm, mode] = key;
    fs::path dir = fs::path(out_dir) / dataset / llm / mode;
    write_file_atomic((dir / "bins.csv").string(), bins_csv(group.bins));
    write_file_atomic((dir / "trend.json").string(), trend_json(group).dump(2) + "\n");
  }

  std::string rates = "dataset,llm,instances_probed,instances_filtered,filtered_percent\n";
  for (const auto& row : inputs.filter_rates) {
    rates += row.dataset + "," + row.llm + "," + std::to_string(row.instances_probed) + "," +
             std::to_string(row.instances_filtered) + "," + fmt(row.filtered_percent, 6) + "\n";
  }
  write_file_atomic((fs::path(out_dir) / "filter_rates.csv").string(), rates);
  write_file_atomic((fs::path(out_dir) / "leakage.json").string(), inputs.leakage_json);
  write_file_atomic((fs::path(out_dir) / "aggregates.json").string(),
                    aggregates_json(inputs.groups).dump(2) + "\n");

  json manifest;
  manifest["config_sha256"] = inputs.config_digest;
  json digests = json::object();
  for (const auto& [path, digest] : inputs.input_digests) digests[path] = digest;
  manifest["inputs"] = digests;
  write_file_atomic((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace drift
