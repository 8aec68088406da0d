// drift-eval: batch pipeline for measuring how LLM QA accuracy tracks the
// semantic drift of naturally edited Wikipedia passages away from a model's
// training corpus. Stages run behind a declarative TOML config with digest
// manifests, response caches, and resumable outputs.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"

#include "drift/benchmark_load.hpp"
#include "drift/config.hpp"
#include "drift/corpus.hpp"
#include "drift/errors.hpp"
#include "drift/evolve.hpp"
#include "drift/pipeline.hpp"
#include "drift/simdrift.hpp"
#include "drift/stats.hpp"
#include "drift/suffix_index.hpp"
#include "drift/text.hpp"
#include "drift/util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int exit_code_for(const drift::Error& e) {
  switch (e.kind()) {
    case drift::ErrorKind::Config: return 2;
    case drift::ErrorKind::StaleInput: return 3;
    case drift::ErrorKind::Endpoint:
    case drift::ErrorKind::Timeout: return 4;
    default: return 1;
  }
}

struct StageCmdOptions {
  std::string config_path;
  bool force = false;
  std::string only_llm;      // restrict the run to one configured llm id
  std::string only_dataset;  // restrict the run to one dataset id
};

// --llm/--dataset narrow the effective configuration; the stage manifests
// record the narrowed digest, so a later full run recomputes.
void apply_filters(drift::RunConfig& cfg, const StageCmdOptions& opt) {
  if (!opt.only_llm.empty()) {
    std::vector<drift::LlmRunConfig> kept;
    for (const auto& l : cfg.llms) {
      if (l.endpoint.llm_id == opt.only_llm) kept.push_back(l);
    }
    if (kept.empty()) {
      drift::raise(drift::ErrorKind::Config, "--llm '" + opt.only_llm + "' is not configured");
    }
    cfg.llms = std::move(kept);
  }
  if (!opt.only_dataset.empty()) {
    drift::DatasetId id = drift::dataset_id_from_name(opt.only_dataset);
    std::vector<drift::DatasetConfig> kept;
    for (const auto& d : cfg.datasets) {
      if (d.id == id) kept.push_back(d);
    }
    if (kept.empty()) {
      drift::raise(drift::ErrorKind::Config,
                   "--dataset '" + opt.only_dataset + "' is not configured");
    }
    cfg.datasets = std::move(kept);
  }
}

int run_stages(const StageCmdOptions& opt, const std::vector<drift::Stage>& stages) {
  drift::RunConfig cfg = drift::validate_config(opt.config_path);
  apply_filters(cfg, opt);
  drift::RunLock lock(cfg.out_dir);
  drift::ClientFactory clients = drift::http_client_factory();
  for (drift::Stage s : stages) {
    drift::StageOutcome outcome = drift::run_stage(s, cfg, clients, opt.force);
    std::fprintf(stderr, "[drift-eval] stage %-10s %s\n", drift::stage_name(s),
                 outcome == drift::StageOutcome::SKIPPED ? "skipped (up to date)" : "done");
  }
  return 0;
}

// Standalone verbatim audit: --corpus + --variants + --out, no run config.
struct VerbatimDirect {
  std::string corpus_path;
  std::vector<std::string> variants_paths;
  std::string out_path;
  std::string dataset;
  std::string index_in;
  std::string index_out;
  bool raw = false;
};

std::vector<drift::CorpusDoc> load_corpus_raw(const std::string& path) {
  std::vector<drift::CorpusDoc> docs;
  size_t line_no = 0;
  for (const auto& line : drift::read_lines(path)) {
    line_no++;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("doc_id") || !j.contains("text")) {
      drift::raise(drift::ErrorKind::Parse,
                   "corpus line " + std::to_string(line_no) + ": bad record");
    }
    drift::CorpusDoc d;
    d.doc_id = j["doc_id"].get<std::string>();
    d.text = j["text"].get<std::string>();
    if (j.contains("title")) d.title = j["title"].get<std::string>();
    docs.push_back(std::move(d));
  }
  return docs;
}

int run_verbatim_direct(const VerbatimDirect& opt) {
  drift::CorpusIndex index;
  if (!opt.index_in.empty()) {
    index = drift::CorpusIndex::load(opt.index_in);
  } else {
    auto docs = opt.raw ? load_corpus_raw(opt.corpus_path)
                        : drift::load_corpus_snapshot(opt.corpus_path, "cli");
    index = drift::CorpusIndex::build(docs);
  }
  if (!opt.index_out.empty()) index.save(opt.index_out);

  json out = json::object();
  for (const auto& variants_path : opt.variants_paths) {
    auto variants = drift::read_variants_jsonl(variants_path);
    if (!opt.raw) {
      for (auto& v : variants) v.edited_paragraph = drift::normalize_text(v.edited_paragraph);
    }
    drift::LeakageReport report = drift::leakage_rate(variants, index);
    std::string key = !opt.dataset.empty() && opt.variants_paths.size() == 1
                          ? opt.dataset
                          : fs::path(variants_path).stem().string();
    json j;
    j["n"] = report.n;
    j["hits"] = report.hits;
    if (report.rate_percent) {
      j["rate_percent"] = *report.rate_percent;
    } else {
      j["rate_percent"] = nullptr;
      j["empty"] = true;
    }
    out[key] = j;
  }
  drift::write_file_atomic(opt.out_path, out.dump(2) + "\n");
  std::fprintf(stderr, "[drift-eval] wrote %s\n", opt.out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drift-eval: context-drift QA evaluation pipeline"};
  app.require_subcommand(1);

  StageCmdOptions stage_opt;
  std::map<std::string, drift::Stage> stage_cmds;
  for (drift::Stage s : drift::all_stages()) stage_cmds.emplace(drift::stage_name(s), s);

  // verbatim doubles as a stage and as a standalone audit.
  VerbatimDirect verbatim_opt;
  std::string run_stage_name;

  std::vector<CLI::App*> stage_apps;
  for (const auto& [name, stage] : stage_cmds) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
    sub->add_option("--config", stage_opt.config_path, "run configuration (TOML)");
    sub->add_flag("--force", stage_opt.force, "recompute even when outputs are up to date");
    sub->add_option("--llm", stage_opt.only_llm, "restrict to one configured llm id");
    if (name == "verbatim") {
      sub->add_option("--dataset", verbatim_opt.dataset,
                      "dataset filter; in standalone mode, the output key");
      sub->add_option("--corpus", verbatim_opt.corpus_path,
                      "standalone mode: corpus snapshot JSONL");
      sub->add_option("--variants", verbatim_opt.variants_paths,
                      "standalone mode: variants JSONL (repeatable)");
      sub->add_option("--out", verbatim_opt.out_path, "standalone mode: output JSON");
      sub->add_option("--index", verbatim_opt.index_in, "load a prebuilt DEVI index");
      sub->add_option("--save-index", verbatim_opt.index_out, "persist the built DEVI index");
      sub->add_flag("--raw", verbatim_opt.raw, "byte-exact matching, no normalization");
    } else {
      sub->add_option("--dataset", stage_opt.only_dataset, "restrict to one dataset id");
    }
    stage_apps.push_back(sub);
  }

  CLI::App* run_cmd = app.add_subcommand("run", "run all stages in order");
  run_cmd->add_option("--config", stage_opt.config_path, "run configuration (TOML)")
      ->required();
  run_cmd->add_flag("--force", stage_opt.force, "recompute even when outputs are up to date");
  run_cmd->add_option("--stage", run_stage_name, "run a single stage instead of all");
  run_cmd->add_option("--llm", stage_opt.only_llm, "restrict to one configured llm id");
  run_cmd->add_option("--dataset", stage_opt.only_dataset, "restrict to one dataset id");

  CLI::App* validate_cmd = app.add_subcommand("validate", "validate a run configuration");
  std::string validate_path;
  validate_cmd->add_option("--config", validate_path, "run configuration (TOML)")->required();

  CLI::App* adapt_cmd =
      app.add_subcommand("adapt", "convert a native benchmark release to canonical JSONL");
  std::string adapt_dataset, adapt_in, adapt_out;
  adapt_cmd->add_option("--dataset", adapt_dataset, "dataset id (e.g. SQUAD11)")->required();
  adapt_cmd->add_option("--in", adapt_in, "native input file")->required();
  adapt_cmd->add_option("--out", adapt_out, "canonical benchmark JSONL")->required();

  CLI::App* sample_cmd = app.add_subcommand(
      "sample", "equal-per-bin stratified sample of variants for human annotation");
  std::vector<std::string> sample_sims;
  uint64_t sample_per_bin = 5, sample_seed = 0;
  std::string sample_out, sample_config;
  sample_cmd->add_option("--similarity", sample_sims, "similarity JSONL (repeatable)");
  sample_cmd->add_option("--config", sample_config,
                         "take the seed and similarity files from a run config");
  sample_cmd->add_option("--per-bin", sample_per_bin, "items per bin");
  sample_cmd->add_option("--seed", sample_seed, "sampling seed (overrides config)");
  sample_cmd->add_option("--out", sample_out, "output CSV")->required();

  CLI::App* human_cmd =
      app.add_subcommand("human", "per-bin accuracy from an annotation CSV");
  std::string human_in, human_out;
  human_cmd->add_option("--annotations", human_in, "annotation CSV")->required();
  human_cmd->add_option("--out", human_out, "output JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    for (CLI::App* sub : stage_apps) {
      if (!sub->parsed()) continue;
      if (sub->get_name() == "verbatim" && !verbatim_opt.corpus_path.empty()) {
        if (verbatim_opt.variants_paths.empty() || verbatim_opt.out_path.empty()) {
          drift::raise(drift::ErrorKind::Config,
                       "standalone verbatim needs --corpus, --variants and --out");
        }
        return run_verbatim_direct(verbatim_opt);
      }
      if (sub->get_name() == "verbatim" && !verbatim_opt.index_in.empty()) {
        return run_verbatim_direct(verbatim_opt);
      }
      if (stage_opt.config_path.empty()) {
        drift::raise(drift::ErrorKind::Config, "--config is required");
      }
      if (sub->get_name() == "verbatim" && !verbatim_opt.dataset.empty()) {
        stage_opt.only_dataset = verbatim_opt.dataset;
      }
      return run_stages(stage_opt, {stage_cmds.at(sub->get_name())});
    }
    if (run_cmd->parsed()) {
      if (!run_stage_name.empty()) {
        return run_stages(stage_opt, {drift::stage_from_name(run_stage_name)});
      }
      return run_stages(stage_opt, drift::all_stages());
    }
    if (validate_cmd->parsed()) {
      drift::RunConfig cfg = drift::validate_config(validate_path);
      std::fprintf(stderr, "[drift-eval] config ok (digest %s)\n", cfg.digest().c_str());
      return 0;
    }
    if (adapt_cmd->parsed()) {
      drift::DatasetId id = drift::dataset_id_from_name(adapt_dataset);
      auto instances = drift::adapt_native_benchmark(adapt_in, id);
      drift::write_benchmark_jsonl(adapt_out, instances);
      std::fprintf(stderr, "[drift-eval] wrote %zu instances to %s\n", instances.size(),
                   adapt_out.c_str());
      return 0;
    }
    if (sample_cmd->parsed()) {
      if (!sample_config.empty()) {
        drift::RunConfig cfg = drift::validate_config(sample_config);
        if (sample_cmd->count("--seed") == 0) sample_seed = cfg.seed;
        if (sample_sims.empty()) {
          fs::path sim_dir = fs::path(cfg.out_dir) / "similarity";
          if (fs::exists(sim_dir)) {
            for (const auto& entry : fs::directory_iterator(sim_dir)) {
              std::string name = entry.path().filename().string();
              if (name.rfind("sim_", 0) == 0) sample_sims.push_back(entry.path().string());
            }
            std::sort(sample_sims.begin(), sample_sims.end());
          }
        }
      }
      if (sample_sims.empty()) {
        drift::raise(drift::ErrorKind::Config,
                     "sample needs --similarity files or a --config with a similarity stage");
      }
      std::vector<std::pair<int, std::string>> records;
      for (const auto& path : sample_sims) {
        for (const auto& s : drift::read_similarity_jsonl(path)) {
          records.emplace_back(s.bin_index, s.variant_id);
        }
      }
      drift::StratifiedSample sample =
          drift::stratified_sample(records, sample_per_bin, sample_seed);
      std::string csv = "variant_id,bin_index\n";
      for (const auto& [bin, id] : sample.items) {
        csv += id + "," + std::to_string(bin) + "\n";
      }
      drift::write_file_atomic(sample_out, csv);
      for (int bin : sample.short_bins) {
        std::fprintf(stderr, "[drift-eval] bin %d has fewer items than requested\n", bin);
      }
      return 0;
    }
    if (human_cmd->parsed()) {
      auto rows = drift::read_annotation_csv(human_in);
      auto results = drift::human_bin_accuracy(rows);
      json out = json::array();
      for (const auto& r : results) {
        json j;
        j["bin_index"] = r.bin_index;
        j["n_annotated"] = r.n_annotated;
        j["k_correct"] = r.k_correct;
        if (r.accuracy_percent) j["accuracy_percent"] = *r.accuracy_percent;
        out.push_back(j);
      }
      drift::write_file_atomic(human_out, out.dump(2) + "\n");
      return 0;
    }
  } catch (const drift::Error& e) {
    std::fprintf(stderr, "[drift-eval] %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[drift-eval] error: %s\n", e.what());
    return 1;
  }
  return 0;
}
