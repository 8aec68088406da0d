#include "drift/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "json.hpp"

#include "drift/benchmark_load.hpp"
#include "drift/corpus.hpp"
#include "drift/errors.hpp"
#include "drift/evolve.hpp"
#include "drift/prompts.hpp"
#include "drift/report.hpp"
#include "drift/revisions.hpp"
#include "drift/scoring.hpp"
#include "drift/sha256.hpp"
#include "drift/simdrift.hpp"
#include "drift/stats.hpp"
#include "drift/suffix_index.hpp"
#include "drift/util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace drift {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::INGEST: return "ingest";
    case Stage::EVOLVE: return "evolve";
    case Stage::SIMILARITY: return "similarity";
    case Stage::VERBATIM: return "verbatim";
    case Stage::INFER: return "infer";
    case Stage::SCORE: return "score";
    case Stage::ANALYZE: return "analyze";
    case Stage::REPORT: return "report";
  }
  return "?";
}

Stage stage_from_name(const std::string& name) {
  for (Stage s : all_stages()) {
    if (name == stage_name(s)) return s;
  }
  raise(ErrorKind::Config, "unknown stage '" + name + "'");
}

std::vector<Stage> all_stages() {
  return {Stage::INGEST, Stage::EVOLVE, Stage::SIMILARITY, Stage::VERBATIM,
          Stage::INFER,  Stage::SCORE,  Stage::ANALYZE,    Stage::REPORT};
}

ClientFactory http_client_factory() {
  ClientFactory f;
  f.make_embedder = [](const RunConfig& cfg) -> std::shared_ptr<Embedder> {
    return make_http_embedder(cfg.embedding);
  };
  f.make_llm = [](const RunConfig&, const LlmRunConfig& llm) -> std::shared_ptr<LlmClient> {
    return make_http_llm_client(llm.endpoint);
  };
  return f;
}

namespace {

struct Paths {
  explicit Paths(const RunConfig& cfg) : out(cfg.out_dir) {}
  fs::path out;

  std::string stage_dir(Stage s) const { return (out / stage_name(s)).string(); }
  std::string manifest(Stage s) const {
    return (out / stage_name(s) / ".manifest.json").string();
  }
  std::string bench(DatasetId id) const {
    return (out / "ingest" / ("bench_" + std::string(dataset_id_name(id)) + ".jsonl")).string();
  }
  std::string revisions() const { return (out / "ingest" / "revisions.jsonl").string(); }
  std::string corpus(const std::string& tag) const {
    return (out / "ingest" / ("corpus_" + tag + ".jsonl")).string();
  }
  std::string variants(DatasetId id) const {
    return (out / "evolve" / ("variants_" + std::string(dataset_id_name(id)) + ".jsonl"))
        .string();
  }
  std::string skips(DatasetId id) const {
    return (out / "evolve" / ("skips_" + std::string(dataset_id_name(id)) + ".jsonl")).string();
  }
  std::string sim(DatasetId id, const std::string& tag) const {
    return (out / "similarity" /
            ("sim_" + std::string(dataset_id_name(id)) + "_" + tag + ".jsonl"))
        .string();
  }
  std::string nomatch(DatasetId id, const std::string& tag) const {
    return (out / "similarity" /
            ("nomatch_" + std::string(dataset_id_name(id)) + "_" + tag + ".jsonl"))
        .string();
  }
  std::string leakage(const std::string& tag) const {
    return (out / "verbatim" / ("leakage_" + tag + ".json")).string();
  }
  std::string raw(DatasetId id, const std::string& llm, PromptMode mode) const {
    return (out / "infer" /
            ("raw_" + std::string(dataset_id_name(id)) + "_" + llm + "_" +
             prompt_mode_name(mode) + ".jsonl"))
        .string();
  }
  std::string pred(DatasetId id, const std::string& llm, PromptMode mode) const {
    return (out / "score" /
            ("pred_" + std::string(dataset_id_name(id)) + "_" + llm + "_" +
             prompt_mode_name(mode) + ".jsonl"))
        .string();
  }
  std::string analysis(DatasetId id, const std::string& llm) const {
    return (out / "analyze" /
            ("analysis_" + std::string(dataset_id_name(id)) + "_" + llm + ".json"))
        .string();
  }
  std::string report_dir() const { return (out / "report").string(); }
  std::string embed_cache() const { return (out / "cache" / "embed").string(); }
  std::string llm_cache(const std::string& llm) const {
    return (out / "cache" / "llm" / llm).string();
  }
};

std::set<std::string> needed_corpus_tags(const RunConfig& cfg) {
  std::set<std::string> tags;
  for (const auto& llm : cfg.llms) tags.insert(llm.corpus_tag);
  return tags;
}

std::vector<std::string> stage_inputs(Stage stage, const RunConfig& cfg, const Paths& paths) {
  std::vector<std::string> in;
  switch (stage) {
    case Stage::INGEST:
      for (const auto& d : cfg.datasets) in.push_back(d.path);
      for (const auto& r : cfg.revisions) in.push_back(r.path);
      for (const auto& c : cfg.corpora) in.push_back(c.path);
      break;
    case Stage::EVOLVE:
      for (const auto& d : cfg.datasets) in.push_back(paths.bench(d.id));
      in.push_back(paths.revisions());
      break;
    case Stage::SIMILARITY:
      for (const auto& d : cfg.datasets) {
        in.push_back(paths.bench(d.id));
        in.push_back(paths.variants(d.id));
      }
      for (const auto& tag : needed_corpus_tags(cfg)) in.push_back(paths.corpus(tag));
      break;
    case Stage::VERBATIM:
      for (const auto& d : cfg.datasets) in.push_back(paths.variants(d.id));
      for (const auto& tag : needed_corpus_tags(cfg)) in.push_back(paths.corpus(tag));
      break;
    case Stage::INFER:
      for (const auto& d : cfg.datasets) {
        in.push_back(paths.bench(d.id));
        in.push_back(paths.variants(d.id));
      }
      break;
    case Stage::SCORE:
      for (const auto& d : cfg.datasets) {
        in.push_back(paths.bench(d.id));
        for (const auto& llm : cfg.llms) {
          for (auto mode : cfg.modes) in.push_back(paths.raw(d.id, llm.endpoint.llm_id, mode));
        }
      }
      break;
    case Stage::ANALYZE:
      for (const auto& d : cfg.datasets) {
        in.push_back(paths.bench(d.id));
        in.push_back(paths.variants(d.id));
        for (const auto& llm : cfg.llms) {
          for (auto mode : cfg.modes) in.push_back(paths.pred(d.id, llm.endpoint.llm_id, mode));
          in.push_back(paths.sim(d.id, llm.corpus_tag));
        }
      }
      break;
    case Stage::REPORT:
      for (const auto& d : cfg.datasets) {
        for (const auto& llm : cfg.llms) in.push_back(paths.analysis(d.id, llm.endpoint.llm_id));
      }
      for (const auto& tag : needed_corpus_tags(cfg)) in.push_back(paths.leakage(tag));
      // manifest.json records the digests of the run's external inputs, so
      // those files are report inputs as well
      for (const auto& d : cfg.datasets) in.push_back(d.path);
      for (const auto& r : cfg.revisions) in.push_back(r.path);
      for (const auto& c : cfg.corpora) in.push_back(c.path);
      break;
  }
  std::sort(in.begin(), in.end());
  in.erase(std::unique(in.begin(), in.end()), in.end());
  return in;
}

// Maps a file under out_dir back to the stage that produces it.
std::optional<Stage> producing_stage(const std::string& path, const Paths& paths) {
  fs::path p = fs::path(path).lexically_normal();
  fs::path out = paths.out.lexically_normal();
  auto rel = p.lexically_relative(out);
  if (rel.empty() || rel.begin()->string() == "..") return std::nullopt;
  std::string first = rel.begin()->string();
  for (Stage s : all_stages()) {
    if (first == stage_name(s)) return s;
  }
  return std::nullopt;
}

json load_manifest(const std::string& path) {
  if (!fs::exists(path)) return json();
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) return json();
  return j;
}

bool can_skip(Stage stage, const RunConfig& cfg, const Paths& paths,
              const std::vector<std::string>& inputs) {
  json m = load_manifest(paths.manifest(stage));
  if (m.is_null() || !m.is_object()) return false;
  if (m.value("config_digest", "") != cfg.digest()) return false;
  if (!m.contains("inputs") || !m.contains("outputs")) return false;
  const json& min = m["inputs"];
  if (min.size() != inputs.size()) return false;
  for (const auto& path : inputs) {
    if (!min.contains(path)) return false;
    if (!fs::exists(path)) return false;
    if (sha256_file_hex(path) != min[path].get<std::string>()) return false;
  }
  for (auto it = m["outputs"].begin(); it != m["outputs"].end(); ++it) {
    if (!fs::exists(it.key())) return false;
    if (sha256_file_hex(it.key()) != it.value().get<std::string>()) return false;
  }
  return true;
}

void check_upstream(Stage stage, const Paths& paths, const std::vector<std::string>& inputs) {
  for (const auto& input : inputs) {
    auto producer = producing_stage(input, paths);
    if (!producer) {
      if (!fs::exists(input)) {
        raise(ErrorKind::Io, "input file missing: " + input);
      }
      continue;
    }
    json m = load_manifest(paths.manifest(*producer));
    if (m.is_null()) {
      raise(ErrorKind::StaleInput, std::string("stage '") + stage_name(*producer) +
                                       "' has not run (required by '" + stage_name(stage) +
                                       "' for " + input + ")");
    }
    if (!m["outputs"].contains(input)) {
      raise(ErrorKind::StaleInput, "upstream stage '" + std::string(stage_name(*producer)) +
                                       "' does not declare output " + input);
    }
    if (!fs::exists(input)) {
      raise(ErrorKind::StaleInput, "upstream output missing: " + input);
    }
    if (sha256_file_hex(input) != m["outputs"][input].get<std::string>()) {
      raise(ErrorKind::StaleInput, "digest mismatch for " + input +
                                       " (stale or corrupted upstream output)");
    }
  }
}

void write_manifest(Stage stage, const RunConfig& cfg, const Paths& paths,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json m;
  m["stage"] = stage_name(stage);
  m["config_digest"] = cfg.digest();
  json jin = json::object();
  for (const auto& p : inputs) jin[p] = sha256_file_hex(p);
  m["inputs"] = jin;
  json jout = json::object();
  for (const auto& p : outputs) jout[p] = sha256_file_hex(p);
  m["outputs"] = jout;
  write_file_atomic(paths.manifest(stage), m.dump(2) + "\n");
}

// --- stage bodies ---

std::vector<std::string> stage_ingest(const RunConfig& cfg, const Paths& paths) {
  std::vector<std::string> outputs;
  for (const auto& d : cfg.datasets) {
    std::vector<QAInstance> instances = d.format == "native"
                                            ? adapt_native_benchmark(d.path, d.id)
                                            : load_benchmark(d.path, d.id);
    std::sort(instances.begin(), instances.end(),
              [](const QAInstance& a, const QAInstance& b) {
                return a.instance_id < b.instance_id;
              });
    write_benchmark_jsonl(paths.bench(d.id), instances);
    outputs.push_back(paths.bench(d.id));
  }
  {
    AtomicFileWriter writer(paths.revisions());
    for (const auto& r : cfg.revisions) {
      stream_revision_history(r.path, [&](PageChain&& page) {
        for (const auto& rev : page.revisions) {
          writer.write(revision_to_json_line(rev));
          writer.write("\n");
        }
      });
    }
    writer.commit();
    outputs.push_back(paths.revisions());
  }
  for (const auto& c : cfg.corpora) {
    AtomicFileWriter writer(paths.corpus(c.tag));
    stream_corpus_snapshot(c.path, c.tag, [&](CorpusDoc&& doc) {
      writer.write(corpus_doc_to_json_line(doc));
      writer.write("\n");
    });
    writer.commit();
    outputs.push_back(paths.corpus(c.tag));
  }
  return outputs;
}

std::vector<std::string> stage_evolve(const RunConfig& cfg, const Paths& paths) {
  std::vector<std::string> outputs;
  for (const auto& d : cfg.datasets) {
    std::vector<QAInstance> instances = load_benchmark(paths.bench(d.id), d.id);
    std::set<std::string> titles;
    for (const auto& q : instances) {
      for (const auto& t : q.titles) titles.insert(t);
    }
    auto histories = load_revision_history(paths.revisions(), titles);
    BuildVariantsResult built =
        build_variants(instances, histories, cfg.apc_mode, cfg.descend_floor);
    write_variants_jsonl(paths.variants(d.id), built.variants);
    std::string skips;
    for (const auto& s : built.skips) {
      json j;
      j["instance_id"] = s.instance_id;
      j["title"] = s.title;
      j["reason"] = s.reason;
      skips += j.dump();
      skips += '\n';
    }
    write_file_atomic(paths.skips(d.id), skips);
    outputs.push_back(paths.variants(d.id));
    outputs.push_back(paths.skips(d.id));
  }
  return outputs;
}

std::vector<std::string> stage_similarity(const RunConfig& cfg, const Paths& paths,
                                          const ClientFactory& clients) {
  std::vector<std::string> outputs;
  std::shared_ptr<Embedder> base(clients.make_embedder(cfg));
  auto embedder = make_caching_embedder(base, paths.embed_cache());
  for (const auto& tag : needed_corpus_tags(cfg)) {
    auto docs = load_corpus_snapshot(paths.corpus(tag), tag);
    auto by_title = index_corpus_by_title(docs);
    SimilarityOptions options;
    options.corpus_tag = tag;
    options.reduction = cfg.multihop_reduction;
    options.window_tokens = cfg.chunk_tokens;
    options.stride_tokens = cfg.chunk_stride;
    for (const auto& d : cfg.datasets) {
      std::map<std::string, QAInstance> instances;
      for (auto& q : load_benchmark(paths.bench(d.id), d.id)) {
        instances.emplace(q.instance_id, std::move(q));
      }
      std::vector<SimilarityRecord> records;
      std::vector<std::string> no_match;
      for (const auto& v : read_variants_jsonl(paths.variants(d.id))) {
        if (v.apc_status != ApcStatus::KEPT) continue;
        auto inst = instances.find(v.instance_id);
        if (inst == instances.end()) continue;
        auto record = compute_similarity_record(v, inst->second, by_title, *embedder, options);
        if (record) {
          records.push_back(std::move(*record));
        } else {
          no_match.push_back(v.variant_id);
        }
      }
      std::sort(records.begin(), records.end(),
                [](const SimilarityRecord& a, const SimilarityRecord& b) {
                  return a.variant_id < b.variant_id;
                });
      write_similarity_jsonl(paths.sim(d.id, tag), records);
      std::sort(no_match.begin(), no_match.end());
      std::string flags;
      for (const auto& id : no_match) {
        json j;
        j["variant_id"] = id;
        j["flag"] = "no-corpus-match";
        flags += j.dump();
        flags += '\n';
      }
      write_file_atomic(paths.nomatch(d.id, tag), flags);
      outputs.push_back(paths.sim(d.id, tag));
      outputs.push_back(paths.nomatch(d.id, tag));
    }
  }
  return outputs;
}

std::vector<std::string> stage_verbatim(const RunConfig& cfg, const Paths& paths) {
  std::vector<std::string> outputs;
  for (const auto& tag : needed_corpus_tags(cfg)) {
    auto docs = load_corpus_snapshot(paths.corpus(tag), tag);
    CorpusIndex index = CorpusIndex::build(docs, cfg.max_index_bytes);
    json per_dataset = json::object();
    for (const auto& d : cfg.datasets) {
      auto variants = read_variants_jsonl(paths.variants(d.id));
      LeakageReport report = leakage_rate(variants, index);
      json j;
      j["n"] = report.n;
      j["hits"] = report.hits;
      if (report.rate_percent) {
        j["rate_percent"] = *report.rate_percent;
      } else {
        j["rate_percent"] = nullptr;
        j["empty"] = true;
      }
      per_dataset[dataset_id_name(d.id)] = j;
    }
    write_file_atomic(paths.leakage(tag), per_dataset.dump(2) + "\n");
    outputs.push_back(paths.leakage(tag));
  }
  return outputs;
}

struct RawRecord {
  std::string variant_id;
  std::string instance_id;
  std::string raw_output;
  bool endpoint_failed = false;
};

std::string raw_record_line(const RawRecord& r, const std::string& llm_id, PromptMode mode) {
  json j;
  if (!r.variant_id.empty()) j["variant_id"] = r.variant_id;
  j["instance_id"] = r.instance_id;
  j["llm_id"] = llm_id;
  j["mode"] = prompt_mode_name(mode);
  j["raw_output"] = r.raw_output;
  if (r.endpoint_failed) j["endpoint_failed"] = true;
  return j.dump();
}

std::vector<std::string> stage_infer(const RunConfig& cfg, const Paths& paths,
                                     const ClientFactory& clients) {
  std::vector<std::string> outputs;
  for (const auto& llm_cfg : cfg.llms) {
    const std::string llm_id = llm_cfg.endpoint.llm_id;
    std::shared_ptr<LlmClient> base(clients.make_llm(cfg, llm_cfg));
    auto client = make_caching_llm_client(base, paths.llm_cache(llm_id));
    int failures = 0;
    auto ask = [&](const std::string& prompt, const DecodingParams& params) -> RawRecord {
      RawRecord r;
      try {
        r.raw_output = client->complete(prompt, params).text;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Endpoint && e.kind() != ErrorKind::Timeout) throw;
        r.endpoint_failed = true;
        failures++;
        if (failures > cfg.endpoint_failure_budget) {
          raise(ErrorKind::Endpoint,
                "endpoint failure budget exceeded for llm '" + llm_id + "': " + e.what());
        }
      }
      return r;
    };
    for (const auto& d : cfg.datasets) {
      std::vector<QAInstance> instances = load_benchmark(paths.bench(d.id), d.id);
      std::map<std::string, const QAInstance*> by_id;
      for (const auto& q : instances) by_id[q.instance_id] = &q;
      auto variants = read_variants_jsonl(paths.variants(d.id));
      bool long_form = task_kind_for(d.id) == TaskKind::FREEFORM;
      for (auto mode : cfg.modes) {
        DecodingParams params = cfg.decoding;
        if (long_form || mode == PromptMode::WITH_CONTEXT_COT) {
          params.max_tokens = cfg.max_tokens_long;
        }
        std::vector<RawRecord> records;
        if (mode == PromptMode::QUESTION_ONLY) {
          for (const auto& q : instances) {
            PromptSpec prompt = build_prompt(q, std::nullopt, mode);
            RawRecord r = ask(prompt.rendered, params);
            r.instance_id = q.instance_id;
            records.push_back(std::move(r));
          }
        } else {
          for (const auto& v : variants) {
            if (v.apc_status != ApcStatus::KEPT) continue;
            auto inst = by_id.find(v.instance_id);
            if (inst == by_id.end()) continue;
            const QAInstance& q = *inst->second;
            std::string passage = q.task_kind == TaskKind::MULTIHOP
                                      ? assemble_context(q, {v})
                                      : v.edited_paragraph;
            PromptSpec prompt = build_prompt(q, passage, mode);
            RawRecord r = ask(prompt.rendered, params);
            r.variant_id = v.variant_id;
            r.instance_id = v.instance_id;
            records.push_back(std::move(r));
          }
        }
        std::sort(records.begin(), records.end(), [](const RawRecord& a, const RawRecord& b) {
          return std::tie(a.variant_id, a.instance_id) < std::tie(b.variant_id, b.instance_id);
        });
        std::string content;
        for (const auto& r : records) {
          content += raw_record_line(r, llm_id, mode);
          content += '\n';
        }
        write_file_atomic(paths.raw(d.id, llm_id, mode), content);
        outputs.push_back(paths.raw(d.id, llm_id, mode));
      }
    }
  }
  return outputs;
}

std::vector<std::string> stage_score(const RunConfig& cfg, const Paths& paths,
                                     const ClientFactory& clients) {
  std::vector<std::string> outputs;
  std::shared_ptr<Embedder> embedder;  // built on first FREEFORM record
  auto get_embedder = [&]() -> Embedder& {
    if (!embedder) {
      std::shared_ptr<Embedder> base(clients.make_embedder(cfg));
      embedder = std::shared_ptr<Embedder>(
          make_caching_embedder(base, paths.embed_cache()).release());
    }
    return *embedder;
  };
  for (const auto& d : cfg.datasets) {
    std::map<std::string, QAInstance> instances;
    for (auto& q : load_benchmark(paths.bench(d.id), d.id)) {
      instances.emplace(q.instance_id, std::move(q));
    }
    for (const auto& llm_cfg : cfg.llms) {
      const std::string llm_id = llm_cfg.endpoint.llm_id;
      for (auto mode : cfg.modes) {
        std::vector<PredictionRecord> predictions;
        size_t line_no = 0;
        for (const auto& line : read_lines(paths.raw(d.id, llm_id, mode))) {
          line_no++;
          if (line.empty()) continue;
          json j = json::parse(line, nullptr, false);
          if (j.is_discarded()) {
            raise(ErrorKind::Parse, "raw record line " + std::to_string(line_no));
          }
          PredictionRecord p;
          if (j.contains("variant_id")) p.variant_id = j["variant_id"].get<std::string>();
          p.instance_id = j["instance_id"].get<std::string>();
          p.llm_id = llm_id;
          p.mode = mode;
          p.raw_output = j["raw_output"].get<std::string>();
          p.endpoint_failed = j.value("endpoint_failed", false);
          auto inst = instances.find(p.instance_id);
          if (inst == instances.end()) {
            raise(ErrorKind::Schema, "raw record references unknown instance " + p.instance_id);
          }
          const QAInstance& q = inst->second;
          p.scorer = q.task_kind == TaskKind::FREEFORM ? Scorer::SEMANTIC_THRESHOLD
                                                       : Scorer::INCLUSION_MATCH;
          std::string answer_text = mode == PromptMode::WITH_CONTEXT_COT
                                        ? cot_answer_span(p.raw_output)
                                        : p.raw_output;
          if (p.endpoint_failed || answer_text.empty()) {
            p.correct = 0;
          } else if (q.task_kind == TaskKind::FREEFORM) {
            SemanticScore s = score_semantic_multi(answer_text, q.gold_answers, get_embedder(),
                                                   cfg.semantic_threshold);
            p.correct = s.correct;
            p.score_detail = s.similarity;
          } else {
            p.correct = score_inclusion_match(answer_text, q.gold_answers, q.task_kind);
          }
          predictions.push_back(std::move(p));
        }
        write_predictions_jsonl(paths.pred(d.id, llm_id, mode), predictions);
        outputs.push_back(paths.pred(d.id, llm_id, mode));
      }
    }
  }
  return outputs;
}

json bin_summary_json(const BinSummary& b) {
  json j;
  j["bin_index"] = b.bin_index;
  j["bin_lo"] = b.bin_lo;
  j["bin_hi"] = b.bin_hi;
  j["n"] = b.n;
  j["k"] = b.k;
  if (b.accuracy_percent) j["accuracy_percent"] = *b.accuracy_percent;
  j["wilson_low"] = b.wilson_low;
  j["wilson_high"] = b.wilson_high;
  j["low_support"] = b.low_support;
  return j;
}

std::vector<std::string> stage_analyze(const RunConfig& cfg, const Paths& paths) {
  std::vector<std::string> outputs;
  for (const auto& d : cfg.datasets) {
    std::vector<QAInstance> instances = load_benchmark(paths.bench(d.id), d.id);
    std::vector<std::string> instance_ids;
    for (const auto& q : instances) instance_ids.push_back(q.instance_id);
    auto variants = read_variants_jsonl(paths.variants(d.id));
    std::map<std::string, std::string> variant_instance;
    for (const auto& v : variants) {
      if (v.apc_status == ApcStatus::KEPT) variant_instance[v.variant_id] = v.instance_id;
    }
    for (const auto& llm_cfg : cfg.llms) {
      const std::string llm_id = llm_cfg.endpoint.llm_id;
      std::map<std::string, SimilarityRecord> sims;
      for (auto& s : read_similarity_jsonl(paths.sim(d.id, llm_cfg.corpus_tag))) {
        sims.emplace(s.variant_id, std::move(s));
      }
      std::vector<PredictionRecord> probes =
          read_predictions_jsonl(paths.pred(d.id, llm_id, PromptMode::QUESTION_ONLY));
      ParametricFilterResult filter = parametric_filter(probes, instance_ids, llm_id);

      json out;
      out["dataset"] = dataset_id_name(d.id);
      out["llm"] = llm_id;
      json jf;
      jf["instances_probed"] = filter.instances_probed;
      jf["instances_filtered"] = filter.instances_filtered;
      jf["filtered_percent"] = filter.filtered_percent;
      jf["excluded_instance_ids"] =
          std::vector<std::string>(filter.excluded_instance_ids.begin(),
                                   filter.excluded_instance_ids.end());
      out["filter"] = jf;

      json modes = json::object();
      for (auto mode : cfg.modes) {
        if (mode == PromptMode::QUESTION_ONLY) continue;
        auto preds = read_predictions_jsonl(paths.pred(d.id, llm_id, mode));
        std::vector<std::pair<int, int>> joined;
        std::vector<std::string> excluded_parametric, excluded_no_similarity, excluded_failed;
        for (const auto& p : preds) {
          auto vi = variant_instance.find(p.variant_id);
          if (vi == variant_instance.end()) continue;
          if (p.endpoint_failed) {  // an infra failure is not a prediction
            excluded_failed.push_back(p.variant_id);
            continue;
          }
          if (filter.excluded_instance_ids.count(vi->second)) {
            excluded_parametric.push_back(p.variant_id);
            continue;
          }
          auto sim = sims.find(p.variant_id);
          if (sim == sims.end()) {
            excluded_no_similarity.push_back(p.variant_id);
            continue;
          }
          joined.emplace_back(sim->second.bin_index, p.correct);
        }
        std::vector<BinSummary> bins = bin_accuracy(joined, cfg.z, cfg.min_bin_n);
        json jm;
        json jbins = json::array();
        for (const auto& b : bins) jbins.push_back(bin_summary_json(b));
        jm["bins"] = jbins;
        std::vector<std::pair<double, double>> points;
        std::vector<double> weights;
        for (const auto& b : bins) {
          points.emplace_back(bin_midpoint(b.bin_index), b.accuracy_percent.value_or(0.0));
          weights.push_back(double(b.n));
        }
        if (points.size() >= 2) {
          TrendSummary t =
              cfg.weighted_trend ? fit_trend_weighted(points, weights) : fit_trend(points);
          json jt;
          jt["slope"] = t.slope;
          jt["intercept"] = t.intercept;
          if (t.pearson_r) {
            jt["pearson_r"] = *t.pearson_r;
          } else {
            jt["pearson_r"] = nullptr;
          }
          jt["n_points"] = t.n_points;
          jm["trend"] = jt;
        } else {
          jm["trend"] = nullptr;
          jm["insufficient_reason"] =
              "only " + std::to_string(points.size()) + " non-empty bin(s)";
        }
        std::sort(excluded_parametric.begin(), excluded_parametric.end());
        std::sort(excluded_no_similarity.begin(), excluded_no_similarity.end());
        std::sort(excluded_failed.begin(), excluded_failed.end());
        jm["excluded_parametric"] = excluded_parametric;
        jm["excluded_no_similarity"] = excluded_no_similarity;
        jm["excluded_failed"] = excluded_failed;
        jm["n_scored"] = joined.size();
        modes[prompt_mode_name(mode)] = jm;
      }
      out["modes"] = modes;
      write_file_atomic(paths.analysis(d.id, llm_id), out.dump(2) + "\n");
      outputs.push_back(paths.analysis(d.id, llm_id));
    }
  }
  return outputs;
}

std::vector<std::string> stage_report(const RunConfig& cfg, const Paths& paths) {
  ReportInputs inputs;
  inputs.config_digest = cfg.digest();
  for (const auto& d : cfg.datasets) inputs.input_digests[d.path] = sha256_file_hex(d.path);
  for (const auto& r : cfg.revisions) inputs.input_digests[r.path] = sha256_file_hex(r.path);
  for (const auto& c : cfg.corpora) inputs.input_digests[c.path] = sha256_file_hex(c.path);

  for (const auto& d : cfg.datasets) {
    for (const auto& llm_cfg : cfg.llms) {
      const std::string llm_id = llm_cfg.endpoint.llm_id;
      json a = json::parse(read_file(paths.analysis(d.id, llm_id)));
      FilterRateRow row;
      row.dataset = dataset_id_name(d.id);
      row.llm = llm_id;
      row.instances_probed = a["filter"]["instances_probed"].get<uint64_t>();
      row.instances_filtered = a["filter"]["instances_filtered"].get<uint64_t>();
      row.filtered_percent = a["filter"]["filtered_percent"].get<double>();
      inputs.filter_rates.push_back(row);
      for (auto it = a["modes"].begin(); it != a["modes"].end(); ++it) {
        GroupResult group;
        for (const auto& jb : it.value()["bins"]) {
          BinSummary b;
          b.bin_index = jb["bin_index"].get<int>();
          b.bin_lo = jb["bin_lo"].get<double>();
          b.bin_hi = jb["bin_hi"].get<double>();
          b.n = jb["n"].get<uint64_t>();
          b.k = jb["k"].get<uint64_t>();
          if (jb.contains("accuracy_percent")) {
            b.accuracy_percent = jb["accuracy_percent"].get<double>();
          }
          b.wilson_low = jb["wilson_low"].get<double>();
          b.wilson_high = jb["wilson_high"].get<double>();
          b.low_support = jb["low_support"].get<bool>();
          group.bins.push_back(b);
        }
        if (!it.value()["trend"].is_null()) {
          TrendSummary t;
          t.slope = it.value()["trend"]["slope"].get<double>();
          t.intercept = it.value()["trend"]["intercept"].get<double>();
          if (!it.value()["trend"]["pearson_r"].is_null()) {
            t.pearson_r = it.value()["trend"]["pearson_r"].get<double>();
          }
          t.n_points = it.value()["trend"]["n_points"].get<int>();
          group.trend = t;
        } else {
          group.insufficient_reason = it.value().value("insufficient_reason", "");
        }
        inputs.groups[{std::string(dataset_id_name(d.id)), llm_id, it.key()}] =
            std::move(group);
      }
    }
  }
  json leakage = json::object();
  for (const auto& tag : needed_corpus_tags(cfg)) {
    leakage[tag] = json::parse(read_file(paths.leakage(tag)));
  }
  inputs.leakage_json = leakage.dump(2) + "\n";
  emit_report(inputs, paths.report_dir());

  std::vector<std::string> outputs;
  for (const auto& entry : fs::recursive_directory_iterator(paths.report_dir())) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == ".manifest.json") continue;  // the stage's own manifest
    outputs.push_back(entry.path().string());
  }
  std::sort(outputs.begin(), outputs.end());
  return outputs;
}

}  // namespace

StageOutcome run_stage(Stage stage, const RunConfig& cfg, const ClientFactory& clients,
                       bool force) {
  Paths paths(cfg);
  fs::create_directories(paths.stage_dir(stage));
  std::vector<std::string> inputs = stage_inputs(stage, cfg, paths);
  if (!force && can_skip(stage, cfg, paths, inputs)) return StageOutcome::SKIPPED;
  check_upstream(stage, paths, inputs);

  std::vector<std::string> outputs;
  switch (stage) {
    case Stage::INGEST: outputs = stage_ingest(cfg, paths); break;
    case Stage::EVOLVE: outputs = stage_evolve(cfg, paths); break;
    case Stage::SIMILARITY: outputs = stage_similarity(cfg, paths, clients); break;
    case Stage::VERBATIM: outputs = stage_verbatim(cfg, paths); break;
    case Stage::INFER: outputs = stage_infer(cfg, paths, clients); break;
    case Stage::SCORE: outputs = stage_score(cfg, paths, clients); break;
    case Stage::ANALYZE: outputs = stage_analyze(cfg, paths); break;
    case Stage::REPORT: outputs = stage_report(cfg, paths); break;
  }
  std::sort(outputs.begin(), outputs.end());
  write_manifest(stage, cfg, paths, inputs, outputs);
  return StageOutcome::RAN;
}

RunSummary run_all(const RunConfig& cfg, const ClientFactory& clients, bool force) {
  RunSummary summary;
  for (Stage s : all_stages()) {
    summary.stages.emplace_back(s, run_stage(s, cfg, clients, force));
  }
  return summary;
}

RunLock::RunLock(const std::string& out_dir) {
  fs::create_directories(out_dir);
  path_ = (fs::path(out_dir) / ".lock").string();
  int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    raise(ErrorKind::Io,
          "output directory is locked by another run (" + path_ + " exists)");
  }
  std::string pid = std::to_string(::getpid()) + "\n";
  ssize_t written = ::write(fd, pid.data(), pid.size());
  (void)written;
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace drift
