#include "drift/config.hpp"

#include <cctype>
#include <filesystem>

#include "json.hpp"

#include "drift/errors.hpp"
#include "drift/sha256.hpp"
#include "drift/util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace drift {

namespace {

// Minimal TOML subset: [section], [[array-of-tables]], key = value where a
// value is a "string", integer, float, boolean, or inline array of strings.
struct TomlValue {
  enum class Kind { STRING, NUMBER, BOOLEAN, ARRAY } kind = Kind::STRING;
  std::string str;
  double number = 0.0;
  bool boolean = false;
  std::vector<std::string> array;
};

using TomlTable = std::map<std::string, TomlValue>;

struct TomlDoc {
  TomlTable root;
  std::map<std::string, TomlTable> tables;
  std::map<std::string, std::vector<TomlTable>> arrays;
};

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(uint8_t(s[b]))) b++;
  while (e > b && std::isspace(uint8_t(s[e - 1]))) e--;
  return std::string(s.substr(b, e - b));
}

std::string parse_quoted(const std::string& s, size_t line_no) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') {
    raise(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected quoted string");
  }
  std::string out;
  for (size_t i = 1; i + 1 < s.size(); i++) {
    if (s[i] == '\\' && i + 2 < s.size()) {
      i++;
      switch (s[i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: out += s[i];
      }
    } else {
      out += s[i];
    }
  }
  return out;
}

TomlValue parse_value(const std::string& raw, size_t line_no) {
  TomlValue v;
  if (raw.empty()) raise(ErrorKind::Config, "line " + std::to_string(line_no) + ": empty value");
  if (raw.front() == '"') {
    v.kind = TomlValue::Kind::STRING;
    v.str = parse_quoted(raw, line_no);
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') {
      raise(ErrorKind::Config, "line " + std::to_string(line_no) + ": unterminated array");
    }
    v.kind = TomlValue::Kind::ARRAY;
    std::string inner = raw.substr(1, raw.size() - 2);
    size_t start = 0;
    bool in_string = false;
    for (size_t i = 0; i <= inner.size(); i++) {
      if (i < inner.size() && inner[i] == '"') in_string = !in_string;
      if (i == inner.size() || (inner[i] == ',' && !in_string)) {
        std::string item = trim(inner.substr(start, i - start));
        if (!item.empty()) {
          v.array.push_back(item.front() == '"' ? parse_quoted(item, line_no) : item);
        }
        start = i + 1;
      }
    }
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = TomlValue::Kind::BOOLEAN;
    v.boolean = raw == "true";
    return v;
  }
  try {
    size_t used = 0;
    v.number = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing");
    v.kind = TomlValue::Kind::NUMBER;
    return v;
  } catch (...) {
    raise(ErrorKind::Config,
          "line " + std::to_string(line_no) + ": cannot parse value '" + raw + "'");
  }
}

TomlDoc parse_toml(const std::string& path) {
  TomlDoc doc;
  TomlTable* current = &doc.root;
  size_t line_no = 0;
  for (const auto& raw_line : read_lines(path)) {
    line_no++;
    std::string line = raw_line;
    bool in_string = false;
    for (size_t i = 0; i < line.size(); i++) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("[[", 0) == 0) {
      if (line.size() < 5 || line.substr(line.size() - 2) != "]]") {
        raise(ErrorKind::Config, "line " + std::to_string(line_no) + ": bad table array header");
      }
      std::string name = trim(line.substr(2, line.size() - 4));
      doc.arrays[name].emplace_back();
      current = &doc.arrays[name].back();
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        raise(ErrorKind::Config, "line " + std::to_string(line_no) + ": bad table header");
      }
      std::string name = trim(line.substr(1, line.size() - 2));
      current = &doc.tables[name];
      continue;
    }
    size_t eq = std::string::npos;
    in_string = false;
    for (size_t i = 0; i < line.size(); i++) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '=' && !in_string) {
        eq = i;
        break;
      }
    }
    if (eq == std::string::npos) {
      raise(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      raise(ErrorKind::Config, "line " + std::to_string(line_no) + ": empty key");
    }
    (*current)[key] = parse_value(value, line_no);
  }
  return doc;
}

class Validator {
 public:
  explicit Validator(std::string prefix) : prefix_(std::move(prefix)) {}

  void error(const std::string& key, const std::string& message) {
    errors_.push_back(prefix_ + key + ": " + message);
  }

  std::string str(const TomlTable& t, const std::string& key, const std::string& fallback,
                  bool required = false) {
    auto it = t.find(key);
    if (it == t.end()) {
      if (required) error(key, "missing required key");
      return fallback;
    }
    if (it->second.kind != TomlValue::Kind::STRING) {
      error(key, "must be a string");
      return fallback;
    }
    return it->second.str;
  }

  double number(const TomlTable& t, const std::string& key, double fallback) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::NUMBER) {
      error(key, "must be a number");
      return fallback;
    }
    return it->second.number;
  }

  bool boolean(const TomlTable& t, const std::string& key, bool fallback) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::BOOLEAN) {
      error(key, "must be true or false");
      return fallback;
    }
    return it->second.boolean;
  }

  std::vector<std::string> array(const TomlTable& t, const std::string& key,
                                 std::vector<std::string> fallback) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::ARRAY) {
      error(key, "must be an array");
      return fallback;
    }
    return it->second.array;
  }

  const std::vector<std::string>& errors() const { return errors_; }
  std::vector<std::string> take_errors() { return std::move(errors_); }

 private:
  std::string prefix_;
  std::vector<std::string> errors_;
};

}  // namespace

RunConfig validate_config(const std::string& path) {
  if (!fs::exists(path)) {
    raise(ErrorKind::Config, "config file does not exist: " + path);
  }
  TomlDoc doc = parse_toml(path);
  RunConfig cfg;
  cfg.config_path = path;
  std::vector<std::string> errors;

  {
    Validator v("");
    cfg.out_dir = v.str(doc.root, "out_dir", "", true);
    cfg.seed = uint64_t(v.number(doc.root, "seed", 0));
    cfg.z = v.number(doc.root, "z", 1.96);
    cfg.semantic_threshold = v.number(doc.root, "semantic_threshold", 0.6);
    cfg.min_bin_n = uint64_t(v.number(doc.root, "min_bin_n", 10));
    cfg.descend_floor = v.number(doc.root, "descend_floor", 0.5);
    cfg.weighted_trend = v.boolean(doc.root, "weighted_trend", false);
    cfg.endpoint_failure_budget = int(v.number(doc.root, "endpoint_failure_budget", 0));
    cfg.chunk_tokens = size_t(v.number(doc.root, "chunk_tokens", 256));
    cfg.chunk_stride = size_t(v.number(doc.root, "chunk_stride", 128));
    cfg.max_index_bytes = uint64_t(v.number(doc.root, "max_index_bytes", double(1ull << 31)));
    cfg.bins = int(v.number(doc.root, "bins", 10));
    std::string apc = v.str(doc.root, "apc_mode", "any");
    if (apc == "any") {
      cfg.apc_mode = ApcMode::ANY;
    } else if (apc == "all") {
      cfg.apc_mode = ApcMode::ALL;
    } else {
      v.error("apc_mode", "must be any|all");
    }
    std::string red = v.str(doc.root, "multihop_reduction", "mean");
    if (red == "mean") {
      cfg.multihop_reduction = MultihopReduction::MEAN;
    } else if (red == "min") {
      cfg.multihop_reduction = MultihopReduction::MIN;
    } else if (red == "max") {
      cfg.multihop_reduction = MultihopReduction::MAX;
    } else {
      v.error("multihop_reduction", "must be mean|min|max");
    }
    auto modes = v.array(doc.root, "modes", {"with_context", "question_only"});
    cfg.modes.clear();
    for (const auto& m : modes) {
      if (m == "with_context") {
        cfg.modes.push_back(PromptMode::WITH_CONTEXT);
      } else if (m == "question_only") {
        cfg.modes.push_back(PromptMode::QUESTION_ONLY);
      } else if (m == "with_context_cot") {
        cfg.modes.push_back(PromptMode::WITH_CONTEXT_COT);
      } else {
        v.error("modes", "unknown mode '" + m + "'");
      }
    }
    if (cfg.out_dir.empty()) v.error("out_dir", "must not be empty");
    if (cfg.bins != 10) v.error("bins", "fixed at 10");
    if (!(cfg.z > 0.0)) v.error("z", "must be > 0");
    if (!(cfg.semantic_threshold > 0.0 && cfg.semantic_threshold < 1.0)) {
      v.error("semantic_threshold", "must be in (0,1)");
    }
    if (!(cfg.descend_floor > 0.0 && cfg.descend_floor < 1.0)) {
      v.error("descend_floor", "must be in (0,1)");
    }
    if (cfg.chunk_tokens == 0) v.error("chunk_tokens", "must be >= 1");
    if (cfg.chunk_stride == 0) v.error("chunk_stride", "must be >= 1");
    if (cfg.chunk_stride > cfg.chunk_tokens) {
      v.error("chunk_stride", "must not exceed chunk_tokens (windows would skip text)");
    }
    bool has_ctx = false;
    for (auto m : cfg.modes) has_ctx |= m != PromptMode::QUESTION_ONLY;
    bool has_probe = false;
    for (auto m : cfg.modes) has_probe |= m == PromptMode::QUESTION_ONLY;
    if (!has_ctx) v.error("modes", "needs a with-context mode");
    if (!has_probe) v.error("modes", "needs question_only for the parametric filter");
    for (const auto& e : v.errors()) errors.push_back(e);
  }

  {
    Validator v("embedding.");
    auto it = doc.tables.find("embedding");
    TomlTable empty;
    const TomlTable& t = it == doc.tables.end() ? empty : it->second;
    cfg.embedding.base_url = v.str(t, "base_url", "", true);
    cfg.embedding.path = v.str(t, "path", "/v1/embeddings");
    cfg.embedding.model = v.str(t, "model_id", "", true);
    cfg.embedding.api_key_env = v.str(t, "api_key_env", "EMBED_API_KEY");
    cfg.embedding.batch_size = int(v.number(t, "batch_size", 64));
    cfg.embedding.max_in_flight = int(v.number(t, "max_in_flight", 4));
    cfg.embedding.retries = int(v.number(t, "retries", 3));
    cfg.embedding.backoff_initial_s = v.number(t, "backoff_initial_s", 0.25);
    cfg.embedding.timeout_s = int(v.number(t, "timeout_s", 60));
    if (cfg.embedding.batch_size < 1) v.error("batch_size", "must be >= 1");
    if (cfg.embedding.max_in_flight < 1) v.error("max_in_flight", "must be >= 1");
    for (const auto& e : v.errors()) errors.push_back(e);
  }

  {
    Validator v("decoding.");
    auto it = doc.tables.find("decoding");
    TomlTable empty;
    const TomlTable& t = it == doc.tables.end() ? empty : it->second;
    cfg.decoding.temperature = v.number(t, "temperature", 0.0);
    cfg.decoding.top_p = v.number(t, "top_p", 1.0);
    cfg.decoding.max_tokens = int(v.number(t, "max_tokens", 256));
    cfg.max_tokens_long = int(v.number(t, "max_tokens_long", 512));
    for (const auto& e : v.errors()) errors.push_back(e);
  }

  auto datasets = doc.arrays.find("dataset");
  if (datasets == doc.arrays.end() || datasets->second.empty()) {
    errors.push_back("dataset: at least one [[dataset]] required");
  } else {
    for (size_t i = 0; i < datasets->second.size(); i++) {
      Validator v("dataset[" + std::to_string(i) + "].");
      DatasetConfig d;
      std::string id = v.str(datasets->second[i], "id", "", true);
      if (!id.empty()) {
        try {
          d.id = dataset_id_from_name(id);
        } catch (const Error&) {
          v.error("id", "unknown dataset id '" + id + "'");
        }
      }
      d.path = v.str(datasets->second[i], "path", "", true);
      d.format = v.str(datasets->second[i], "format", "canonical");
      if (d.format != "canonical" && d.format != "native") {
        v.error("format", "must be canonical|native");
      }
      if (!d.path.empty() && !fs::exists(d.path)) v.error("path", "does not exist: " + d.path);
      cfg.datasets.push_back(std::move(d));
      for (const auto& e : v.errors()) errors.push_back(e);
    }
  }

  auto revisions = doc.arrays.find("revisions");
  if (revisions == doc.arrays.end() || revisions->second.empty()) {
    errors.push_back("revisions: at least one [[revisions]] required");
  } else {
    for (size_t i = 0; i < revisions->second.size(); i++) {
      Validator v("revisions[" + std::to_string(i) + "].");
      RevisionsConfig r;
      r.path = v.str(revisions->second[i], "path", "", true);
      if (!r.path.empty() && !fs::exists(r.path)) v.error("path", "does not exist: " + r.path);
      cfg.revisions.push_back(std::move(r));
      for (const auto& e : v.errors()) errors.push_back(e);
    }
  }

  auto corpora = doc.arrays.find("corpus");
  if (corpora == doc.arrays.end() || corpora->second.empty()) {
    errors.push_back("corpus: at least one [[corpus]] required");
  } else {
    for (size_t i = 0; i < corpora->second.size(); i++) {
      Validator v("corpus[" + std::to_string(i) + "].");
      CorpusConfig c;
      c.tag = v.str(corpora->second[i], "tag", "", true);
      c.path = v.str(corpora->second[i], "path", "", true);
      if (!c.path.empty() && !fs::exists(c.path)) v.error("path", "does not exist: " + c.path);
      cfg.corpora.push_back(std::move(c));
      for (const auto& e : v.errors()) errors.push_back(e);
    }
  }

  auto llms = doc.arrays.find("llm");
  if (llms == doc.arrays.end() || llms->second.empty()) {
    errors.push_back("llm: at least one [[llm]] required");
  } else {
    for (size_t i = 0; i < llms->second.size(); i++) {
      Validator v("llm[" + std::to_string(i) + "].");
      LlmRunConfig l;
      l.endpoint.llm_id = v.str(llms->second[i], "id", "", true);
      l.endpoint.base_url = v.str(llms->second[i], "base_url", "", true);
      l.endpoint.path = v.str(llms->second[i], "path", "/v1/chat/completions");
      l.endpoint.model = v.str(llms->second[i], "model", l.endpoint.llm_id);
      l.endpoint.api_key_env = v.str(llms->second[i], "api_key_env", "LLM_API_KEY");
      l.endpoint.retries = int(v.number(llms->second[i], "retries", 3));
      l.endpoint.backoff_initial_s = v.number(llms->second[i], "backoff_initial_s", 0.25);
      l.endpoint.timeout_s = int(v.number(llms->second[i], "timeout_s", 120));
      l.corpus_tag = v.str(llms->second[i], "corpus_tag", "", true);
      bool tag_known = false;
      for (const auto& c : cfg.corpora) tag_known |= c.tag == l.corpus_tag;
      if (!l.corpus_tag.empty() && !tag_known) {
        v.error("corpus_tag", "references unknown corpus tag '" + l.corpus_tag + "'");
      }
      cfg.llms.push_back(std::move(l));
      for (const auto& e : v.errors()) errors.push_back(e);
    }
  }

  if (!errors.empty()) {
    std::string combined = std::to_string(errors.size()) + " config error(s):";
    for (const auto& e : errors) combined += "\n  - " + e;
    raise(ErrorKind::Config, combined);
  }
  return cfg;
}

std::string RunConfig::canonical_json() const {
  json j;
  j["out_dir"] = out_dir;
  j["seed"] = seed;
  j["z"] = z;
  j["semantic_threshold"] = semantic_threshold;
  j["apc_mode"] = apc_mode == ApcMode::ANY ? "any" : "all";
  j["multihop_reduction"] = multihop_reduction_name(multihop_reduction);
  j["bins"] = bins;
  j["min_bin_n"] = min_bin_n;
  j["descend_floor"] = descend_floor;
  j["weighted_trend"] = weighted_trend;
  std::vector<std::string> mode_names;
  for (auto m : modes) mode_names.push_back(prompt_mode_name(m));
  j["modes"] = mode_names;
  j["endpoint_failure_budget"] = endpoint_failure_budget;
  j["chunk_tokens"] = chunk_tokens;
  j["chunk_stride"] = chunk_stride;
  j["max_index_bytes"] = max_index_bytes;
  j["embedding"] = {{"base_url", embedding.base_url}, {"path", embedding.path},
                    {"model_id", embedding.model},    {"api_key_env", embedding.api_key_env},
                    {"batch_size", embedding.batch_size}, {"max_in_flight", embedding.max_in_flight},
                    {"retries", embedding.retries},   {"timeout_s", embedding.timeout_s}};
  j["decoding"] = {{"temperature", decoding.temperature},
                   {"top_p", decoding.top_p},
                   {"max_tokens", decoding.max_tokens},
                   {"max_tokens_long", max_tokens_long}};
  json ds = json::array();
  for (const auto& d : datasets) {
    ds.push_back({{"id", dataset_id_name(d.id)}, {"path", d.path}, {"format", d.format}});
  }
  j["datasets"] = ds;
  json revs = json::array();
  for (const auto& r : revisions) revs.push_back({{"path", r.path}});
  j["revisions"] = revs;
  json cs = json::array();
  for (const auto& c : corpora) cs.push_back({{"tag", c.tag}, {"path", c.path}});
  j["corpora"] = cs;
  json ls = json::array();
  for (const auto& l : llms) {
    ls.push_back({{"id", l.endpoint.llm_id},
                  {"base_url", l.endpoint.base_url},
                  {"path", l.endpoint.path},
                  {"model", l.endpoint.model},
                  {"api_key_env", l.endpoint.api_key_env},
                  {"retries", l.endpoint.retries},
                  {"timeout_s", l.endpoint.timeout_s},
                  {"corpus_tag", l.corpus_tag}});
  }
  j["llms"] = ls;
  return j.dump();
}

std::string RunConfig::digest() const { return sha256_hex(canonical_json()); }

}  // namespace drift
