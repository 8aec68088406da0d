#include "doctest.h"

#include <cmath>
#include <cstring>

#include "drift/errors.hpp"
#include "drift/simdrift.hpp"
#include "mock_endpoints.hpp"
#include "test_util.hpp"

using namespace drift;
using drift_test::FunctionEmbedder;

namespace {

// Interval membership straight from the bin definition, used as the
// independent acceptance rule for the partition property.
bool in_bin(int b, double score) {
  double lo = double(b) / 10.0;
  double hi = double(b + 1) / 10.0;
  if (b == 9) return score >= lo && score <= 1.0;
  return score >= lo && score < hi;
}

}  // namespace

TEST_CASE("assign_bin boundaries and partition") {
  CHECK(assign_bin(0.95) == 9);
  CHECK(assign_bin(0.90) == 9);
  CHECK(assign_bin(1.0) == 9);
  CHECK(assign_bin(0.0) == 0);
  CHECK(assign_bin(0.3) == 3);
  CHECK(assign_bin(0.09999) == 0);
  CHECK_THROWS_AS(assign_bin(-0.01), Error);
  CHECK_THROWS_AS(assign_bin(1.01), Error);
  for (int i = 0; i <= 1000; i++) {
    double score = double(i) / 1000.0;
    int accepted = 0, which = -1;
    for (int b = 0; b < 10; b++) {
      if (in_bin(b, score)) {
        accepted++;
        which = b;
      }
    }
    REQUIRE(accepted == 1);
    REQUIRE(assign_bin(score) == which);
  }
}

TEST_CASE("chunk_text windows") {
  std::string text;
  for (int i = 0; i < 600; i++) text += "tok" + std::to_string(i) + " ";
  auto chunks = chunk_text(text, 256, 128);
  REQUIRE(chunks.size() == 4);  // starts at 0,128,256,384 (ends at 600)
  CHECK(chunks[0].rfind("tok0 ", 0) == 0);
  CHECK(chunks[3].find("tok599") != std::string::npos);
  // short text is a single untouched chunk
  auto single = chunk_text("a b c", 256, 128);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == "a b c");
  CHECK(chunk_text("", 256, 128).empty());
}

namespace {

// Embedding rule keyed by planted score tokens: "score=0.40" etc. give a
// vector whose cosine against the query vector (1,0) is that value.
std::vector<double> score_token_rule(const std::string& text) {
  size_t pos = text.find("score=");
  if (pos == std::string::npos) return {1.0, 0.0};
  double c = std::stod(text.substr(pos + 6));
  return {c, std::sqrt(std::max(0.0, 1.0 - c * c))};
}

}  // namespace

TEST_CASE("max_title_similarity") {
  FunctionEmbedder embedder("mock-model", score_token_rule);
  std::map<std::string, std::vector<CorpusDoc>> corpus;
  corpus["T"] = {{"d1", "T", "doc with score=0.40 inside", "tag"},
                 {"d2", "T", "doc with score=0.70 inside", "tag"}};

  SUBCASE("max over docs, matched id recorded") {
    auto match = max_title_similarity("query text", "T", corpus, embedder);
    REQUIRE(match.has_value());
    CHECK(match->max_similarity == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(match->matched_doc_id == "d2");
  }
  SUBCASE("identical text scores 1") {
    corpus["T"].push_back({"d3", "T", "query text", "tag"});
    auto match = max_title_similarity("query text", "T", corpus, embedder);
    REQUIRE(match.has_value());
    CHECK(match->max_similarity == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(match->matched_doc_id == "d3");
  }
  SUBCASE("absent title yields nullopt") {
    CHECK(!max_title_similarity("q", "Missing", corpus, embedder).has_value());
  }
  SUBCASE("negative cosine clamps to 0 and lands in bin 0") {
    FunctionEmbedder negative("neg", [](const std::string& text) -> std::vector<double> {
      if (text == "anchor") return {1.0, 0.0};
      return {-0.8, 0.6};
    });
    std::map<std::string, std::vector<CorpusDoc>> c2;
    c2["T"] = {{"d1", "T", "negative doc", "tag"}};
    auto match = max_title_similarity("anchor", "T", c2, negative);
    REQUIRE(match.has_value());
    CHECK(match->max_similarity == 0.0);
    CHECK(assign_bin(match->max_similarity) == 0);
  }
  SUBCASE("long docs are chunked; a tail-chunk match still wins") {
    FunctionEmbedder chunked("m", [](const std::string& text) -> std::vector<double> {
      if (text == "query") return {1.0, 0.0};
      size_t pos = text.find("score=");
      if (pos != std::string::npos) {
        double c = std::stod(text.substr(pos + 6));
        return {c, std::sqrt(std::max(0.0, 1.0 - c * c))};
      }
      return {0.0, 1.0};  // filler chunks are orthogonal to the query
    });
    std::string long_doc;
    for (int i = 0; i < 500; i++) long_doc += "filler" + std::to_string(i) + " ";
    long_doc += "score=0.90";  // only reachable through the final window
    std::map<std::string, std::vector<CorpusDoc>> c2;
    c2["T"] = {{"d1", "T", long_doc, "tag"}};
    auto match = max_title_similarity("query", "T", c2, chunked, 256, 128);
    REQUIRE(match.has_value());
    CHECK(match->max_similarity == doctest::Approx(0.9).epsilon(1e-9));
  }
  SUBCASE("max dominance: adding a doc never lowers the max") {
    auto before = max_title_similarity("q", "T", corpus, embedder)->max_similarity;
    corpus["T"].push_back({"d4", "T", "doc with score=0.10 inside", "tag"});
    auto after = max_title_similarity("q", "T", corpus, embedder)->max_similarity;
    CHECK(after >= before);
    corpus["T"].push_back({"d5", "T", "doc with score=0.90 inside", "tag"});
    CHECK(max_title_similarity("q", "T", corpus, embedder)->max_similarity >= after);
  }
}

TEST_CASE("multihop_reduce") {
  CHECK(multihop_reduce({{"A", 0.8}}) == doctest::Approx(0.8));
  CHECK(multihop_reduce({{"A", 0.6}, {"B", 0.8}}, MultihopReduction::MEAN) ==
        doctest::Approx(0.7));
  CHECK(multihop_reduce({{"A", 0.6}, {"B", 0.8}}, MultihopReduction::MIN) ==
        doctest::Approx(0.6));
  CHECK(multihop_reduce({{"A", 0.6}, {"B", 0.8}}, MultihopReduction::MAX) ==
        doctest::Approx(0.8));
  CHECK_THROWS_AS(multihop_reduce({}), Error);
}

TEST_CASE("compute_similarity_record for multihop") {
  FunctionEmbedder embedder("mock-model", score_token_rule);
  std::map<std::string, std::vector<CorpusDoc>> corpus;
  corpus["G1"] = {{"c1", "G1", "doc score=0.60 here", "tag"}};
  corpus["G2"] = {{"c2", "G2", "doc score=0.80 here", "tag"}};

  QAInstance q;
  q.instance_id = "h1";
  q.dataset_id = DatasetId::HOTPOTQA;
  q.task_kind = TaskKind::MULTIHOP;
  q.titles = {"G1", "G2", "D"};
  q.gold_titles = {"G1", "G2"};
  q.question = "?";
  q.gold_answers = {"x"};
  q.original_paragraphs["G1"] = {"gold one text"};
  q.original_paragraphs["G2"] = {"gold two text"};
  q.original_paragraphs["D"] = {"distractor"};

  EditedVariant v;
  v.variant_id = "v1";
  v.instance_id = "h1";
  v.title = "G1";
  v.original_paragraph = "gold one text";
  v.edited_paragraph = "edited gold one";

  SimilarityOptions options;
  options.corpus_tag = "tag";

  SUBCASE("mean over gold titles") {
    auto record = compute_similarity_record(v, q, corpus, embedder, options);
    REQUIRE(record.has_value());
    REQUIRE(record->per_title_scores.size() == 2);
    CHECK(record->per_title_scores["G1"] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(record->per_title_scores["G2"] == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(record->max_similarity == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(record->bin_index == 7);
    CHECK(record->matched_doc_id == "c2");  // highest single per-title score
  }
  SUBCASE("titles without corpus docs are omitted") {
    corpus.erase("G2");
    auto record = compute_similarity_record(v, q, corpus, embedder, options);
    REQUIRE(record.has_value());
    CHECK(record->per_title_scores.size() == 1);
    CHECK(record->max_similarity == doctest::Approx(0.6).epsilon(1e-9));
  }
  SUBCASE("no scorable title at all yields nullopt") {
    corpus.clear();
    CHECK(!compute_similarity_record(v, q, corpus, embedder, options).has_value());
  }
}

TEST_CASE("caching embedder transparency") {
  auto base = std::make_shared<FunctionEmbedder>("mock-model", score_token_rule);
  drift_test::TempDir tmp("embed_cache");
  auto cached = make_caching_embedder(base, tmp.path());

  std::vector<std::string> texts = {"a score=0.30", "b score=0.50", "a score=0.30"};
  auto first = cached->embed(texts);
  uint64_t calls_after_first = cached->endpoint_calls();
  CHECK(calls_after_first > 0);
  auto second = cached->embed(texts);
  CHECK(cached->endpoint_calls() == calls_after_first);  // warm: zero new calls
  REQUIRE(second.size() == first.size());
  for (size_t i = 0; i < first.size(); i++) {
    REQUIRE(second[i].size() == first[i].size());
    for (size_t d = 0; d < first[i].size(); d++) {
      CHECK(std::memcmp(&second[i][d], &first[i][d], sizeof(double)) == 0);  // bitwise
    }
  }
  // A fresh instance over the same disk cache also stays warm.
  auto base2 = std::make_shared<FunctionEmbedder>("mock-model", score_token_rule);
  auto cached2 = make_caching_embedder(base2, tmp.path());
  auto third = cached2->embed(texts);
  CHECK(base2->endpoint_calls() == 0);
  for (size_t i = 0; i < first.size(); i++) {
    for (size_t d = 0; d < first[i].size(); d++) {
      CHECK(std::memcmp(&third[i][d], &first[i][d], sizeof(double)) == 0);
    }
  }
}
