#include "doctest.h"

#include <set>

#include "drift/errors.hpp"
#include "drift/llm_client.hpp"
#include "drift/prompts.hpp"
#include "drift/scoring.hpp"
#include "drift/text.hpp"
#include "drift/util.hpp"
#include "mock_endpoints.hpp"
#include "test_util.hpp"

using namespace drift;
using namespace drift_test;

namespace {

QAInstance make_instance(TaskKind kind, const std::string& question) {
  QAInstance q;
  q.instance_id = "i1";
  q.question = question;
  q.titles = {"T"};
  q.gold_answers = {"x"};
  switch (kind) {
    case TaskKind::EXTRACTIVE: q.dataset_id = DatasetId::SQUAD11; break;
    case TaskKind::YESNO: q.dataset_id = DatasetId::BOOLQ; q.gold_answers = {"TRUE"}; break;
    case TaskKind::FREEFORM: q.dataset_id = DatasetId::WIKIWHY; break;
    case TaskKind::MULTIHOP: q.dataset_id = DatasetId::HOTPOTQA; break;
  }
  q.task_kind = kind;
  return q;
}

const std::string kPassage = "The quick brown fox jumps over the lazy dog.";

}  // namespace

TEST_CASE("prompt golden files byte-match") {
  struct Case {
    TaskKind kind;
    PromptMode mode;
    std::string question;
    const char* golden;
  };
  std::vector<Case> cases = {
      {TaskKind::EXTRACTIVE, PromptMode::WITH_CONTEXT, "What jumps over the dog?",
       "prompt_extractive_with_context.txt"},
      {TaskKind::EXTRACTIVE, PromptMode::QUESTION_ONLY, "What jumps over the dog?",
       "prompt_extractive_question_only.txt"},
      {TaskKind::YESNO, PromptMode::WITH_CONTEXT, "Does the fox jump?",
       "prompt_boolq_with_context.txt"},
      {TaskKind::YESNO, PromptMode::QUESTION_ONLY, "Does the fox jump?",
       "prompt_boolq_question_only.txt"},
      {TaskKind::FREEFORM, PromptMode::WITH_CONTEXT, "Why does the fox jump?",
       "prompt_freeform_with_context.txt"},
      {TaskKind::FREEFORM, PromptMode::QUESTION_ONLY, "Why does the fox jump?",
       "prompt_freeform_question_only.txt"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.golden);
    QAInstance q = make_instance(c.kind, c.question);
    std::optional<std::string> passage;
    if (c.mode != PromptMode::QUESTION_ONLY) passage = kPassage;
    PromptSpec spec = build_prompt(q, passage, c.mode);
    CHECK(spec.rendered == read_file(golden_path(c.golden)));
  }
}

TEST_CASE("templates carry the required literals") {
  for (TaskKind kind : {TaskKind::EXTRACTIVE, TaskKind::YESNO, TaskKind::FREEFORM,
                        TaskKind::MULTIHOP}) {
    const std::string& ctx = prompt_template(kind, PromptMode::WITH_CONTEXT);
    CHECK(ctx.find("delimited by triple quotes") != std::string::npos);
    CHECK(ctx.find("{passage}") != std::string::npos);
    CHECK(ctx.find("{question}") != std::string::npos);
    const std::string& parametric = prompt_template(kind, PromptMode::QUESTION_ONLY);
    CHECK(parametric.find("{passage}") == std::string::npos);
  }
  CHECK(prompt_template(TaskKind::YESNO, PromptMode::WITH_CONTEXT)
            .find("Return only TRUE or FALSE") != std::string::npos);
  CHECK(prompt_template(TaskKind::YESNO, PromptMode::QUESTION_ONLY)
            .find("Return only TRUE or FALSE") != std::string::npos);
  // MULTIHOP shares the free-form family
  CHECK(prompt_template(TaskKind::MULTIHOP, PromptMode::WITH_CONTEXT) ==
        prompt_template(TaskKind::FREEFORM, PromptMode::WITH_CONTEXT));
}

TEST_CASE("build_prompt preconditions and CoT") {
  QAInstance q = make_instance(TaskKind::EXTRACTIVE, "What?");
  CHECK_THROWS_AS(build_prompt(q, std::nullopt, PromptMode::WITH_CONTEXT), Error);
  CHECK_THROWS_AS(build_prompt(q, std::string(""), PromptMode::WITH_CONTEXT), Error);
  CHECK_THROWS_AS(build_prompt(q, kPassage, PromptMode::QUESTION_ONLY), Error);
  PromptSpec cot = build_prompt(q, kPassage, PromptMode::WITH_CONTEXT_COT);
  PromptSpec plain = build_prompt(q, kPassage, PromptMode::WITH_CONTEXT);
  CHECK(cot.rendered == plain.rendered + "\n" + kCotSuffix);
  CHECK(cot.template_id == "extractive.with_context_cot");
  // slot-like text inside a passage is inert
  PromptSpec tricky = build_prompt(q, std::string("passage with {question} inside"),
                                   PromptMode::WITH_CONTEXT);
  CHECK(tricky.rendered.find("passage with {question} inside") != std::string::npos);
  CHECK(tricky.rendered.find("Question: What?") != std::string::npos);
  // passage present iff mode != QUESTION_ONLY
  CHECK(plain.rendered.find(kPassage) != std::string::npos);
  PromptSpec probe = build_prompt(q, std::nullopt, PromptMode::QUESTION_ONLY);
  CHECK(probe.rendered.find(kPassage) == std::string::npos);
}

TEST_CASE("assemble_context") {
  QAInstance q;
  q.instance_id = "h1";
  q.dataset_id = DatasetId::HOTPOTQA;
  q.task_kind = TaskKind::MULTIHOP;
  q.question = "?";
  q.gold_answers = {"g"};
  q.titles = {"G1", "D1", "G2", "D2"};
  q.gold_titles = {"G1", "G2"};
  q.original_paragraphs["G1"] = {"gold one paragraph"};
  q.original_paragraphs["G2"] = {"gold two paragraph"};
  q.original_paragraphs["D1"] = {"distractor one"};
  q.original_paragraphs["D2"] = {"distractor two"};

  EditedVariant e1;
  e1.title = "G1";
  e1.original_paragraph = "gold one paragraph";
  e1.edited_paragraph = "gold one paragraph, edited";

  SUBCASE("empty edit list reproduces the original") {
    std::string context = assemble_context(q, {});
    CHECK(context ==
          "G1\ngold one paragraph\n\nD1\ndistractor one\n\nG2\ngold two paragraph\n\nD2\n"
          "distractor two");
  }
  SUBCASE("one gold edited differs in exactly one paragraph") {
    std::string original = assemble_context(q, {});
    std::string edited = assemble_context(q, {e1});
    CHECK(edited.find("gold one paragraph, edited") != std::string::npos);
    CHECK(edited.find("distractor one") != std::string::npos);
    // split both into lines and count differing lines
    auto count_diff = [](const std::string& a, const std::string& b) {
      std::vector<std::string> la, lb;
      size_t pos = 0;
      for (const std::string* s : {&a, &b}) {
        std::vector<std::string>& target = s == &a ? la : lb;
        pos = 0;
        size_t eol;
        while ((eol = s->find('\n', pos)) != std::string::npos) {
          target.push_back(s->substr(pos, eol - pos));
          pos = eol + 1;
        }
        target.push_back(s->substr(pos));
      }
      size_t diff = 0;
      for (size_t i = 0; i < std::max(la.size(), lb.size()); i++) {
        if (i >= la.size() || i >= lb.size() || la[i] != lb[i]) diff++;
      }
      return diff;
    };
    CHECK(count_diff(original, edited) == 1);
  }
  SUBCASE("both golds edited differ in exactly two paragraphs") {
    EditedVariant e2;
    e2.title = "G2";
    e2.original_paragraph = "gold two paragraph";
    e2.edited_paragraph = "gold two paragraph, also edited";
    std::string edited = assemble_context(q, {e1, e2});
    CHECK(edited.find("gold one paragraph, edited") != std::string::npos);
    CHECK(edited.find("gold two paragraph, also edited") != std::string::npos);
  }
  SUBCASE("non-gold title rejected") {
    EditedVariant bad;
    bad.title = "D1";
    bad.original_paragraph = "distractor one";
    bad.edited_paragraph = "tampered";
    CHECK_THROWS_AS(assemble_context(q, {bad}), Error);
  }
  SUBCASE("unknown original paragraph rejected") {
    EditedVariant bad;
    bad.title = "G1";
    bad.original_paragraph = "never existed";
    bad.edited_paragraph = "tampered";
    CHECK_THROWS_AS(assemble_context(q, {bad}), Error);
  }
}

TEST_CASE("inclusion match") {
  CHECK(score_inclusion_match("Paris is the capital", {"Paris"}) == 1);
  CHECK(score_inclusion_match("Paris", {"Paris"}) == 1);
  CHECK(score_inclusion_match("pArIs, obviously", {"Paris"}) == 1);  // case-folded
  CHECK(score_inclusion_match("Lyon", {"Paris"}) == 0);
  CHECK(score_inclusion_match("The answer is  Paris  here", {"Paris"}) == 1);  // normalized
  CHECK(score_inclusion_match("nothing", {"Paris", "Lyon"}) == 0);
  CHECK(score_inclusion_match("maybe Lyon", {"Paris", "Lyon"}) == 1);

  SUBCASE("yesno requires the opposite label absent") {
    CHECK(score_inclusion_match("TRUE", {"TRUE"}, TaskKind::YESNO) == 1);
    CHECK(score_inclusion_match("true.", {"TRUE"}, TaskKind::YESNO) == 1);
    CHECK(score_inclusion_match("FALSE", {"TRUE"}, TaskKind::YESNO) == 0);
    CHECK(score_inclusion_match("true, though some say false", {"TRUE"}, TaskKind::YESNO) == 0);
    CHECK(score_inclusion_match("untrue", {"TRUE"}, TaskKind::YESNO) == 0);  // word match
    CHECK(score_inclusion_match("it is false", {"FALSE"}, TaskKind::YESNO) == 1);
    CHECK(score_inclusion_match("unanswerable", {"TRUE"}, TaskKind::YESNO) == 0);
  }
  SUBCASE("IM monotonicity: appending never breaks an extractive match") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 200; trial++) {
      std::string gold = "tok" + std::to_string(rng.next_below(50));
      std::string out = "prefix " + gold + " suffix";
      REQUIRE(score_inclusion_match(out, {gold}) == 1);
      std::string appended = out + " and more words " + std::to_string(rng.next());
      CHECK(score_inclusion_match(appended, {gold}) == 1);
    }
  }
}

TEST_CASE("semantic scoring strictly above threshold") {
  FunctionEmbedder embedder("m", [](const std::string& text) -> std::vector<double> {
    if (text.find("exact60") != std::string::npos) return {0.6, 0.8};
    if (text.find("close") != std::string::npos) return {0.9, std::sqrt(1 - 0.81)};
    return {1.0, 0.0};
  });
  SUBCASE("identical texts score 1") {
    auto s = score_semantic("the gold answer", "the gold answer", embedder);
    CHECK(s.similarity == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.correct == 1);
  }
  SUBCASE("similarity exactly at the threshold is incorrect") {
    // gold -> (1,0); output -> (0.6, 0.8); cosine = 0.6 exactly
    auto s = score_semantic("exact60 output", "plain gold", embedder);
    CHECK(s.similarity == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(s.correct == 0);
  }
  SUBCASE("above threshold is correct") {
    auto s = score_semantic("close output", "plain gold", embedder);
    CHECK(s.correct == 1);
  }
  SUBCASE("multi-gold takes the max") {
    auto s = score_semantic_multi("close output", {"exact60 gold", "plain gold"}, embedder);
    CHECK(s.similarity == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(s.correct == 1);
  }
}

TEST_CASE("cot answer span") {
  CHECK(cot_answer_span("no marker here") == "no marker here");
  CHECK(cot_answer_span("Step 1.\nStep 2.\nAnswer: Paris") == "Paris");
  CHECK(cot_answer_span("Answer: draft\nmore\nAnswer: final") == "final");
}

TEST_CASE("parametric filter") {
  auto probe = [](const std::string& instance, int correct) {
    PredictionRecord p;
    p.instance_id = instance;
    p.llm_id = "llm1";
    p.mode = PromptMode::QUESTION_ONLY;
    p.correct = correct;
    return p;
  };
  std::vector<std::string> instances = {"a", "b", "c", "d", "e"};
  SUBCASE("2 of 5 filtered -> 40%") {
    std::vector<PredictionRecord> records = {probe("a", 1), probe("b", 0), probe("c", 1),
                                             probe("d", 0), probe("e", 0)};
    auto result = parametric_filter(records, instances, "llm1");
    CHECK(result.instances_probed == 5);
    CHECK(result.instances_filtered == 2);
    CHECK(result.filtered_percent == doctest::Approx(40.0));
    CHECK(result.excluded_instance_ids == std::set<std::string>{"a", "c"});
  }
  SUBCASE("none filtered -> 0%") {
    std::vector<PredictionRecord> records = {probe("a", 0), probe("b", 0), probe("c", 0),
                                             probe("d", 0), probe("e", 0)};
    auto result = parametric_filter(records, instances, "llm1");
    CHECK(result.filtered_percent == doctest::Approx(0.0));
    CHECK(result.excluded_instance_ids.empty());
  }
  SUBCASE("missing probe raises") {
    std::vector<PredictionRecord> records = {probe("a", 0)};
    CHECK_THROWS_AS(parametric_filter(records, instances, "llm1"), Error);
  }
  SUBCASE("mock knowledge list equals the filter set") {
    std::set<std::string> knows = {"b", "e"};
    std::vector<PredictionRecord> records;
    for (const auto& id : instances) records.push_back(probe(id, knows.count(id) ? 1 : 0));
    auto result = parametric_filter(records, instances, "llm1");
    CHECK(result.excluded_instance_ids == knows);
  }
}

TEST_CASE("http llm client: retry schedule and cache") {
  int calls_expected = 0;
  MockChatServer server([](const std::string& prompt) { return "echo:" + prompt_question(prompt); },
                        /*fail_first=*/2);
  LlmEndpointConfig endpoint;
  endpoint.llm_id = "test-llm";
  endpoint.base_url = server.base_url();
  endpoint.model = "test-model";
  endpoint.retries = 3;
  endpoint.backoff_initial_s = 0.01;
  auto http = make_http_llm_client(endpoint);

  SUBCASE("fails twice then succeeds; retry count reported") {
    auto result = http->complete("Question: ping", DecodingParams{});
    CHECK(result.text == "echo:ping");
    CHECK(result.retries_used == 2);
    calls_expected = 3;
    CHECK(server.requests() == uint64_t(calls_expected));
  }
  SUBCASE("cache: repeated identical call, zero new network traffic") {
    drift_test::TempDir tmp("llm_cache");
    // server fails twice before the first success; caching hides later calls
    std::shared_ptr<LlmClient> shared(std::move(http));
    auto cached = make_caching_llm_client(shared, tmp.path());
    auto first = cached->complete("Question: pong", DecodingParams{});
    uint64_t after_first = server.requests();
    auto second = cached->complete("Question: pong", DecodingParams{});
    CHECK(second.text == first.text);
    CHECK(second.from_cache);
    CHECK(server.requests() == after_first);
  }
}

TEST_CASE("http llm client exhausts retries") {
  MockChatServer server([](const std::string&) { return "never"; }, /*fail_first=*/100);
  LlmEndpointConfig endpoint;
  endpoint.llm_id = "test-llm";
  endpoint.base_url = server.base_url();
  endpoint.model = "m";
  endpoint.retries = 1;
  endpoint.backoff_initial_s = 0.01;
  auto http = make_http_llm_client(endpoint);
  try {
    http->complete("Question: x", DecodingParams{});
    FAIL("expected EndpointError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Endpoint);
  }
  CHECK(server.requests() == 2);  // initial + 1 retry
}
