#include "doctest.h"

#include <string>
#include <vector>

#include "drift/text.hpp"
#include "drift/util.hpp"
#include "test_util.hpp"

using namespace drift;

namespace {

std::vector<std::string> split_cases(const std::string& content) {
  std::vector<std::string> cases;
  size_t start = 0;
  const std::string sep = "\n===\n";
  size_t pos;
  while ((pos = content.find(sep, start)) != std::string::npos) {
    cases.push_back(content.substr(start, pos - start));
    start = pos + sep.size();
  }
  cases.push_back(content.substr(start));
  return cases;
}

// Deterministic messy-string generator for the idempotence property.
std::string random_messy(SplitMix64& rng) {
  static const char* kPieces[] = {"a",  "B",  "3",  " ",    " ",    "\t", "\r\n", "\n",
                                  ".",  ",",  "!",  "\x01", "\x07", "é",  "e\xcc\x81",  // e + U+0301
                                  "ß",  "字", "  ", "word", "\x7f"};
  std::string s;
  size_t len = rng.next_below(60);
  for (size_t i = 0; i < len; i++) s += kPieces[rng.next_below(20)];
  return s;
}

}  // namespace

TEST_CASE("normalize_text basics") {
  CHECK(normalize_text("A  B") == "A B");
  CHECK(normalize_text("") == "");
  CHECK(normalize_text("a\r\nb") == "a\nb");
  CHECK(normalize_text("  x  ") == "x");
  CHECK(normalize_text("a\t\tb") == "a b");
}

TEST_CASE("normalize_text golden fixture") {
  auto inputs = split_cases(read_file(drift_test::fixture_path("norm_cases.txt")));
  auto goldens = split_cases(read_file(drift_test::fixture_path("norm_cases_golden.txt")));
  REQUIRE(inputs.size() == 20);
  REQUIRE(goldens.size() == inputs.size());
  for (size_t i = 0; i < inputs.size(); i++) {
    CAPTURE(i);
    CHECK(normalize_text(inputs[i]) == goldens[i]);
  }
}

TEST_CASE("normalize_text is idempotent on random strings") {
  SplitMix64 rng(20250808);
  for (int trial = 0; trial < 500; trial++) {
    std::string s = random_messy(rng);
    std::string once = normalize_text(s);
    CHECK(normalize_text(once) == once);
  }
}

TEST_CASE("segment_paragraphs basics") {
  CHECK(segment_paragraphs("").empty());
  auto segs = segment_paragraphs("A\n\nB");
  REQUIRE(segs.size() == 2);
  CHECK(segs[0] == "A");
  CHECK(segs[1] == "B");
  CHECK(segment_paragraphs("\n\n\n").empty());
}

TEST_CASE("segment_paragraphs fixture hand-count") {
  std::string article = normalize_text(read_file(drift_test::fixture_path("article_fixture.txt")));
  auto paragraphs = segment_paragraphs(article);
  CHECK(paragraphs.size() == 7);
  CHECK(paragraphs[0].rfind("Coastal Erosion\n", 0) == 0);
  CHECK(paragraphs[5].find("- dune restoration") != std::string::npos);
}

TEST_CASE("segment/join fixed point, no empty paragraphs") {
  SplitMix64 rng(42);
  for (int trial = 0; trial < 200; trial++) {
    std::string s = normalize_text(random_messy(rng));
    auto paragraphs = segment_paragraphs(s);
    for (const auto& p : paragraphs) CHECK(!p.empty());
    std::string joined = join_paragraphs(paragraphs);
    auto again = segment_paragraphs(joined);
    CHECK(again == paragraphs);
  }
}

TEST_CASE("ascii fold and word matching") {
  CHECK(ascii_fold("TrUe") == "true");
  CHECK(contains_word_ci("it is TRUE indeed", "true"));
  CHECK(!contains_word_ci("untrue claim", "true"));
  CHECK(contains_word_ci("FALSE.", "false"));
  CHECK(!contains_word_ci("falsehood", "false"));
  CHECK(contains_word_ci("true", "TRUE"));
}

TEST_CASE("utf8 helpers") {
  CHECK(utf8_scalar_count("abc") == 3);
  CHECK(utf8_scalar_count("caf\xc3\xa9") == 4);
  CHECK(utf8_valid("caf\xc3\xa9"));
  CHECK(!utf8_valid("\xc3"));
  CHECK(!utf8_valid("\xff"));
  auto decoded = utf8_decode("a\xc3\xa9");
  REQUIRE(decoded.size() == 2);
  CHECK(decoded[0] == 'a');
  CHECK(decoded[1] == 0xe9);
}

TEST_CASE("whitespace tokens") {
  auto tokens = whitespace_tokens(" a  b\nc\td ");
  REQUIRE(tokens.size() == 4);
  CHECK(tokens[0] == "a");
  CHECK(tokens[3] == "d");
}
