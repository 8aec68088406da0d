#include "doctest.h"

#include <cstdlib>
#include <fstream>

#include "drift/benchmark_load.hpp"
#include "drift/corpus.hpp"
#include "drift/errors.hpp"
#include "drift/revisions.hpp"
#include "drift/util.hpp"
#include "test_util.hpp"

using namespace drift;
using drift_test::TempDir;

namespace {

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("load_benchmark canonical JSONL") {
  TempDir tmp("ingest_bench");
  std::string path = tmp.file("squad.jsonl");
  write(path,
        R"({"instance_id":"q1","dataset_id":"SQUAD11","question":"Who?","titles":["T"],"paragraphs":{"T":["Alice  lives here."]},"gold_titles":[],"gold_answers":["Alice"]})"
        "\n"
        R"({"instance_id":"q2","dataset_id":"SQUAD11","question":"Where?","titles":["T"],"paragraphs":{"T":["Second paragraph."]},"gold_titles":[],"gold_answers":["here"]})"
        "\n"
        R"({"instance_id":"q3","dataset_id":"SQUAD11","question":"What?","titles":["U"],"paragraphs":{"U":["Third."]},"gold_titles":[],"gold_answers":["Third"]})"
        "\n");
  auto instances = load_benchmark(path, DatasetId::SQUAD11);
  REQUIRE(instances.size() == 3);
  CHECK(instances[0].task_kind == TaskKind::EXTRACTIVE);
  CHECK(instances[0].original_paragraphs.at("T")[0] == "Alice lives here.");  // normalized

  SUBCASE("missing field names the field and record") {
    write(tmp.file("bad.jsonl"), R"({"instance_id":"x","dataset_id":"SQUAD11"})" "\n");
    try {
      load_benchmark(tmp.file("bad.jsonl"), DatasetId::SQUAD11);
      FAIL("expected SchemaError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Schema);
      CHECK(std::string(e.what()).find("question") != std::string::npos);
      CHECK(std::string(e.what()).find("record 1") != std::string::npos);
    }
  }
  SUBCASE("boolq bool answer maps to TRUE") {
    write(tmp.file("boolq.jsonl"),
          R"({"instance_id":"b1","dataset_id":"BOOLQ","question":"Is it?","titles":["T"],"paragraphs":{"T":["Yes it is, for reasons long enough to matter."]},"gold_titles":[],"gold_answers":[true]})"
          "\n");
    auto boolq = load_benchmark(tmp.file("boolq.jsonl"), DatasetId::BOOLQ);
    REQUIRE(boolq.size() == 1);
    CHECK(boolq[0].gold_answers == std::vector<std::string>{"TRUE"});
    CHECK(boolq[0].task_kind == TaskKind::YESNO);
  }
  SUBCASE("unknown dataset name") {
    write(tmp.file("weird.jsonl"),
          R"({"instance_id":"w","dataset_id":"NOPE","question":"?","titles":["T"],"paragraphs":{"T":["x"]},"gold_answers":["x"]})"
          "\n");
    CHECK_THROWS_AS(load_benchmark(tmp.file("weird.jsonl"), DatasetId::SQUAD11), Error);
  }
}

TEST_CASE("native adapters") {
  TempDir tmp("ingest_native");
  SUBCASE("squad-style JSON with unanswerable") {
    write(tmp.file("squad.json"), R"({"data":[{"title":"Tree","paragraphs":[
      {"context":"Oaks grow slowly. They live long.","qas":[
        {"id":"s1","question":"What grows slowly?","answers":[{"text":"Oaks"}]},
        {"id":"s2","question":"Unknown?","answers":[],"is_impossible":true}]}]}]})");
    auto instances = adapt_native_benchmark(tmp.file("squad.json"), DatasetId::SQUAD20);
    REQUIRE(instances.size() == 2);
    CHECK(instances[0].gold_answers == std::vector<std::string>{"Oaks"});
    CHECK(instances[1].gold_answers == std::vector<std::string>{"unanswerable"});
    CHECK(instances[1].unanswerable());
  }
  SUBCASE("hotpot supporting facts populate gold titles") {
    write(tmp.file("hotpot.json"), R"([{"_id":"h1","question":"Which?","answer":"blue",
      "context":[["G1",["Gold one text."]],["G2",["Gold two text."]],
                 ["D1",["Noise."]],["D2",["More noise."]],["D3",["N."]],["D4",["N."]],
                 ["D5",["N."]],["D6",["N."]],["D7",["N."]],["D8",["N."]]],
      "supporting_facts":[["G1",0],["G2",0]]}])");
    auto instances = adapt_native_benchmark(tmp.file("hotpot.json"), DatasetId::HOTPOTQA);
    REQUIRE(instances.size() == 1);
    CHECK(instances[0].titles.size() == 10);
    CHECK(instances[0].gold_titles == std::vector<std::string>{"G1", "G2"});
    CHECK(instances[0].task_kind == TaskKind::MULTIHOP);
  }
  SUBCASE("wikiwhy JSON array") {
    write(tmp.file("wikiwhy.json"), R"([{"id":"w1","question":"Why does rain fall?",
      "title":"Rain","passage":"Rain falls because droplets grow heavy inside clouds.",
      "answer":"because droplets grow heavy"}])");
    auto instances = adapt_native_benchmark(tmp.file("wikiwhy.json"), DatasetId::WIKIWHY);
    REQUIRE(instances.size() == 1);
    CHECK(instances[0].task_kind == TaskKind::FREEFORM);
    CHECK(instances[0].gold_answers[0] == "because droplets grow heavy");
  }
  SUBCASE("boolq native jsonl") {
    write(tmp.file("boolq.jsonl"),
          R"({"question":"is water wet","title":"Water","answer":false,"passage":"Liquid water clings to surfaces, which is commonly described as wetness."})"
          "\n");
    auto instances = adapt_native_benchmark(tmp.file("boolq.jsonl"), DatasetId::BOOLQ);
    REQUIRE(instances.size() == 1);
    CHECK(instances[0].gold_answers == std::vector<std::string>{"FALSE"});
  }
}

namespace {

std::string rev_line(const std::string& title, uint64_t rev, const std::string& ts,
                     const std::string& text) {
  RevisionRecord r{title, rev, ts, text};
  return revision_to_json_line(r) + "\n";
}

}  // namespace

TEST_CASE("revision JSONL loading") {
  TempDir tmp("ingest_revs");
  std::string path = tmp.file("revs.jsonl");
  write(path, rev_line("T", 1, "2020-01-01T00:00:00Z", "v1") +
                  rev_line("T", 2, "2020-02-01T00:00:00Z", "v2") +
                  rev_line("T", 3, "2020-03-01T00:00:00Z", "v3") +
                  rev_line("T", 4, "2020-04-01T00:00:00Z", "v4"));
  auto chains = load_revision_history(path);
  REQUIRE(chains.size() == 1);
  REQUIRE(chains["T"].size() == 4);
  for (size_t i = 1; i < 4; i++) CHECK(chains["T"][i].rev_id > chains["T"][i - 1].rev_id);

  SUBCASE("malformed lines counted, not fatal") {
    write(tmp.file("mixed.jsonl"),
          rev_line("T", 1, "2020-01-01T00:00:00Z", "v1") + "{broken\n" +
              rev_line("T", 2, "2020-02-01T00:00:00Z", "v2"));
    size_t revisions = 0;
    auto stats = stream_revision_history(tmp.file("mixed.jsonl"), [&](PageChain&& page) {
      revisions += page.revisions.size();
    });
    CHECK(stats.malformed == 1);
    CHECK(revisions == 2);
  }
  SUBCASE("duplicate rev_id raises OrderingError") {
    write(tmp.file("dup.jsonl"), rev_line("T", 7, "2020-01-01T00:00:00Z", "a") +
                                     rev_line("T", 7, "2020-01-02T00:00:00Z", "b"));
    CHECK_THROWS_AS(load_revision_history(tmp.file("dup.jsonl")), Error);
  }
  SUBCASE("title filter") {
    write(tmp.file("two.jsonl"), rev_line("A", 1, "t", "x") + rev_line("B", 1, "t", "y"));
    auto filtered = load_revision_history(tmp.file("two.jsonl"), {"B"});
    CHECK(filtered.size() == 1);
    CHECK(filtered.count("B") == 1);
  }
}

namespace {

const char* kXmlDump = R"(<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.10/">
  <siteinfo><sitename>Test</sitename></siteinfo>
  <page>
    <title>Alpha</title>
    <ns>0</ns>
    <id>100</id>
    <revision>
      <id>11</id>
      <timestamp>2020-01-01T00:00:00Z</timestamp>
      <contributor><username>u</username><id>5</id></contributor>
      <text xml:space="preserve">First '''version''' of [[Alpha]].</text>
    </revision>
    <revision>
      <id>13</id>
      <timestamp>2020-03-01T00:00:00Z</timestamp>
      <text xml:space="preserve">Third version.</text>
    </revision>
    <revision>
      <id>12</id>
      <timestamp>2020-02-01T00:00:00Z</timestamp>
      <text xml:space="preserve">Second version with {{template}} gone.</text>
    </revision>
  </page>
  <page>
    <title>Beta</title>
    <ns>0</ns>
    <id>101</id>
    <revision>
      <id>21</id>
      <timestamp>2021-01-01T00:00:00Z</timestamp>
      <text xml:space="preserve">Beta text &amp; more.</text>
    </revision>
  </page>
</mediawiki>
)";

}  // namespace

TEST_CASE("MediaWiki XML loading") {
  TempDir tmp("ingest_xml");
  std::string path = tmp.file("dump.xml");
  write(path, kXmlDump);
  auto chains = load_revision_history(path);
  REQUIRE(chains.size() == 2);
  REQUIRE(chains["Alpha"].size() == 3);
  // file order was 11, 13, 12; output sorted by rev_id
  CHECK(chains["Alpha"][0].rev_id == 11);
  CHECK(chains["Alpha"][1].rev_id == 12);
  CHECK(chains["Alpha"][2].rev_id == 13);
  CHECK(chains["Alpha"][0].text == "First version of Alpha.");  // markup stripped
  CHECK(chains["Alpha"][1].text == "Second version with gone.");
  CHECK(chains["Beta"][0].text == "Beta text & more.");
  // contributor <id> must not clobber the revision id
  CHECK(chains["Beta"][0].rev_id == 21);

  SUBCASE("gzip-compressed dumps are transparent") {
    REQUIRE(std::system(("gzip -kf " + path).c_str()) == 0);
    auto gz = load_revision_history(path + ".gz");
    CHECK(gz["Alpha"].size() == 3);
  }
  SUBCASE("broken XML raises ParseError with byte offset") {
    write(tmp.file("broken.xml"), "<mediawiki><page><title>X</title></wrong>");
    try {
      load_revision_history(tmp.file("broken.xml"));
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
  }
}

TEST_CASE("streaming keeps per-page buffering bounded") {
  TempDir tmp("ingest_stream");
  std::string path = tmp.file("big.jsonl");
  {
    std::ofstream out(path, std::ios::binary);
    std::string filler(2000, 'x');
    for (int page = 0; page < 500; page++) {
      for (int rev = 1; rev <= 3; rev++) {
        out << rev_line("Page" + std::to_string(page), uint64_t(rev), "t", filler);
      }
    }
  }
  size_t file_size = std::filesystem::file_size(path);
  size_t pages = 0;
  auto stats = stream_revision_history(path, [&](PageChain&&) { pages++; });
  CHECK(pages == 500);
  CHECK(stats.revisions == 1500);
  // High-water mark covers one page (3 revisions), not the whole file.
  CHECK(stats.max_page_bytes < file_size / 50);
}

TEST_CASE("corpus snapshot loading") {
  TempDir tmp("ingest_corpus");
  SUBCASE("explicit titles") {
    write(tmp.file("c.jsonl"),
          R"({"doc_id":"d1","title":"Alpha","text":"Alpha body."})" "\n"
          R"({"doc_id":"d2","title":"Beta","text":"Beta body."})" "\n");
    auto docs = load_corpus_snapshot(tmp.file("c.jsonl"), "tag");
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].title == "Alpha");
    CHECK(docs[0].source_tag == "tag");
  }
  SUBCASE("first-line title heuristic") {
    write(tmp.file("c.jsonl"),
          R"({"doc_id":"d1","text":"Anarchism\n\nAnarchism is a political philosophy."})" "\n");
    auto docs = load_corpus_snapshot(tmp.file("c.jsonl"), "tag");
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].title == "Anarchism");
  }
  SUBCASE("prose first line means title-unknown") {
    write(tmp.file("c.jsonl"),
          R"({"doc_id":"d1","text":"It began early. More text follows here.\nNext line."})" "\n");
    auto docs = load_corpus_snapshot(tmp.file("c.jsonl"), "tag");
    REQUIRE(docs.size() == 1);
    CHECK(docs[0].title.empty());
    CHECK(index_corpus_by_title(docs).empty());
  }
  SUBCASE("empty file yields empty stream") {
    write(tmp.file("empty.jsonl"), "");
    CHECK(load_corpus_snapshot(tmp.file("empty.jsonl"), "tag").empty());
  }
  SUBCASE("duplicate doc_id raises ParseError with line number") {
    write(tmp.file("dup.jsonl"),
          R"({"doc_id":"d1","title":"A","text":"x"})" "\n"
          R"({"doc_id":"d1","title":"B","text":"y"})" "\n");
    try {
      load_corpus_snapshot(tmp.file("dup.jsonl"), "tag");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("derive_title_from_text edge cases") {
    CHECK(derive_title_from_text("Short Title\nbody") == "Short Title");
    CHECK(derive_title_from_text("Ends with period.\nbody") == "Ends with period.");
    CHECK(derive_title_from_text("One. Two sentences here.\nbody") == "");
    CHECK(derive_title_from_text(std::string(130, 'a') + "\nbody") == "");
  }
}
