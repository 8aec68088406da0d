#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "drift/evolve.hpp"
#include "drift/util.hpp"

namespace {

std::string sentence_block(drift::SplitMix64& rng, size_t sentences) {
  static const char* kSubjects[] = {"The river", "The tower", "A record", "The survey"};
  static const char* kVerbs[] = {"notes", "shows", "keeps", "lists"};
  static const char* kObjects[] = {"the change", "a revision", "the count", "an edit"};
  std::string out;
  for (size_t s = 0; s < sentences; s++) {
    if (s) out += ' ';
    out += kSubjects[rng.next_below(4)];
    out += ' ';
    out += kVerbs[rng.next_below(4)];
    out += ' ';
    out += kObjects[rng.next_below(4)];
    out += '.';
  }
  return out;
}

}  // namespace

static void DiffSimilarity(benchmark::State& state) {
  drift::SplitMix64 rng(31);
  std::string a = sentence_block(rng, size_t(state.range(0)));
  std::string b = a + " " + sentence_block(rng, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift::diff_similarity(a, b));
  }
}
BENCHMARK(DiffSimilarity)->Arg(8)->Arg(32)->Arg(128);

static void MatchOccurrences(benchmark::State& state) {
  drift::SplitMix64 rng(37);
  std::string target = sentence_block(rng, 10);
  std::vector<drift::RevisionRecord> chain;
  for (uint64_t r = 1; r <= uint64_t(state.range(0)); r++) {
    std::string text = sentence_block(rng, 8);
    if (r % 3 != 0) text = target + "\n\n" + text;
    chain.push_back({"T", r, "2020-01-01T00:00:00Z", text});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift::match_occurrences(target, chain));
  }
}
BENCHMARK(MatchOccurrences)->Arg(50)->Arg(500);
