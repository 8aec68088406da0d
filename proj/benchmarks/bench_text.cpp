#include <benchmark/benchmark.h>

#include <string>

#include "drift/text.hpp"
#include "drift/util.hpp"
#include "drift/wikitext.hpp"

namespace {

std::string messy_text(size_t bytes) {
  drift::SplitMix64 rng(21);
  static const char* kChunks[] = {"word",  "  two  spaces", "\ttab",    "line\r\n",
                                  "plain", "caf\xc3\xa9",   "notes.\n", "{{tpl}} [[Link|x]]"};
  std::string out;
  while (out.size() < bytes) out += kChunks[rng.next_below(8)];
  return out;
}

}  // namespace

static void NormalizeText(benchmark::State& state) {
  std::string input = messy_text(size_t(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift::normalize_text(input));
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(NormalizeText)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

static void StripWikitext(benchmark::State& state) {
  std::string input = messy_text(size_t(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift::strip_wikitext(input));
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(StripWikitext)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

static void SegmentParagraphs(benchmark::State& state) {
  std::string input;
  for (int i = 0; i < 500; i++) {
    input += "Paragraph number " + std::to_string(i) + " with a bit of text.\n\n";
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift::segment_paragraphs(input));
  }
}
BENCHMARK(SegmentParagraphs);
