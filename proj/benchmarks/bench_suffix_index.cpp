#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "drift/suffix_index.hpp"
#include "drift/util.hpp"

namespace {

std::vector<drift::CorpusDoc> make_docs(size_t total_bytes) {
  drift::SplitMix64 rng(7);
  static const char* kWords[] = {"river", "stone", "tower", "light", "green",
                                 "march", "seven", "quiet", "amber", "floor"};
  std::vector<drift::CorpusDoc> docs;
  size_t total = 0;
  int id = 0;
  while (total < total_bytes) {
    std::string text;
    for (int w = 0; w < 2000; w++) {
      if (w) text += ' ';
      text += kWords[rng.next_below(10)];
    }
    total += text.size();
    docs.push_back({"d" + std::to_string(id++), "", std::move(text), "bench"});
  }
  return docs;
}

}  // namespace

static void BuildIndex(benchmark::State& state) {
  auto docs = make_docs(size_t(state.range(0)));
  for (auto _ : state) {
    auto index = drift::CorpusIndex::build(docs);
    benchmark::DoNotOptimize(index.blob_size());
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(BuildIndex)->Arg(1 << 20)->Arg(4 << 20)->Unit(benchmark::kMillisecond);

static void ContainsQuery(benchmark::State& state) {
  auto docs = make_docs(4 << 20);
  auto index = drift::CorpusIndex::build(docs);
  drift::SplitMix64 rng(13);
  std::vector<std::string> queries;
  for (int q = 0; q < 4096; q++) {
    const auto& d = docs[rng.next_below(docs.size())];
    size_t len = 6 + rng.next_below(60);
    queries.push_back(d.text.substr(rng.next_below(d.text.size() - len), len));
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.contains(queries[i++ & 4095]));
  }
}
BENCHMARK(ContainsQuery);

static void SaveLoadRoundTrip(benchmark::State& state) {
  auto docs = make_docs(1 << 20);
  auto index = drift::CorpusIndex::build(docs);
  std::string path = "bench_index.devi";
  for (auto _ : state) {
    index.save(path);
    auto loaded = drift::CorpusIndex::load(path);
    benchmark::DoNotOptimize(loaded.doc_count());
  }
}
BENCHMARK(SaveLoadRoundTrip)->Unit(benchmark::kMillisecond);
