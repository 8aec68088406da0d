#pragma once

#include <string>
#include <vector>

#include "drift/types.hpp"

namespace drift {

// Loads the canonical benchmark JSONL (one QAInstance per line). Passage
// text is normalized and re-segmented into paragraphs on load.
std::vector<QAInstance> load_benchmark(const std::string& path, DatasetId dataset_id);

// Per-dataset adapters from native release formats to canonical instances:
//   SQUAD11 / SQUAD20 / ADVQA_DROBERTA  SQuAD-style JSON ({"data":[...]})
//   BOOLQ                                JSONL {"question","passage","answer",...}
//   WIKIWHY                              JSON array or JSONL {"question","answer",...}
//   HOTPOTQA                             JSON array with context + supporting_facts
std::vector<QAInstance> adapt_native_benchmark(const std::string& path, DatasetId dataset_id);

void write_benchmark_jsonl(const std::string& path, const std::vector<QAInstance>& instances);

}  // namespace drift
