#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace drift {

// splitmix64. Used wherever reproducibility across platforms matters;
// the standard <random> distributions are not bit-stable across libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) via rejection, bias-free.
  uint64_t next_below(uint64_t bound);

  double next_unit() { return double(next() >> 11) * (1.0 / 9007199254740992.0); }

 private:
  uint64_t state_;
};

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);
std::vector<std::string> read_lines(const std::string& path);

// Streams into <path>.tmp and renames on commit(); the destructor discards
// uncommitted output so failed stages never leave partial files behind.
class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(std::string path);
  ~AtomicFileWriter();
  AtomicFileWriter(const AtomicFileWriter&) = delete;
  AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

  void write(std::string_view data);
  void commit();

 private:
  std::string path_;
  std::string tmp_path_;
  void* stream_;  // std::ofstream, kept out of the header
  bool committed_ = false;
};

// Applies fn to every index in [0, n) on up to `threads` workers. Results
// must be written by index so ordering never depends on scheduling.
void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn);

bool utf8_valid(std::string_view s);
size_t utf8_scalar_count(std::string_view s);
std::vector<uint32_t> utf8_decode(std::string_view s);

}  // namespace drift
