#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace drift {

// Incremental SHA-256 (FIPS 180-4). Used for cache keys and manifest digests.
class Sha256 {
 public:
  Sha256();

  void update(const void* data, size_t len);
  void update(std::string_view s) { update(s.data(), s.size()); }

  // Finalizes and returns the 32-byte digest. The object must not be reused.
  std::array<uint8_t, 32> finish();

 private:
  void process_block(const uint8_t* block);

  uint32_t state_[8];
  uint64_t total_len_ = 0;
  uint8_t buf_[64];
  size_t buf_len_ = 0;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);

}  // namespace drift
