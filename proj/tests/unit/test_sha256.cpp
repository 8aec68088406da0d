#include "doctest.h"

#include <string>

#include "drift/sha256.hpp"

using drift::sha256_hex;

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("sha256 incremental equals one-shot") {
  std::string data(100000, 'x');
  for (size_t i = 0; i < data.size(); i++) data[i] = char('a' + (i * 31) % 26);
  drift::Sha256 h;
  size_t pos = 0;
  size_t chunks[] = {1, 63, 64, 65, 1000, 4096};
  size_t ci = 0;
  while (pos < data.size()) {
    size_t take = std::min(chunks[ci % 6], data.size() - pos);
    h.update(data.data() + pos, take);
    pos += take;
    ci++;
  }
  auto digest = h.finish();
  std::string hex;
  static const char* k = "0123456789abcdef";
  for (uint8_t b : digest) {
    hex += k[b >> 4];
    hex += k[b & 0xf];
  }
  CHECK(hex == sha256_hex(data));
}
