#include "drift/util.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "drift/errors.hpp"

namespace fs = std::filesystem;

namespace drift {

uint64_t SplitMix64::next_below(uint64_t bound) {
  if (bound == 0) return 0;
  uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open " + path);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot open " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) raise(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) raise(ErrorKind::Io, "rename " + tmp.string() + " -> " + path + ": " + ec.message());
}

AtomicFileWriter::AtomicFileWriter(std::string path)
    : path_(std::move(path)), tmp_path_(path_ + ".tmp") {
  fs::path target(path_);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  auto* out = new std::ofstream(tmp_path_, std::ios::binary | std::ios::trunc);
  if (!*out) {
    delete out;
    raise(ErrorKind::Io, "cannot open " + tmp_path_);
  }
  stream_ = out;
}

AtomicFileWriter::~AtomicFileWriter() {
  auto* out = static_cast<std::ofstream*>(stream_);
  if (!committed_) {
    out->close();
    std::error_code ec;
    fs::remove(tmp_path_, ec);
  }
  delete out;
}

void AtomicFileWriter::write(std::string_view data) {
  auto* out = static_cast<std::ofstream*>(stream_);
  out->write(data.data(), std::streamsize(data.size()));
  if (!*out) raise(ErrorKind::Io, "short write to " + tmp_path_);
}

void AtomicFileWriter::commit() {
  auto* out = static_cast<std::ofstream*>(stream_);
  out->close();
  std::error_code ec;
  fs::rename(tmp_path_, path_, ec);
  if (ec) raise(ErrorKind::Io, "rename " + tmp_path_ + " -> " + path_ + ": " + ec.message());
  committed_ = true;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned workers = std::min<unsigned>(threads == 0 ? hw : threads, unsigned(n));
  if (workers <= 1) {
    for (size_t i = 0; i < n; i++) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; w++) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

bool utf8_valid(std::string_view s) {
  size_t i = 0, n = s.size();
  while (i < n) {
    uint8_t c = uint8_t(s[i]);
    size_t len;
    uint32_t cp;
    if (c < 0x80) {
      i++;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (size_t k = 1; k < len; k++) {
      uint8_t cc = uint8_t(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (len == 2 && cp < 0x80) return false;
    if (len == 3 && cp < 0x800) return false;
    if (len == 4 && cp < 0x10000) return false;
    if (cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
    i += len;
  }
  return true;
}

size_t utf8_scalar_count(std::string_view s) {
  size_t count = 0;
  for (char ch : s) {
    if ((uint8_t(ch) & 0xc0) != 0x80) count++;
  }
  return count;
}

std::vector<uint32_t> utf8_decode(std::string_view s) {
  std::vector<uint32_t> out;
  out.reserve(s.size());
  size_t i = 0, n = s.size();
  while (i < n) {
    uint8_t c = uint8_t(s[i]);
    if (c < 0x80) {
      out.push_back(c);
      i++;
      continue;
    }
    size_t len = (c & 0xe0) == 0xc0 ? 2 : (c & 0xf0) == 0xe0 ? 3 : (c & 0xf8) == 0xf0 ? 4 : 1;
    if (len == 1 || i + len > n) {  // invalid byte: emit replacement
      out.push_back(0xfffd);
      i++;
      continue;
    }
    uint32_t cp = c & (0xff >> (len + 1));
    bool ok = true;
    for (size_t k = 1; k < len; k++) {
      uint8_t cc = uint8_t(s[i + k]);
      if ((cc & 0xc0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!ok) {
      out.push_back(0xfffd);
      i++;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace drift
