#include "drift/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <cctype>

#include "drift/errors.hpp"

namespace drift {

namespace {

std::string nfc(const std::string& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) raise(ErrorKind::Io, "ICU NFC instance unavailable");
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(s);
  icu::UnicodeString out = norm->normalize(in, status);
  if (U_FAILURE(status)) raise(ErrorKind::Io, "ICU normalize failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

inline bool is_space_or_tab(char c) { return c == ' ' || c == '\t'; }

}  // namespace

std::string normalize_text(std::string_view raw) {
  // Pass 1: line endings and control characters.
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (size_t i = 0; i < raw.size(); i++) {
    unsigned char c = static_cast<unsigned char>(raw[i]);
    if (c == '\r') {
      if (i + 1 < raw.size() && raw[i + 1] == '\n') continue;  // CRLF -> LF
      cleaned.push_back('\n');
      continue;
    }
    if (c < 0x20 && c != '\n' && c != '\t') continue;
    if (c == 0x7f) continue;
    if (c == 0xc2 && i + 1 < raw.size()) {  // C1 controls, UTF-8 encoded
      unsigned char next = static_cast<unsigned char>(raw[i + 1]);
      if (next >= 0x80 && next <= 0x9f) {
        i++;
        continue;
      }
    }
    cleaned.push_back(char(c));
  }
  // Pass 2: per-line whitespace collapse and trim.
  std::string out;
  out.reserve(cleaned.size());
  size_t line_start = out.size();
  bool pending_space = false;
  auto end_line = [&] {
    while (out.size() > line_start && out.back() == ' ') out.pop_back();
    pending_space = false;
  };
  for (char c : cleaned) {
    if (c == '\n') {
      end_line();
      out.push_back('\n');
      line_start = out.size();
    } else if (is_space_or_tab(c)) {
      pending_space = true;
    } else {
      if (pending_space && out.size() > line_start) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  end_line();
  // NFC last: composition never introduces whitespace or controls, so the
  // result is a fixed point of the whole function.
  return nfc(out);
}

std::vector<std::string> segment_paragraphs(std::string_view article_text) {
  std::vector<std::string> paragraphs;
  std::string current;
  size_t i = 0, n = article_text.size();
  auto flush = [&] {
    while (!current.empty() && current.back() == '\n') current.pop_back();
    if (!current.empty()) paragraphs.push_back(current);
    current.clear();
  };
  while (i < n) {
    size_t eol = article_text.find('\n', i);
    if (eol == std::string_view::npos) eol = n;
    std::string_view line = article_text.substr(i, eol - i);
    if (line.empty()) {
      flush();
    } else {
      if (!current.empty()) current.push_back('\n');
      current.append(line);
    }
    i = eol + 1;
  }
  flush();
  return paragraphs;
}

std::string join_paragraphs(const std::vector<std::string>& paragraphs) {
  std::string out;
  for (size_t i = 0; i < paragraphs.size(); i++) {
    if (i) out += "\n\n";
    out += paragraphs[i];
  }
  return out;
}

std::string ascii_fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
  }
  return out;
}

bool contains_substring(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

bool contains_word_ci(std::string_view text, std::string_view label) {
  if (label.empty()) return false;
  std::string t = ascii_fold(text);
  std::string l = ascii_fold(label);
  size_t pos = 0;
  auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
  };
  while ((pos = t.find(l, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_word(t[pos - 1]);
    size_t end = pos + l.size();
    bool right_ok = end == t.size() || !is_word(t[end]);
    if (left_ok && right_ok) return true;
    pos++;
  }
  return false;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  size_t i = 0, n = s.size();
  while (i < n) {
    while (i < n && (s[i] == ' ' || s[i] == '\n' || s[i] == '\t')) i++;
    size_t start = i;
    while (i < n && s[i] != ' ' && s[i] != '\n' && s[i] != '\t') i++;
    if (i > start) tokens.emplace_back(s.substr(start, i - start));
  }
  return tokens;
}

}  // namespace drift
