#include "drift/wikitext.hpp"

#include <cstdint>
#include <vector>

namespace drift {

namespace {

bool starts_with_ci(std::string_view s, size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (size_t i = 0; i < prefix.size(); i++) {
    char a = s[pos + i];
    char b = prefix[i];
    if (a >= 'A' && a <= 'Z') a = char(a - 'A' + 'a');
    if (a != b) return false;
  }
  return true;
}

// [[File:...]], [[Image:...]], [[Category:...]] carry no prose.
bool is_media_or_category(std::string_view target) {
  return starts_with_ci(target, 0, "file:") || starts_with_ci(target, 0, "image:") ||
         starts_with_ci(target, 0, "category:");
}

void append_entity_decoded(std::string& out, std::string_view s) {
  size_t i = 0, n = s.size();
  while (i < n) {
    if (s[i] == '&') {
      size_t semi = s.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 10) {
        std::string_view ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp") { out += '&'; i = semi + 1; continue; }
        if (ent == "lt") { out += '<'; i = semi + 1; continue; }
        if (ent == "gt") { out += '>'; i = semi + 1; continue; }
        if (ent == "quot") { out += '"'; i = semi + 1; continue; }
        if (ent == "apos") { out += '\''; i = semi + 1; continue; }
        if (ent == "nbsp") { out += ' '; i = semi + 1; continue; }
        if (ent == "ndash" || ent == "mdash") { out += '-'; i = semi + 1; continue; }
        if (!ent.empty() && ent[0] == '#') {
          uint32_t cp = 0;
          bool ok = ent.size() > 1;
          if (ent.size() > 2 && (ent[1] == 'x' || ent[1] == 'X')) {
            for (size_t k = 2; k < ent.size() && ok; k++) {
              char c = ent[k];
              cp <<= 4;
              if (c >= '0' && c <= '9') cp |= uint32_t(c - '0');
              else if (c >= 'a' && c <= 'f') cp |= uint32_t(c - 'a' + 10);
              else if (c >= 'A' && c <= 'F') cp |= uint32_t(c - 'A' + 10);
              else ok = false;
            }
          } else {
            for (size_t k = 1; k < ent.size() && ok; k++) {
              char c = ent[k];
              if (c < '0' || c > '9') { ok = false; break; }
              cp = cp * 10 + uint32_t(c - '0');
            }
          }
          if (ok && cp > 0 && cp <= 0x10ffff) {
            if (cp < 0x80) out += char(cp);
            else if (cp < 0x800) {
              out += char(0xc0 | (cp >> 6));
              out += char(0x80 | (cp & 0x3f));
            } else if (cp < 0x10000) {
              out += char(0xe0 | (cp >> 12));
              out += char(0x80 | ((cp >> 6) & 0x3f));
              out += char(0x80 | (cp & 0x3f));
            } else {
              out += char(0xf0 | (cp >> 18));
              out += char(0x80 | ((cp >> 12) & 0x3f));
              out += char(0x80 | ((cp >> 6) & 0x3f));
              out += char(0x80 | (cp & 0x3f));
            }
            i = semi + 1;
            continue;
          }
        }
      }
    }
    out += s[i++];
  }
}

}  // namespace

std::string strip_wikitext(std::string_view w) {
  std::string pass1;
  pass1.reserve(w.size());
  size_t i = 0;
  const size_t n = w.size();
  int table_depth = 0;
  while (i < n) {
    // HTML comments
    if (w.compare(i, 4, "<!--") == 0) {
      size_t end = w.find("-->", i + 4);
      i = end == std::string_view::npos ? n : end + 3;
      continue;
    }
    // templates, nested
    if (w.compare(i, 2, "{{") == 0) {
      int depth = 0;
      while (i < n) {
        if (w.compare(i, 2, "{{") == 0) { depth++; i += 2; }
        else if (w.compare(i, 2, "}}") == 0) { depth--; i += 2; if (depth == 0) break; }
        else i++;
      }
      continue;
    }
    // tables
    if (w.compare(i, 2, "{|") == 0) {
      table_depth++;
      i += 2;
      continue;
    }
    if (table_depth > 0) {
      if (w.compare(i, 2, "|}") == 0) {
        table_depth--;
        i += 2;
      } else {
        i++;
      }
      continue;
    }
    // internal links
    if (w.compare(i, 2, "[[") == 0) {
      size_t end = w.find("]]", i + 2);
      if (end == std::string_view::npos) { i += 2; continue; }
      std::string_view inner = w.substr(i + 2, end - i - 2);
      if (!is_media_or_category(inner)) {
        size_t pipe = inner.rfind('|');
        append_entity_decoded(pass1, pipe == std::string_view::npos ? inner
                                                                    : inner.substr(pipe + 1));
      }
      i = end + 2;
      continue;
    }
    // external links
    if (w[i] == '[' && i + 1 < n &&
        (w.compare(i + 1, 7, "http://") == 0 || w.compare(i + 1, 8, "https://") == 0 ||
         w.compare(i + 1, 6, "ftp://") == 0 || w.compare(i + 1, 2, "//") == 0)) {
      size_t end = w.find(']', i + 1);
      if (end == std::string_view::npos) { i++; continue; }
      std::string_view inner = w.substr(i + 1, end - i - 1);
      size_t space = inner.find(' ');
      if (space != std::string_view::npos) append_entity_decoded(pass1, inner.substr(space + 1));
      i = end + 1;
      continue;
    }
    // <ref>...</ref> and self-closing <ref/>
    if (starts_with_ci(w, i, "<ref")) {
      size_t close = w.find('>', i);
      if (close == std::string_view::npos) { i = n; continue; }
      if (w[close - 1] == '/') { i = close + 1; continue; }
      size_t end = w.find("</ref", close);
      if (end == std::string_view::npos) { i = n; continue; }
      size_t end_close = w.find('>', end);
      i = end_close == std::string_view::npos ? n : end_close + 1;
      continue;
    }
    // any other tag: drop the tag, keep inner text
    if (w[i] == '<') {
      size_t close = w.find('>', i);
      if (close != std::string_view::npos && close - i <= 128) {
        i = close + 1;
        continue;
      }
      pass1 += '<';
      i++;
      continue;
    }
    // emphasis markers
    if (w[i] == '\'' && i + 1 < n && w[i + 1] == '\'') {
      i += 2;
      while (i < n && w[i] == '\'') i++;
      continue;
    }
    // heading markers at line start
    if (w[i] == '=' && (i == 0 || w[i - 1] == '\n')) {
      size_t eq = i;
      while (eq < n && w[eq] == '=') eq++;
      size_t eol = w.find('\n', i);
      if (eol == std::string_view::npos) eol = n;
      std::string_view rest = w.substr(eq, eol - eq);
      size_t trail = rest.find_last_not_of("= ");
      if (trail != std::string_view::npos) {
        size_t lead = rest.find_first_not_of(' ');
        append_entity_decoded(pass1, rest.substr(lead, trail - lead + 1));
      }
      i = eol;
      continue;
    }
    // list bullets at line start
    if ((w[i] == '*' || w[i] == '#' || w[i] == ';' || w[i] == ':') &&
        (i == 0 || w[i - 1] == '\n')) {
      while (i < n && (w[i] == '*' || w[i] == '#' || w[i] == ';' || w[i] == ':')) i++;
      while (i < n && w[i] == ' ') i++;
      continue;
    }
    if (w[i] == '&') {
      size_t semi = w.find(';', i + 1);
      size_t eol = w.find('\n', i + 1);
      if (semi != std::string_view::npos && semi - i <= 10 &&
          (eol == std::string_view::npos || semi < eol)) {
        append_entity_decoded(pass1, w.substr(i, semi - i + 1));
        i = semi + 1;
        continue;
      }
    }
    pass1 += w[i++];
  }
  return pass1;
}

}  // namespace drift
