#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace drift {

// Canonical text form used by every matcher and index in the pipeline:
//   - CR and CRLF become LF
//   - C0/C1 control characters other than LF are dropped (tabs join the
//     whitespace collapse below)
//   - runs of spaces/tabs collapse to a single space
//   - leading/trailing whitespace of each line is stripped
//   - Unicode canonical composition (NFC) is applied last
// Total and idempotent; invalid UTF-8 bytes are replaced with U+FFFD.
std::string normalize_text(std::string_view raw);

// Splits normalized text on runs of one or more blank lines. Never emits an
// empty paragraph; joining with "\n\n" and re-segmenting is a fixed point.
std::vector<std::string> segment_paragraphs(std::string_view article_text);

std::string join_paragraphs(const std::vector<std::string>& paragraphs);

// ASCII case fold. Inclusion Match is defined over ASCII-folded normalized
// text; the benchmarks are English and extractive golds are verbatim spans.
std::string ascii_fold(std::string_view s);

bool contains_substring(std::string_view haystack, std::string_view needle);

// True when `label` occurs as a standalone word (non-alphanumeric
// boundaries), ASCII case-insensitive.
bool contains_word_ci(std::string_view text, std::string_view label);

std::vector<std::string> whitespace_tokens(std::string_view s);

}  // namespace drift
