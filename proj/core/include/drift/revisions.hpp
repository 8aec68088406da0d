#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "drift/types.hpp"

namespace drift {

struct PageChain {
  std::string title;
  std::vector<RevisionRecord> revisions;  // sorted by rev_id
};

struct RevisionStreamStats {
  size_t pages = 0;
  size_t revisions = 0;
  size_t malformed = 0;           // skipped records (JSONL mode)
  size_t timestamp_warnings = 0;  // timestamps regressing after rev_id sort
  size_t max_page_bytes = 0;      // high-water mark of buffered page text
};

using PageSink = std::function<void(PageChain&&)>;

// Streams a revision history file page by page. Accepts MediaWiki
// pages-meta-history XML or revision JSONL ({"title","rev_id","timestamp",
// "text"}), either plain or gzip-compressed; the format is sniffed from the
// content. XML text is wikitext-stripped; both formats are normalized.
// Peak memory is bounded by the largest single page, not the file.
//
// Within each emitted page, revisions are sorted by rev_id; a duplicate
// rev_id raises OrderingError. XML structure errors raise ParseError with a
// byte offset; malformed JSONL lines are counted in stats and skipped.
// JSONL inputs interleaving titles emit one chain per contiguous title run.
RevisionStreamStats stream_revision_history(const std::string& path, const PageSink& sink);

// Convenience loader holding everything in memory. `title_filter`, when
// nonempty, keeps only the listed titles.
std::map<std::string, std::vector<RevisionRecord>> load_revision_history(
    const std::string& path, const std::set<std::string>& title_filter = {});

void write_revision_jsonl(const std::string& path,
                          const std::map<std::string, std::vector<RevisionRecord>>& chains);

}  // namespace drift
