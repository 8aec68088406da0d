#pragma once

#include <string>
#include <string_view>

namespace drift {

// Minimal deterministic wikitext -> plain text reduction:
//   templates {{...}} dropped (nesting honored), tables {|...|} dropped,
//   [[link|anchor]] reduced to anchor, [[link]] to link, File/Image/Category
//   links dropped, [url label] reduced to label, bare [url] dropped,
//   ''/''' emphasis markers removed, <ref> bodies and HTML comments dropped,
//   other tags stripped keeping inner text, == headings == keep their text,
//   common HTML entities decoded.
// Full template expansion and infobox parsing are out of scope.
std::string strip_wikitext(std::string_view wikitext);

}  // namespace drift
