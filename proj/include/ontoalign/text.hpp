#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ontoalign {

/// Lowercases, turns underscores into spaces, collapses whitespace runs and
/// trims. Only ASCII letters are case-folded; other bytes are kept verbatim.
std::string preprocess_label(std::string_view raw);

/// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string_view> split_whitespace(std::string_view text);

/// Decodes UTF-8 into code points. Malformed bytes decode to U+FFFD.
std::u32string utf8_decode(std::string_view text);

/// Byte offsets of each code point start, plus text.size() at the end.
std::vector<std::size_t> utf8_boundaries(std::string_view text);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace ontoalign
