#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace memedial {

std::string trim(std::string_view s);

// Code-point aware helpers. Invalid UTF-8 bytes count as one code point each.
std::size_t utf8_length(std::string_view s);
std::string utf8_truncate(std::string_view s, std::size_t max_code_points);
std::vector<char32_t> utf8_decode(std::string_view s);
std::string utf8_encode(char32_t cp);

bool is_cjk_ideograph(char32_t cp);

// Keyword tokenizer. Whitespace and punctuation separate tokens. Latin and
// other word characters form word tokens (ASCII lowercased). A run of CJK
// ideographs of length <= 2 is emitted whole; longer runs are emitted as
// overlapping character bigrams.
std::vector<std::string> tokenize_keywords(std::string_view text);

using StopTokens = std::set<std::string, std::less<>>;

// One token per line; blank lines and lines starting with '#' are skipped.
StopTokens load_stop_tokens(const std::string& path);
StopTokens parse_stop_tokens(std::string_view content);

}  // namespace memedial
