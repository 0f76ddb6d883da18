#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace smartsearch {

/// A token and the byte range it was cut from in the source text.
struct TokenSpan {
    std::string term;
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Word segmentation: maximal runs of letters/digits (any script), lowercased.
// Punctuation, symbols and whitespace separate words. Invalid UTF-8 bytes act
// as separators.
std::vector<TokenSpan> tokenize_spans(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

bool contains_hangul(std::string_view text);

// Helpers shared by the mock providers and the report writers.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);
std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

} // namespace smartsearch
