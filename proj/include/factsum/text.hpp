#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace factsum {

// ASCII whitespace only; the corpus never treats non-ASCII bytes as separators.
inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_closing_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

/// Case-folds ASCII letters, collapses whitespace runs to one space and trims.
/// This is the comparison key for entity surfaces everywhere in the toolkit.
std::string normalize_surface(std::string_view s);

/// Collapses whitespace runs and removes whitespace directly before closing
/// punctuation. Used to compare corrected summaries with reference strings.
std::string normalize_spacing(std::string_view s);

bool is_valid_utf8(std::string_view s);

// True when byte `offset` is a code point boundary of a valid UTF-8 string.
inline bool is_char_boundary(std::string_view s, std::size_t offset) {
  if (offset == 0 || offset >= s.size()) return offset <= s.size();
  return (static_cast<unsigned char>(s[offset]) & 0xC0) != 0x80;
}

bool contains(std::string_view haystack, std::string_view needle);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace factsum
