#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace note_forge {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
// Trims and replaces every internal whitespace run with one space.
std::string collapse_whitespace(std::string_view s);
// Count of maximal non-whitespace runs.
std::size_t word_count(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace note_forge
