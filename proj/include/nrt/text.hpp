#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small ASCII-oriented string helpers. Bytes >= 0x80 are passed through
// untouched, so UTF-8 text survives intact.
namespace nrt::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string_view> split_whitespace(std::string_view s);
bool contains_icase(std::string_view haystack, std::string_view needle);
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace nrt::text
