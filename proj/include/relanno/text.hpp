#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// UTF-8 helpers shared by dataset validation, prompt rendering and response parsing.
namespace relanno::text {

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t code_points(std::string_view s);

/// Byte offset of the code point at index `cp`. `cp == code_points(s)` maps to s.size().
/// Throws std::out_of_range past the end.
std::size_t byte_offset(std::string_view s, std::size_t cp);

/// Substring by code point range [begin, end).
std::string_view slice(std::string_view s, std::size_t begin, std::size_t end);

/// Full Unicode case fold.
std::string case_fold(std::string_view s);

std::string collapse_whitespace(std::string_view s);
std::string_view trim(std::string_view s);

/// Case fold, collapse whitespace, drop an "answer:" prefix, surrounding quotes and
/// terminal punctuation. Both sides of every response/option comparison go through this.
std::string normalize(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

bool is_blank(std::string_view s);

} // namespace relanno::text
