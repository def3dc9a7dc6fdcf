#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

/// Small text utilities shared by ingest, embed and recommend. All of them
/// treat input as UTF-8 but only fold ASCII case.
namespace revinsight::text {

std::string_view trim(std::string_view s) noexcept;

std::string to_lower_ascii(std::string_view s);

bool is_space(char c) noexcept;

/// Lowercased word tokens: maximal runs of ASCII letters/digits, apostrophes
/// inside words, and any non-ASCII bytes (so accented words stay whole).
std::vector<std::string> word_tokens(std::string_view s);

/// Number of code points. Invalid continuation bytes count as one each.
std::size_t utf8_length(std::string_view s) noexcept;

/// Byte offset of the code point with index `chars`, or s.size() if shorter.
std::size_t utf8_offset(std::string_view s, std::size_t chars) noexcept;

/// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view s) noexcept;

/// Replace every occurrence of `from` with `to`.
std::string replace_all(std::string_view s, std::string_view from,
                        std::string_view to);

std::size_t count_occurrences(std::string_view s, std::string_view needle);

}  // namespace revinsight::text
