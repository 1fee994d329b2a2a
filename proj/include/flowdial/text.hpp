#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 text helpers shared by the parser, matcher and scorer.
namespace flowdial::text {

// Unicode NFC. ASCII input is returned unchanged without touching ICU.
std::string nfc(std::string_view s);

// Strips ASCII whitespace, U+3000 (ideographic space), U+00A0 and a UTF-8 BOM
// from both ends.
std::string_view trim(std::string_view s);

// Replaces every run of whitespace (same set as trim) with a single ASCII space.
std::string collapse_whitespace(std::string_view s);

std::string ascii_lower(std::string_view s);

// Number of Unicode code points; invalid bytes count as one each.
std::size_t codepoint_count(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);

bool starts_with_word(std::string_view s, std::string_view word);

// Finds `needle` in `haystack` such that, when the needle starts/ends with an
// ASCII alphanumeric, the neighbouring haystack bytes are not alphanumeric.
// Returns the end offset of the right-most such occurrence, or npos.
std::size_t rfind_bounded(std::string_view haystack, std::string_view needle);

// Stable 64-bit FNV-1a, used to derive per-item seeds.
std::uint64_t fnv1a(std::string_view s);

}  // namespace flowdial::text
