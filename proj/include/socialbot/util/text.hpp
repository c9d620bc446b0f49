#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace socialbot::text {

/// A lowercased token together with its byte span in the source string.
struct Token {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Unicode-aware word segmentation. Tokens are maximal runs of letters and
/// digits, lowercased; CJK ideographs and kana become one token per code
/// point; everything else separates tokens. Invalid UTF-8 bytes separate.
std::vector<Token> tokenize(std::string_view input);

/// Token texts only.
std::vector<std::string> words(std::string_view input);

/// Tokens joined by single spaces. Two strings with equal normal forms are
/// treated as the same text throughout the engine.
std::string normalize(std::string_view input);

/// True when `needle` occurs as a contiguous token run inside `haystack`.
bool contains_phrase(const std::vector<std::string>& haystack,
                     const std::vector<std::string>& needle);

/// Decodes one UTF-8 code point starting at `pos`; advances `pos`.
/// Returns 0xFFFFFFFF for an invalid sequence (and advances one byte).
std::uint32_t decode_utf8(std::string_view s, std::size_t& pos);

/// True when the string is valid UTF-8 without C0/C1 control characters
/// (tab, newline and carriage return excepted) or U+FFFD.
bool is_clean_text(std::string_view s);

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace socialbot::text
