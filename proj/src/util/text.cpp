#include "socialbot/util/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace socialbot::text {

namespace {

constexpr std::uint32_t kInvalid = 0xFFFFFFFFu;

enum class CharClass { Word, Single, Separator };

bool is_cjk(std::uint32_t cp) {
    return (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
           (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
           (cp >= 0x20000 && cp <= 0x2FFFF);
}

CharClass classify(std::uint32_t cp) {
    if (cp == kInvalid) return CharClass::Separator;
    if (cp < 0x80) {
        return std::isalnum(static_cast<unsigned char>(cp)) ? CharClass::Word
                                                            : CharClass::Separator;
    }
    if (is_cjk(cp)) return CharClass::Single;
    if (cp <= 0xBF || cp == 0xD7 || cp == 0xF7) return CharClass::Separator;
    if (cp >= 0x2000 && cp <= 0x2BFF) return CharClass::Separator;  // punctuation, symbols, arrows
    if (cp >= 0x3000 && cp <= 0x303F) return CharClass::Separator;  // CJK punctuation
    if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
        (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65)) {
        return CharClass::Separator;
    }
    if (cp == 0xFFFD || cp == 0xFEFF) return CharClass::Separator;
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return CharClass::Separator;  // emoji
    return CharClass::Word;
}

std::uint32_t lower(std::uint32_t cp) {
    if (cp < 0x80) return static_cast<std::uint32_t>(std::tolower(static_cast<int>(cp)));
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x391 && cp <= 0x3A9) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 0x20;
    return cp;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace

std::uint32_t decode_utf8(std::string_view s, std::size_t& pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len = 0;
    std::uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++pos;
        return kInvalid;
    }
    if (pos + static_cast<std::size_t>(len) > s.size()) {
        ++pos;
        return kInvalid;
    }
    for (int i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + static_cast<std::size_t>(i)]);
        if ((b & 0xC0) != 0x80) {
            ++pos;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // reject overlong forms and surrogates
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        ++pos;
        return kInvalid;
    }
    pos += static_cast<std::size_t>(len);
    return cp;
}

std::vector<Token> tokenize(std::string_view input) {
    std::vector<Token> out;
    std::size_t pos = 0;
    Token current;
    bool open = false;
    auto flush = [&](std::size_t end) {
        if (open) {
            current.end = end;
            out.push_back(std::move(current));
            current = Token{};
            open = false;
        }
    };
    while (pos < input.size()) {
        const std::size_t start = pos;
        const std::uint32_t cp = decode_utf8(input, pos);
        switch (classify(cp)) {
            case CharClass::Word:
                if (!open) {
                    current.begin = start;
                    open = true;
                }
                append_utf8(current.text, lower(cp));
                break;
            case CharClass::Single: {
                flush(start);
                Token t;
                t.begin = start;
                t.end = pos;
                append_utf8(t.text, cp);
                out.push_back(std::move(t));
                break;
            }
            case CharClass::Separator:
                flush(start);
                break;
        }
    }
    flush(input.size());
    return out;
}

std::vector<std::string> words(std::string_view input) {
    std::vector<std::string> out;
    for (auto& t : tokenize(input)) out.push_back(std::move(t.text));
    return out;
}

std::string normalize(std::string_view input) {
    std::string out;
    for (const auto& t : tokenize(input)) {
        if (!out.empty()) out.push_back(' ');
        out += t.text;
    }
    return out;
}

bool contains_phrase(const std::vector<std::string>& haystack,
                     const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
           haystack.end();
}

bool is_clean_text(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        const std::uint32_t cp = decode_utf8(s, pos);
        if (cp == kInvalid || cp == 0xFFFD) return false;
        if (cp == '\t' || cp == '\n' || cp == '\r') continue;
        if (cp < 0x20 || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F)) return false;
    }
    return true;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace socialbot::text
