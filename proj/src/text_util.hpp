#pragma once

// Helpers shared by the line-oriented text formats.

#include "kcq/errors.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace kcq::text {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

/// One `key: value` directive with comments stripped.
struct Directive {
    std::size_t line;
    std::string_view key;
    std::size_t key_column;
    std::string_view value;
    std::size_t value_column;
};

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

/// Trims whitespace, tracking the column shift of the left edge.
inline std::string_view trim(std::string_view s, std::size_t& column) {
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
        ++column;
    }
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::vector<Token> tokenize(std::string_view s, std::size_t column) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        if (is_space(s[i])) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        tokens.push_back({s.substr(start, i - start), column + start});
    }
    return tokens;
}

/// Splits text into directives. Blank lines and `comment_char` comments are skipped.
/// Lines without a ':' raise a ParseError unless `allow_bare` is set, in which
/// case the whole line becomes the key.
inline std::vector<Directive> directives(std::string_view text, char comment_char = '#', bool allow_bare = false) {
    std::vector<Directive> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (const auto hash = line.find(comment_char); hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t col = 1;
        line = trim(line, col);
        if (!line.empty()) {
            const auto colon = line.find(':');
            if (colon == std::string_view::npos) {
                if (!allow_bare) throw ParseError("expected 'key: value' directive", line_no, col);
                out.push_back({line_no, line, col, {}, col + line.size()});
            } else {
                std::size_t key_col = col;
                std::string_view key = trim(line.substr(0, colon), key_col);
                std::size_t value_col = col + colon + 1;
                std::string_view value = trim(line.substr(colon + 1), value_col);
                if (key.empty()) throw ParseError("missing directive name", line_no, col);
                out.push_back({line_no, key, key_col, value, value_col});
            }
        }
        if (end == text.size()) break;
        pos = end + 1;
    }
    return out;
}

inline long long parse_int(const Token& tok, std::size_t line) {
    long long value = 0;
    const char* first = tok.text.data();
    const char* last = first + tok.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError("expected integer, got '" + std::string(tok.text) + "'", line, tok.column);
    return value;
}

inline double parse_double(const Token& tok, std::size_t line) {
    double value = 0;
    const char* first = tok.text.data();
    const char* last = first + tok.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError("expected number, got '" + std::string(tok.text) + "'", line, tok.column);
    return value;
}

}  // namespace kcq::text
