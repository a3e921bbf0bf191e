#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "covering/error.hpp"

// Line-oriented tokenizer shared by the family-spec and scenario readers.
namespace covering::detail {

struct Token {
    enum class Type { ident, number, string, equals, lbracket, rbracket, comma };
    Type type;
    std::string text;  // unescaped contents for strings
    std::size_t column;
};

inline bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9') || c == '-'; }
inline bool is_number_char(char c) {
    return (c >= '0' && c <= '9') || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-';
}

/// Splits one line into tokens. '#' outside a quoted string starts a comment.
inline std::vector<Token> tokenize_line(std::string_view line, std::size_t line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        const std::size_t col = i + 1;
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
        } else if (c == '#') {
            break;
        } else if (c == '=') {
            out.push_back({Token::Type::equals, "=", col});
            ++i;
        } else if (c == '[') {
            out.push_back({Token::Type::lbracket, "[", col});
            ++i;
        } else if (c == ']') {
            out.push_back({Token::Type::rbracket, "]", col});
            ++i;
        } else if (c == ',') {
            out.push_back({Token::Type::comma, ",", col});
            ++i;
        } else if (c == '"') {
            std::string text;
            ++i;
            bool closed = false;
            while (i < line.size()) {
                if (line[i] == '\\' && i + 1 < line.size()) {
                    text += line[i + 1];
                    i += 2;
                } else if (line[i] == '"') {
                    closed = true;
                    ++i;
                    break;
                } else {
                    text += line[i++];
                }
            }
            if (!closed) throw ParseError(ParseError::Kind::syntax, line_no, col, "unterminated string");
            out.push_back({Token::Type::string, std::move(text), col});
        } else if (is_ident_start(c)) {
            std::size_t j = i;
            while (j < line.size() && is_ident_char(line[j])) ++j;
            out.push_back({Token::Type::ident, std::string(line.substr(i, j - i)), col});
            i = j;
        } else if ((c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+') {
            std::size_t j = i + 1;
            while (j < line.size() && is_number_char(line[j])) ++j;
            out.push_back({Token::Type::number, std::string(line.substr(i, j - i)), col});
            i = j;
        } else {
            throw ParseError(ParseError::Kind::syntax, line_no, col,
                             std::string("unexpected character '") + c + "'");
        }
    }
    return out;
}

/// Cursor over the tokens of one line with error reporting.
class TokenCursor {
public:
    TokenCursor(std::vector<Token> tokens, std::size_t line_no, std::size_t line_len)
        : tokens_(std::move(tokens)), line_(line_no), end_col_(line_len + 1) {}

    bool done() const { return pos_ >= tokens_.size(); }
    std::size_t line() const { return line_; }
    std::size_t column() const { return done() ? end_col_ : tokens_[pos_].column; }

    const Token* peek() const { return done() ? nullptr : &tokens_[pos_]; }

    bool accept(Token::Type t) {
        if (!done() && tokens_[pos_].type == t) {
            ++pos_;
            return true;
        }
        return false;
    }

    const Token& expect(Token::Type t, const char* what) {
        if (done() || tokens_[pos_].type != t) fail(std::string("expected ") + what);
        return tokens_[pos_++];
    }

    void expect_keyword(std::string_view kw) {
        if (done() || tokens_[pos_].type != Token::Type::ident || tokens_[pos_].text != kw)
            fail("expected '" + std::string(kw) + "'");
        ++pos_;
    }

    std::int64_t integer() {
        const std::size_t col = column();
        const Token& t = expect(Token::Type::number, "integer");
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw ParseError(ParseError::Kind::syntax, line_, col, "malformed integer '" + t.text + "'");
        return v;
    }

    std::uint64_t unsigned_integer() {
        const std::size_t col = column();
        const Token& t = expect(Token::Type::number, "non-negative integer");
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw ParseError(ParseError::Kind::syntax, line_, col, "malformed integer '" + t.text + "'");
        return v;
    }

    double real() {
        const std::size_t col = column();
        const Token& t = expect(Token::Type::number, "number");
        const char* first = t.text.data();
        if (*first == '+') ++first;
        double v = 0;
        auto [ptr, ec] = std::from_chars(first, t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw ParseError(ParseError::Kind::syntax, line_, col, "malformed number '" + t.text + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(ParseError::Kind::syntax, line_, column(), what);
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t line_;
    std::size_t end_col_;
};

/// Calls `fn(cursor)` for every non-blank line of `text`.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        ++line_no;
        auto tokens = tokenize_line(line, line_no);
        if (!tokens.empty()) {
            TokenCursor cursor(std::move(tokens), line_no, line.size());
            fn(cursor);
        }
        if (nl == text.size()) break;
        start = nl + 1;
    }
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace covering::detail
