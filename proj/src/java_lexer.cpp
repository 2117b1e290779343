#include "llmsast/java_lexer.hpp"

#include <algorithm>
#include <array>

namespace llmsast::java {
namespace {

constexpr std::array<std::string_view, 53> kKeywords = {
    "abstract", "assert",     "boolean",   "break",    "byte",       "case",      "catch",   "char",
    "class",    "const",      "continue",  "default",  "do",         "double",    "else",    "enum",
    "extends",  "final",      "finally",   "float",    "for",        "goto",      "if",      "implements",
    "import",   "instanceof", "int",       "interface", "long",      "native",    "new",     "package",
    "private",  "protected",  "public",    "return",   "short",      "static",    "strictfp", "super",
    "switch",   "synchronized", "this",    "throw",    "throws",     "transient", "try",     "void",
    "volatile", "while",      "true",      "false",    "null",
};

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

} // namespace

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    auto emit = [&](TokenKind kind, std::size_t start) { out.push_back({kind, src.substr(start, i - start), start}); };

    while (i < n) {
        const std::size_t start = i;
        const char c = src[i];

        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
            while (i < n && (src[i] == ' ' || src[i] == '\t' || src[i] == '\n' || src[i] == '\r' || src[i] == '\f')) ++i;
            emit(TokenKind::whitespace, start);
        } else if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n' && src[i] != '\r') ++i;
            emit(TokenKind::line_comment, start);
        } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            const auto close = src.find("*/", i + 2);
            if (close == std::string_view::npos) throw LexError("unterminated block comment", start);
            i = close + 2;
            emit(TokenKind::block_comment, start);
        } else if (c == '"' && src.substr(i, 3) == "\"\"\"") {
            i += 3;
            bool closed = false;
            while (i < n) {
                if (src[i] == '\\') {
                    i += 2;
                } else if (src.substr(i, 3) == "\"\"\"") {
                    i += 3;
                    closed = true;
                    break;
                } else {
                    ++i;
                }
            }
            if (!closed) throw LexError("unterminated text block", start);
            emit(TokenKind::text_block, start);
        } else if (c == '"' || c == '\'') {
            ++i;
            bool closed = false;
            while (i < n) {
                const char d = src[i];
                if (d == '\\') {
                    i += 2;
                } else if (d == '\n' || d == '\r') {
                    break;
                } else if (d == c) {
                    ++i;
                    closed = true;
                    break;
                } else {
                    ++i;
                }
            }
            if (!closed || i > n) {
                throw LexError(c == '"' ? "unterminated string literal" : "unterminated character literal", start);
            }
            emit(c == '"' ? TokenKind::string : TokenKind::character, start);
        } else if (is_ident_start(c)) {
            while (i < n && is_ident_char(src[i])) ++i;
            emit(is_keyword(src.substr(start, i - start)) ? TokenKind::keyword : TokenKind::identifier, start);
        } else if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(src[i + 1]))) {
            while (i < n) {
                const char d = src[i];
                if (is_ident_char(d) || d == '.') {
                    ++i;
                } else if ((d == '+' || d == '-') && (src[i - 1] == 'e' || src[i - 1] == 'E' || src[i - 1] == 'p' ||
                                                       src[i - 1] == 'P') &&
                           !(src[start] == '0' && start + 1 < n && (src[start + 1] == 'x' || src[start + 1] == 'X') &&
                             (src[i - 1] == 'e' || src[i - 1] == 'E'))) {
                    ++i;
                } else {
                    break;
                }
            }
            emit(TokenKind::number, start);
        } else {
            ++i;
            emit(TokenKind::punct, start);
        }
    }
    return out;
}

} // namespace llmsast::java
