#pragma once

#include "llmsast/error.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace llmsast::java {

enum class TokenKind {
    identifier,
    keyword,
    number,
    string,     ///< "..." including quotes
    text_block, ///< """...""" including delimiters
    character,  ///< '...' including quotes
    punct,      ///< a single punctuation character
    whitespace, ///< spaces, tabs and line breaks
    line_comment,
    block_comment,
};

struct Token {
    TokenKind kind;
    std::string_view text; ///< view into the lexed source
    std::size_t offset;
};

/// Unterminated block comment, string, char or text block.
class LexError : public Error {
public:
    LexError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Lexer-level tokenisation; the concatenation of all token texts equals the
/// input. Not a parser: operators come out one character at a time.
std::vector<Token> lex(std::string_view source);

bool is_keyword(std::string_view word);

inline bool is_trivia(TokenKind k) {
    return k == TokenKind::whitespace || k == TokenKind::line_comment || k == TokenKind::block_comment;
}

inline bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
}

} // namespace llmsast::java
