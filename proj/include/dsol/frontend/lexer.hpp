#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dsol/frontend/position.hpp"

namespace dsol::frontend {

enum class TokenKind : std::uint8_t {
    Ident,
    Type,       // elementary type keyword (uint256, address, bytes32, ...)
    Keyword,    // function, if, else, while, return, require, returns, mapping, emit, assembly
    Int,        // decimal or hex literal
    String,     // quoted literal, text holds the unquoted body
    Annotation, // trailing `// attribute: <Label>` comment, text holds the label
    Punct,      // ( ) { } [ ] , ; : .
    Op,         // operators, including compound assignment
    Error,      // character the lexer does not understand
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    SourcePos pos;

    bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
    bool is_punct(std::string_view t) const { return is(TokenKind::Punct, t); }
    bool is_op(std::string_view t) const { return is(TokenKind::Op, t); }
    bool is_keyword(std::string_view t) const { return is(TokenKind::Keyword, t); }
};

/// Splits pseudocode into tokens. Comments and whitespace are dropped except
/// attribute annotations. Never throws: unknown characters become Error tokens.
/// The returned stream does not include the End token.
std::vector<Token> tokenize(std::string_view text);

/// Joins tokens back into text with single spaces, quoting strings again.
std::string join_tokens(const std::vector<Token>& tokens);

const char* token_kind_name(TokenKind kind);

} // namespace dsol::frontend
