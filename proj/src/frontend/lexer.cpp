#include "dsol/frontend/lexer.hpp"

#include <array>
#include <cctype>

#include "dsol/types/soltype.hpp"

namespace dsol::frontend {

namespace {

constexpr std::array kKeywords = {
    "function", "if",  "else",     "while", "return",   "require", "returns",
    "mapping",  "emit", "assembly", "true", "false",
};

// Longest first so that maximal munch works by linear scan.
constexpr std::array kOps = {
    "<<=", ">>=", "**", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "+=", "-=", "*=", "/=",
    "%=",  "&=",  "|=", "^=", "=>", "=",  "<",  ">",  "+",  "-",  "*",  "/",  "%",  "&",  "|",
    "^",   "!",   "~",  "?",
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

bool is_type_word(std::string_view w) {
    if (w == "uint" || w == "int" || w == "byte" || w == "address") return true;
    return dsol::types::is_known_type_spelling(w) && w != "mapping";
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (skip_trivia(out), pos_ < text_.size()) out.push_back(next());
        return out;
    }

private:
    char peek(std::size_t off = 0) const { return pos_ + off < text_.size() ? text_[pos_ + off] : '\0'; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia(std::vector<Token>& out) {
        for (;;) {
            while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(peek()))) advance();
            if (peek() == '/' && peek(1) == '/') {
                SourcePos at{line_, col_};
                std::string body;
                while (pos_ < text_.size() && peek() != '\n') {
                    body += peek();
                    advance();
                }
                constexpr std::string_view marker = "// attribute:";
                if (body.rfind(marker, 0) == 0) {
                    auto label = body.substr(marker.size());
                    auto b = label.find_first_not_of(" \t");
                    auto e = label.find_last_not_of(" \t\r");
                    label = b == std::string::npos ? std::string{} : label.substr(b, e - b + 1);
                    out.push_back({TokenKind::Annotation, label, at});
                }
                continue;
            }
            if (peek() == '/' && peek(1) == '*') {
                advance();
                advance();
                while (pos_ < text_.size() && !(peek() == '*' && peek(1) == '/')) advance();
                if (pos_ < text_.size()) {
                    advance();
                    advance();
                }
                continue;
            }
            return;
        }
    }

    Token next() {
        SourcePos at{line_, col_};
        char c = peek();
        if (is_ident_start(c)) {
            std::string word;
            while (is_ident_char(peek())) {
                word += peek();
                advance();
            }
            for (auto kw : kKeywords)
                if (word == kw) return {TokenKind::Keyword, word, at};
            if (is_type_word(word)) return {TokenKind::Type, word, at};
            return {TokenKind::Ident, word, at};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string lit;
            if (c == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
                lit += "0x";
                advance();
                advance();
                while (std::isxdigit(static_cast<unsigned char>(peek()))) {
                    lit += peek();
                    advance();
                }
            } else {
                while (std::isdigit(static_cast<unsigned char>(peek()))) {
                    lit += peek();
                    advance();
                }
            }
            return {TokenKind::Int, lit, at};
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            advance();
            std::string body;
            while (pos_ < text_.size() && peek() != quote && peek() != '\n') {
                if (peek() == '\\' && pos_ + 1 < text_.size()) {
                    body += peek();
                    advance();
                }
                body += peek();
                advance();
            }
            if (peek() != quote) return {TokenKind::Error, std::string(1, quote) + body, at};
            advance();
            return {TokenKind::String, body, at};
        }
        if (std::string_view("(){}[],;:.").find(c) != std::string_view::npos) {
            advance();
            return {TokenKind::Punct, std::string(1, c), at};
        }
        for (std::string_view op : kOps) {
            if (text_.substr(pos_, op.size()) == op) {
                for (std::size_t i = 0; i < op.size(); ++i) advance();
                return {TokenKind::Op, std::string(op), at};
            }
        }
        advance();
        return {TokenKind::Error, std::string(1, c), at};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

} // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

std::string join_tokens(const std::vector<Token>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        if (t.kind == TokenKind::String)
            out += "\"" + t.text + "\"";
        else if (t.kind == TokenKind::Annotation)
            out += "// attribute: " + t.text;
        else
            out += t.text;
    }
    return out;
}

const char* token_kind_name(TokenKind kind) {
    switch (kind) {
    case TokenKind::Ident: return "Ident";
    case TokenKind::Type: return "Type";
    case TokenKind::Keyword: return "Keyword";
    case TokenKind::Int: return "Int";
    case TokenKind::String: return "String";
    case TokenKind::Annotation: return "Annotation";
    case TokenKind::Punct: return "Punct";
    case TokenKind::Op: return "Op";
    case TokenKind::Error: return "Error";
    case TokenKind::End: return "End";
    }
    return "?";
}

} // namespace dsol::frontend
