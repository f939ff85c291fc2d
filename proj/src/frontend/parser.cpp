#include "dsol/frontend/parser.hpp"

#include <optional>
#include <set>

#include "dsol/frontend/render.hpp"

namespace dsol::frontend {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

struct UnsupportedConstruct {
    SourcePos pos;
    std::string message;
};

bool is_location(const Token& t) {
    return t.kind == TokenKind::Ident && (t.text == "memory" || t.text == "storage" || t.text == "calldata");
}

bool is_assign_op(const Token& t) {
    if (t.kind != TokenKind::Op) return false;
    static const std::set<std::string> ops = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="};
    return ops.count(t.text) > 0;
}

int binary_precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "|") return 5;
    if (op == "^") return 6;
    if (op == "&") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    if (op == "**") return 11;
    return 0;
}

class Parser {
public:
    Parser(const std::vector<Token>& tokens, const ParseOptions& options) : toks_(tokens), opts_(options) {
        end_ = {TokenKind::End, "<end>", tokens.empty() ? SourcePos{} : tokens.back().pos};
    }

    SourceUnit run() {
        SourceUnit unit;
        unit.file_id = opts_.file_id;
        std::set<std::string> names;
        while (!at_end()) {
            if (cur().kind == TokenKind::Annotation) {
                ++i_;
                continue;
            }
            if (cur().is_keyword("function")) {
                std::size_t start = i_;
                std::optional<FunctionDecl> fn;
                try {
                    fn = function_decl();
                } catch (const SyntaxError& err) {
                    record_skip(unit, start, err.pos(), err.what());
                } catch (const UnsupportedConstruct& u) {
                    record_skip(unit, start, u.pos, u.message);
                }
                if (fn) {
                    if (!names.insert(fn->name).second)
                        throw SyntaxError(fn->pos, {"unique function name"}, fn->name);
                    unit.functions.push_back(std::move(*fn));
                }
                continue;
            }
            unit.storage.push_back(storage_decl());
        }
        classify_storage_writes(unit);
        return unit;
    }

private:
    // token helpers

    bool at_end() const { return i_ >= toks_.size(); }

    const Token& cur() const { return at_end() ? end_ : toks_[i_]; }

    const Token& peek(std::size_t off) const { return i_ + off < toks_.size() ? toks_[i_ + off] : end_; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        throw SyntaxError(cur().pos, std::move(expected), cur().text);
    }

    void expect_punct(const char* p) {
        if (!cur().is_punct(p)) fail({std::string("'") + p + "'"});
        ++i_;
    }

    bool accept_punct(const char* p) {
        if (cur().is_punct(p)) {
            ++i_;
            return true;
        }
        return false;
    }

    std::string expect_ident() {
        if (cur().kind != TokenKind::Ident) fail({"identifier"});
        return toks_[i_++].text;
    }

    // error recovery: skip the function starting at `start`

    void record_skip(SourceUnit& unit, std::size_t start, SourcePos pos, const std::string& message) {
        std::string name = start + 1 < toks_.size() ? toks_[start + 1].text : std::string{};
        if (opts_.strict) throw SyntaxError(pos, {"function '" + name + "' to parse cleanly"}, message);
        unit.skips.push_back({name, pos, message});
        i_ = start + 1;
        while (!at_end() && !cur().is_punct("{")) {
            if (cur().is_keyword("function")) return;
            ++i_;
        }
        if (at_end()) throw SyntaxError(pos, {"'{'"}, "<end>");
        int depth = 0;
        while (!at_end()) {
            if (cur().is_punct("{")) ++depth;
            if (cur().is_punct("}")) {
                --depth;
                if (depth == 0) {
                    ++i_;
                    return;
                }
            }
            ++i_;
        }
    }

    // declarations

    /// Collects the spelling of a type written as a run of tokens; returns empty
    /// when the tokens at the cursor cannot start a type.
    std::string type_spelling() {
        std::string out;
        if (cur().is_keyword("mapping")) {
            out += "mapping";
            ++i_;
            if (!cur().is_punct("(")) fail({"'('"});
            int depth = 0;
            do {
                if (cur().is_punct("(")) ++depth;
                if (cur().is_punct(")")) --depth;
                if (at_end()) fail({"')'"});
                out += cur().text;
                if (cur().kind == TokenKind::Type && cur().text == "address" && peek(1).is(TokenKind::Ident, "payable"))
                    out += " ";
                ++i_;
            } while (depth > 0);
        } else if (cur().kind == TokenKind::Type || cur().kind == TokenKind::Ident) {
            out += cur().text;
            bool address = cur().text == "address";
            ++i_;
            if (address && cur().is(TokenKind::Ident, "payable")) {
                out += " payable";
                ++i_;
            }
        } else {
            return {};
        }
        while (cur().is_punct("[")) {
            if (peek(1).is_punct("]")) {
                out += "[]";
                i_ += 2;
            } else if (peek(1).kind == TokenKind::Int && peek(2).is_punct("]")) {
                out += "[" + peek(1).text + "]";
                i_ += 3;
            } else {
                break;
            }
        }
        return out;
    }

    StorageDecl storage_decl() {
        StorageDecl decl;
        decl.pos = cur().pos;
        auto spelling = type_spelling();
        if (spelling.empty()) fail({"'function'", "storage declaration"});
        decl.type = types::parse_type(spelling);
        while (is_location(cur())) ++i_;
        decl.name = expect_ident();
        expect_punct(";");
        if (cur().kind == TokenKind::Annotation && cur().pos.line == toks_[i_ - 1].pos.line) {
            decl.attribute = cur().text;
            ++i_;
        }
        return decl;
    }

    /// Token group of one parameter or return entry, split at depth-0 commas.
    std::vector<std::vector<Token>> paren_groups() {
        expect_punct("(");
        std::vector<std::vector<Token>> groups;
        if (accept_punct(")")) return groups;
        groups.emplace_back();
        int depth = 0;
        while (true) {
            if (at_end()) fail({"')'"});
            const auto& t = cur();
            if (t.kind == TokenKind::Error) fail({"parameter"});
            if (depth == 0 && t.is_punct(")")) {
                ++i_;
                break;
            }
            if (depth == 0 && t.is_punct(",")) {
                groups.emplace_back();
                ++i_;
                continue;
            }
            if (t.is_punct("(") || t.is_punct("[")) ++depth;
            if (t.is_punct(")") || t.is_punct("]")) --depth;
            groups.back().push_back(t);
            ++i_;
        }
        for (const auto& g : groups)
            if (g.empty()) fail({"parameter"});
        return groups;
    }

    static std::string spell(const std::vector<Token>& toks, std::size_t begin, std::size_t end) {
        std::string out;
        for (std::size_t k = begin; k < end; ++k) {
            if (k > begin && (toks[k].kind == TokenKind::Ident || toks[k].kind == TokenKind::Type) &&
                (toks[k - 1].kind == TokenKind::Ident || toks[k - 1].kind == TokenKind::Type))
                out += ' ';
            out += toks[k].text;
        }
        return out;
    }

    FunctionDecl function_decl() {
        FunctionDecl fn;
        fn.pos = cur().pos;
        fn.span.start_line = cur().pos.line;
        ++i_; // function
        fn.name = expect_ident();
        for (const auto& group : paren_groups()) {
            Param p;
            std::size_t end = group.size();
            if (group.back().kind != TokenKind::Ident) throw SyntaxError(group.back().pos, {"parameter name"}, group.back().text);
            p.name = group.back().text;
            --end;
            while (end > 0 && is_location(group[end - 1])) {
                p.location = group[end - 1].text;
                --end;
            }
            if (end > 0) p.type = types::parse_type(spell(group, 0, end));
            fn.params.push_back(std::move(p));
        }
        while (!cur().is_punct("{")) {
            if (cur().is_keyword("returns")) {
                ++i_;
                fn.has_returns = true;
                for (const auto& group : paren_groups()) {
                    std::size_t end = group.size();
                    if (end > 1 && group.back().kind == TokenKind::Ident) --end;
                    while (end > 1 && is_location(group[end - 1])) --end;
                    fn.returns.push_back(types::parse_type(spell(group, 0, end)));
                }
                continue;
            }
            if (cur().kind == TokenKind::Ident) {
                fn.modifiers.push_back(cur().text);
                ++i_;
                continue;
            }
            fail({"'{'", "'returns'", "modifier"});
        }
        fn.body = block();
        fn.span.end_line = toks_[i_ - 1].pos.line;
        return fn;
    }

    // statements

    std::vector<Stmt> block() {
        expect_punct("{");
        std::vector<Stmt> out;
        while (!cur().is_punct("}")) {
            if (at_end()) fail({"'}'"});
            if (cur().kind == TokenKind::Annotation) {
                ++i_;
                continue;
            }
            out.push_back(statement());
        }
        ++i_;
        return out;
    }

    Stmt statement() {
        const auto& t = cur();
        if (t.kind == TokenKind::Error) fail({"statement"});
        if (t.is_keyword("assembly")) throw UnsupportedConstruct{t.pos, "inline assembly is not supported"};
        if (t.is_keyword("if")) return if_stmt();
        if (t.is_keyword("while")) {
            Stmt s;
            s.kind = StmtKind::While;
            s.pos = t.pos;
            ++i_;
            expect_punct("(");
            s.exprs.push_back(expr());
            expect_punct(")");
            s.body = block();
            return s;
        }
        if (t.is_keyword("return")) {
            Stmt s;
            s.kind = StmtKind::Return;
            s.pos = t.pos;
            ++i_;
            if (!cur().is_punct(";")) {
                auto value = expr();
                if (value.kind == ExprKind::Tuple)
                    s.exprs = std::move(value.args);
                else
                    s.exprs.push_back(std::move(value));
            }
            expect_punct(";");
            return s;
        }
        if (t.is_keyword("require")) {
            Stmt s;
            s.kind = StmtKind::Require;
            s.pos = t.pos;
            ++i_;
            expect_punct("(");
            s.exprs.push_back(expr());
            if (accept_punct(",")) s.exprs.push_back(expr());
            expect_punct(")");
            expect_punct(";");
            return s;
        }
        if (t.is_keyword("emit")) {
            Stmt s;
            s.kind = StmtKind::ExprStmt;
            s.emit = true;
            s.pos = t.pos;
            ++i_;
            s.exprs.push_back(expr());
            if (s.exprs[0].kind != ExprKind::Call) fail({"event call"});
            expect_punct(";");
            return s;
        }
        if (auto decl = try_var_decl()) return std::move(*decl);

        Stmt s;
        s.pos = t.pos;
        auto lhs = expr();
        if (is_assign_op(cur())) {
            s.kind = StmtKind::Assign;
            s.op = cur().text;
            ++i_;
            if (lvalue_root(lhs).empty()) throw SyntaxError(lhs.pos, {"assignable expression"}, "expression");
            s.exprs.push_back(std::move(lhs));
            s.exprs.push_back(expr());
        } else {
            s.kind = StmtKind::ExprStmt;
            s.exprs.push_back(std::move(lhs));
        }
        expect_punct(";");
        return s;
    }

    Stmt if_stmt() {
        Stmt s;
        s.kind = StmtKind::If;
        s.pos = cur().pos;
        ++i_;
        expect_punct("(");
        s.exprs.push_back(expr());
        expect_punct(")");
        s.body = block();
        if (cur().is_keyword("else")) {
            ++i_;
            s.has_else = true;
            if (cur().is_keyword("if"))
                s.else_body.push_back(if_stmt());
            else
                s.else_body = block();
        }
        return s;
    }

    std::optional<Stmt> try_var_decl() {
        const auto& t = cur();
        bool starts_type = t.kind == TokenKind::Type || t.is_keyword("mapping") ||
                           (t.kind == TokenKind::Ident &&
                            (peek(1).kind == TokenKind::Ident || peek(1).is_punct("[")));
        if (!starts_type) return std::nullopt;
        std::size_t save = i_;
        Stmt s;
        s.kind = StmtKind::VarDecl;
        s.pos = t.pos;
        std::string spelling;
        try {
            spelling = type_spelling();
        } catch (const SyntaxError&) {
            i_ = save;
            return std::nullopt;
        }
        if (spelling.empty()) {
            i_ = save;
            return std::nullopt;
        }
        if (is_location(cur())) {
            s.location = cur().text;
            ++i_;
        }
        if (cur().kind != TokenKind::Ident || !(peek(1).is_op("=") || peek(1).is_punct(";"))) {
            i_ = save;
            return std::nullopt;
        }
        s.decl_type = types::parse_type(spelling);
        s.name = cur().text;
        ++i_;
        if (cur().is_op("=")) {
            ++i_;
            s.has_init = true;
            s.exprs.push_back(expr());
        }
        expect_punct(";");
        return s;
    }

    // expressions

    Expr expr(int min_prec = 1) {
        Expr lhs = unary();
        for (;;) {
            const auto& t = cur();
            if (t.kind != TokenKind::Op) break;
            int prec = binary_precedence(t.text);
            if (prec == 0 || prec < min_prec) break;
            std::string op = t.text;
            SourcePos pos = lhs.pos;
            ++i_;
            // ** is right associative
            Expr rhs = expr(op == "**" ? prec : prec + 1);
            lhs = Expr::binary(op, std::move(lhs), std::move(rhs), pos);
        }
        return lhs;
    }

    Expr unary() {
        const auto& t = cur();
        if (t.kind == TokenKind::Op && (t.text == "!" || t.text == "-" || t.text == "~")) {
            Expr e;
            e.kind = ExprKind::Unary;
            e.text = t.text;
            e.pos = t.pos;
            ++i_;
            e.args.push_back(unary());
            return e;
        }
        return postfix(primary());
    }

    std::vector<Expr> expr_list(const char* close) {
        std::vector<Expr> out;
        if (accept_punct(close)) return out;
        for (;;) {
            out.push_back(expr());
            if (accept_punct(close)) return out;
            expect_punct(",");
        }
    }

    Expr primary() {
        const auto& t = cur();
        switch (t.kind) {
        case TokenKind::Ident:
        case TokenKind::Type: {
            ++i_;
            auto name = t.text;
            if (name == "address" && cur().is(TokenKind::Ident, "payable")) {
                name += " payable";
                ++i_;
            }
            return Expr::var(name, t.pos);
        }
        case TokenKind::Int:
            ++i_;
            return Expr::constant(t.text, t.text.rfind("0x", 0) == 0 ? ConstKind::Hex : ConstKind::Dec, t.pos);
        case TokenKind::String: ++i_; return Expr::constant(t.text, ConstKind::Str, t.pos);
        case TokenKind::Keyword:
            if (t.text == "true" || t.text == "false") {
                ++i_;
                return Expr::constant(t.text, ConstKind::Bool, t.pos);
            }
            break;
        case TokenKind::Punct:
            if (t.text == "(") {
                SourcePos pos = t.pos;
                ++i_;
                auto items = expr_list(")");
                if (items.size() == 1) return std::move(items[0]);
                Expr e;
                e.kind = ExprKind::Tuple;
                e.pos = pos;
                e.args = std::move(items);
                return e;
            }
            if (t.text == "[") {
                Expr e;
                e.kind = ExprKind::ArrayLit;
                e.pos = t.pos;
                ++i_;
                e.args = expr_list("]");
                return e;
            }
            break;
        default: break;
        }
        fail({"expression"});
    }

    Expr postfix(Expr base) {
        for (;;) {
            if (cur().is_punct("(")) {
                SourcePos pos = base.pos;
                ++i_;
                auto args = expr_list(")");
                base = Expr::call(std::move(base), std::move(args), pos);
            } else if (cur().is_punct("[")) {
                SourcePos pos = base.pos;
                ++i_;
                Expr index = expr();
                Expr e;
                e.pos = pos;
                if (accept_punct(":")) {
                    Expr end = expr();
                    e.kind = ExprKind::SliceRange;
                    e.args.push_back(std::move(base));
                    e.args.push_back(std::move(index));
                    e.args.push_back(std::move(end));
                } else {
                    e.kind = ExprKind::Index;
                    e.args.push_back(std::move(base));
                    e.args.push_back(std::move(index));
                }
                expect_punct("]");
                base = std::move(e);
            } else if (cur().is_punct(".")) {
                SourcePos pos = base.pos;
                ++i_;
                if (cur().kind != TokenKind::Ident && cur().kind != TokenKind::Type) fail({"member name"});
                Expr e;
                e.kind = ExprKind::Member;
                e.text = cur().text;
                e.pos = pos;
                e.args.push_back(std::move(base));
                ++i_;
                base = std::move(e);
            } else {
                return base;
            }
        }
    }

    void classify_storage_writes(SourceUnit& unit) {
        for (auto& fn : unit.functions) {
            for_each_stmt(fn.body, [&](Stmt& s) {
                if (s.kind == StmtKind::Assign || s.kind == StmtKind::StorageWrite) {
                    bool storage = is_storage_name(unit, lvalue_root(s.lhs()));
                    s.kind = storage ? StmtKind::StorageWrite : StmtKind::Assign;
                }
            });
        }
    }

    const std::vector<Token>& toks_;
    const ParseOptions& opts_;
    Token end_;
    std::size_t i_ = 0;
};

} // namespace

SyntaxError::SyntaxError(SourcePos pos, std::vector<std::string> expected, std::string found)
    : std::runtime_error("syntax error at " + pos.str() + ": expected " + join(expected) + ", found '" + found + "'"),
      pos_(pos), expected_(std::move(expected)), found_(std::move(found)) {}

SourceUnit parse_unit(const std::vector<Token>& tokens, const ParseOptions& options) {
    return Parser(tokens, options).run();
}

SourceUnit parse_source(std::string_view text, const ParseOptions& options) {
    auto unit = parse_unit(tokenize(text), options);
    unit.text = std::string(text);
    return unit;
}

SourceUnit canonicalize(std::string_view text, const ParseOptions& options) {
    auto first = parse_source(text, options);
    auto unit = canonicalize(first);
    unit.skips = std::move(first.skips);
    return unit;
}

SourceUnit canonicalize(const SourceUnit& unit) {
    ParseOptions opts;
    opts.file_id = unit.file_id;
    auto canonical = parse_source(render_unit(unit), opts);
    canonical.skips = unit.skips;
    return canonical;
}

} // namespace dsol::frontend
