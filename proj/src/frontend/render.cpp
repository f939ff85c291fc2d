#include "dsol/frontend/render.hpp"

namespace dsol::frontend {

namespace {

constexpr int kPostfixPrec = 13;
constexpr int kUnaryPrec = 12;

int precedence(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Binary: {
        const auto& op = e.text;
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
        return 11; // **
    }
    case ExprKind::Unary: return kUnaryPrec;
    default: return kPostfixPrec + 1;
    }
}

std::string wrap(const Expr& e, bool parens) {
    auto s = render_expr(e);
    return parens ? "(" + s + ")" : s;
}

std::string list(const std::vector<Expr>& items, std::size_t from = 0) {
    std::string out;
    for (std::size_t i = from; i < items.size(); ++i) {
        if (i > from) out += ", ";
        out += render_expr(items[i]);
    }
    return out;
}

std::string quote(const std::string& body) { return "\"" + body + "\""; }

void render_body(const std::vector<Stmt>& body, int depth, std::string& out);

void render_stmt(const Stmt& s, int depth, std::string& out) {
    std::string indent(static_cast<std::size_t>(depth) * 4, ' ');
    switch (s.kind) {
    case StmtKind::If: {
        out += indent + render_stmt_line(s) + " {\n";
        render_body(s.body, depth + 1, out);
        const Stmt* cur = &s;
        while (cur->has_else) {
            if (cur->else_body.size() == 1 && cur->else_body[0].kind == StmtKind::If) {
                cur = &cur->else_body[0];
                out += indent + "} else " + render_stmt_line(*cur) + " {\n";
                render_body(cur->body, depth + 1, out);
                continue;
            }
            out += indent + "} else {\n";
            render_body(cur->else_body, depth + 1, out);
            break;
        }
        out += indent + "}\n";
        return;
    }
    case StmtKind::While:
        out += indent + render_stmt_line(s) + " {\n";
        render_body(s.body, depth + 1, out);
        out += indent + "}\n";
        return;
    default: out += indent + render_stmt_line(s) + "\n"; return;
    }
}

void render_body(const std::vector<Stmt>& body, int depth, std::string& out) {
    for (const auto& s : body) render_stmt(s, depth, out);
}

} // namespace

std::string render_expr(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Var: return e.text;
    case ExprKind::Const: return e.const_kind == ConstKind::Str ? quote(e.text) : e.text;
    case ExprKind::Binary: {
        int p = precedence(e);
        bool right_assoc = e.text == "**";
        const auto& l = e.args[0];
        const auto& r = e.args[1];
        bool lp = right_assoc ? precedence(l) <= p : precedence(l) < p;
        bool rp = right_assoc ? precedence(r) < p : precedence(r) <= p;
        return wrap(l, lp) + " " + e.text + " " + wrap(r, rp);
    }
    case ExprKind::Unary: return e.text + wrap(e.args[0], precedence(e.args[0]) < kUnaryPrec);
    case ExprKind::Tuple: return "(" + list(e.args) + ")";
    case ExprKind::ArrayLit: return "[" + list(e.args) + "]";
    case ExprKind::Call:
        return wrap(e.args[0], precedence(e.args[0]) <= kPostfixPrec) + "(" + list(e.args, 1) + ")";
    case ExprKind::Index:
        return wrap(e.args[0], precedence(e.args[0]) <= kPostfixPrec) + "[" + render_expr(e.args[1]) + "]";
    case ExprKind::SliceRange:
        return wrap(e.args[0], precedence(e.args[0]) <= kPostfixPrec) + "[" + render_expr(e.args[1]) + ":" +
               render_expr(e.args[2]) + "]";
    case ExprKind::Member: return wrap(e.args[0], precedence(e.args[0]) <= kPostfixPrec) + "." + e.text;
    }
    return {};
}

std::string render_type(const types::SolType& t) { return t.str(); }

std::string render_stmt_line(const Stmt& s) {
    switch (s.kind) {
    case StmtKind::Assign:
    case StmtKind::StorageWrite: return render_expr(s.lhs()) + " " + s.op + " " + render_expr(s.rhs()) + ";";
    case StmtKind::ExprStmt: return (s.emit ? "emit " : "") + render_expr(s.exprs[0]) + ";";
    case StmtKind::Require: return "require(" + list(s.exprs) + ");";
    case StmtKind::If: return "if (" + render_expr(s.cond()) + ")";
    case StmtKind::While: return "while (" + render_expr(s.cond()) + ")";
    case StmtKind::Return:
        if (s.exprs.empty()) return "return;";
        if (s.exprs.size() == 1) return "return " + render_expr(s.exprs[0]) + ";";
        return "return (" + list(s.exprs) + ");";
    case StmtKind::VarDecl: {
        std::string out = render_type(s.decl_type);
        if (!s.location.empty()) out += " " + s.location;
        out += " " + s.name;
        if (s.has_init) out += " = " + render_expr(s.init());
        return out + ";";
    }
    }
    return {};
}

std::string render_function(const FunctionDecl& fn) {
    std::string out = "function " + fn.name + "(";
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
        if (i) out += ", ";
        const auto& p = fn.params[i];
        if (p.type) out += render_type(*p.type) + " ";
        if (!p.location.empty()) out += p.location + " ";
        out += p.name;
    }
    out += ")";
    for (const auto& m : fn.modifiers) out += " " + m;
    if (fn.has_returns) {
        out += " returns (";
        for (std::size_t i = 0; i < fn.returns.size(); ++i) {
            if (i) out += ", ";
            out += render_type(fn.returns[i]);
        }
        out += ")";
    }
    out += " {\n";
    render_body(fn.body, 1, out);
    out += "}\n";
    return out;
}

std::string render_storage(const StorageDecl& decl) {
    std::string out = render_type(decl.type) + " " + decl.name + ";";
    if (decl.attribute) out += " // attribute: " + *decl.attribute;
    return out;
}

std::string render_unit(const SourceUnit& unit) {
    std::string out;
    for (const auto& s : unit.storage) out += render_storage(s) + "\n";
    for (std::size_t i = 0; i < unit.functions.size(); ++i) {
        if (!out.empty()) out += "\n";
        out += render_function(unit.functions[i]);
    }
    return out;
}

} // namespace dsol::frontend
