#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsol/frontend/position.hpp"
#include "dsol/types/soltype.hpp"

namespace dsol::frontend {

/// The four operator classes of the typing syntax.
enum class OpClass : std::uint8_t { Blop, Numop, Cmpop, Bitop };

OpClass op_class(const std::string& op);
const char* op_class_name(OpClass c);

enum class ExprKind : std::uint8_t {
    Var,
    Const,
    Binary,
    Unary,
    Tuple,
    ArrayLit,
    Call,       // args[0] is the callee, the rest are arguments
    Index,      // args[0][args[1]]
    SliceRange, // args[0][args[1]:args[2]]
    Member,     // args[0].text
};

enum class ConstKind : std::uint8_t { Dec, Hex, Str, Bool };

struct Expr {
    ExprKind kind = ExprKind::Var;
    std::string text; // variable name, literal spelling, operator, or member name
    ConstKind const_kind = ConstKind::Dec;
    std::vector<Expr> args;
    SourcePos pos;

    OpClass op_class() const { return frontend::op_class(text); }

    static Expr var(std::string name, SourcePos pos = {});
    static Expr constant(std::string text, ConstKind kind, SourcePos pos = {});
    static Expr binary(std::string op, Expr lhs, Expr rhs, SourcePos pos = {});
    static Expr call(Expr callee, std::vector<Expr> args, SourcePos pos = {});
};

enum class StmtKind : std::uint8_t {
    Assign,
    StorageWrite,
    ExprStmt,
    Require,
    If,
    While,
    Return,
    VarDecl,
};

struct Stmt {
    StmtKind kind = StmtKind::ExprStmt;
    SourcePos pos;

    // Assign / StorageWrite: lhs `op` rhs, op is "=" or a compound operator.
    // ExprStmt: exprs[0]. Require: exprs = {cond[, message]}. Return: exprs = values.
    // If / While: exprs[0] is the condition.
    std::vector<Expr> exprs;
    std::string op;

    std::vector<Stmt> body;
    std::vector<Stmt> else_body;
    bool has_else = false;
    bool emit = false;

    // VarDecl
    types::SolType decl_type;
    std::string location;
    std::string name;
    bool has_init = false;

    const Expr& lhs() const { return exprs.at(0); }
    const Expr& rhs() const { return exprs.at(1); }
    const Expr& cond() const { return exprs.at(0); }
    const Expr& init() const { return exprs.at(0); }
};

struct Param {
    std::string name;
    std::optional<types::SolType> type;
    std::string location;
};

struct Span {
    int start_line = 0;
    int end_line = 0;
    bool operator==(const Span&) const = default;
};

struct FunctionDecl {
    std::string name;
    std::vector<Param> params;
    std::vector<std::string> modifiers;
    std::vector<types::SolType> returns;
    bool has_returns = false;
    std::vector<Stmt> body;
    Span span;
    SourcePos pos;
};

struct StorageDecl {
    types::SolType type;
    std::string name;
    std::optional<std::string> attribute;
    SourcePos pos;
};

struct SkipReport {
    std::string function;
    SourcePos pos;
    std::string message;
};

struct SourceUnit {
    std::string file_id;
    std::string text;
    std::vector<StorageDecl> storage;
    std::vector<FunctionDecl> functions;
    std::vector<SkipReport> skips;

    const FunctionDecl* find_function(const std::string& name) const;
    FunctionDecl* find_function(const std::string& name);
    const StorageDecl* find_storage(const std::string& name) const;
    StorageDecl* find_storage(const std::string& name);
};

/// Names that denote storage: declared storage variables plus the decompiler's
/// synthetic stor_N / store_N identifiers.
bool is_storage_name(const SourceUnit& unit, const std::string& name);
bool is_synthetic_storage_name(const std::string& name);

/// Root variable of an lvalue chain (a[b].c -> a), or empty if none.
std::string lvalue_root(const Expr& e);

/// Visits every statement in preorder (if/while before their bodies, then before else).
template <typename F>
void for_each_stmt(const std::vector<Stmt>& body, F&& f) {
    for (const auto& s : body) {
        f(s);
        for_each_stmt(s.body, f);
        for_each_stmt(s.else_body, f);
    }
}

template <typename F>
void for_each_stmt(std::vector<Stmt>& body, F&& f) {
    for (auto& s : body) {
        f(s);
        for_each_stmt(s.body, f);
        for_each_stmt(s.else_body, f);
    }
}

template <typename F>
void for_each_expr(const Expr& e, F&& f) {
    f(e);
    for (const auto& a : e.args) for_each_expr(a, f);
}

template <typename F>
void for_each_expr(Expr& e, F&& f) {
    f(e);
    for (auto& a : e.args) for_each_expr(a, f);
}

} // namespace dsol::frontend
