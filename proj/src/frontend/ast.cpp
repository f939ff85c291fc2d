#include "dsol/frontend/ast.hpp"

#include <stdexcept>

namespace dsol::frontend {

OpClass op_class(const std::string& op) {
    if (op == "&&" || op == "||" || op == "!") return OpClass::Blop;
    if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") return OpClass::Cmpop;
    if (op == "&" || op == "|" || op == "^" || op == "<<" || op == ">>" || op == "~") return OpClass::Bitop;
    if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%" || op == "**") return OpClass::Numop;
    throw std::invalid_argument("not an operator: " + op);
}

const char* op_class_name(OpClass c) {
    switch (c) {
    case OpClass::Blop: return "blop";
    case OpClass::Numop: return "numop";
    case OpClass::Cmpop: return "cmpop";
    case OpClass::Bitop: return "bitop";
    }
    return "?";
}

Expr Expr::var(std::string name, SourcePos pos) {
    Expr e;
    e.kind = ExprKind::Var;
    e.text = std::move(name);
    e.pos = pos;
    return e;
}

Expr Expr::constant(std::string text, ConstKind kind, SourcePos pos) {
    Expr e;
    e.kind = ExprKind::Const;
    e.text = std::move(text);
    e.const_kind = kind;
    e.pos = pos;
    return e;
}

Expr Expr::binary(std::string op, Expr lhs, Expr rhs, SourcePos pos) {
    Expr e;
    e.kind = ExprKind::Binary;
    e.text = std::move(op);
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    e.pos = pos;
    return e;
}

Expr Expr::call(Expr callee, std::vector<Expr> args, SourcePos pos) {
    Expr e;
    e.kind = ExprKind::Call;
    e.args.push_back(std::move(callee));
    for (auto& a : args) e.args.push_back(std::move(a));
    e.pos = pos;
    return e;
}

const FunctionDecl* SourceUnit::find_function(const std::string& name) const {
    for (const auto& f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

FunctionDecl* SourceUnit::find_function(const std::string& name) {
    for (auto& f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

const StorageDecl* SourceUnit::find_storage(const std::string& name) const {
    for (const auto& s : storage)
        if (s.name == name) return &s;
    return nullptr;
}

StorageDecl* SourceUnit::find_storage(const std::string& name) {
    for (auto& s : storage)
        if (s.name == name) return &s;
    return nullptr;
}

bool is_synthetic_storage_name(const std::string& name) {
    return name.rfind("stor_", 0) == 0 || name.rfind("store_", 0) == 0;
}

bool is_storage_name(const SourceUnit& unit, const std::string& name) {
    return unit.find_storage(name) != nullptr || is_synthetic_storage_name(name);
}

std::string lvalue_root(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Var: return e.text;
    case ExprKind::Index:
    case ExprKind::Member:
    case ExprKind::SliceRange: return lvalue_root(e.args.at(0));
    default: return {};
    }
}

} // namespace dsol::frontend
