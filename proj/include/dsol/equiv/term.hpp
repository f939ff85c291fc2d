#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dsol/util/word.hpp"

namespace dsol::equiv {

enum class Sort : std::uint8_t { BV, Bool };

enum class Op : std::uint8_t {
    Const,
    Var,
    True,
    False,
    Add,
    Sub,
    Mul,
    UDiv,
    SDiv,
    URem,
    SRem,
    Exp,
    And,
    Or,
    Xor,
    BvNot,
    Shl,
    LShr,
    AShr,
    SExt, // sign-extend from `bits`
    Ult,
    Ule,
    Slt,
    Sle,
    Eq,
    Not,
    LAnd,
    LOr,
    Ite,
    App, // uninterpreted function, 256-bit arguments and result
};

struct Node;
using Term = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Const;
    Sort sort = Sort::BV;
    Word value = 0;   // Const
    std::string name; // Var, App
    unsigned bits = 0; // SExt
    std::vector<Term> args;
    std::size_t hash = 0;
};

bool same(const Term& a, const Term& b);

/// Builders fold constants with the same semantics as the concrete
/// interpreter and apply a few local simplifications.
namespace T {
Term bv(const Word& w);
Term var(const std::string& name);
Term boolean(bool b);
Term app(const std::string& name, std::vector<Term> args);
Term binary(Op op, const Term& a, const Term& b);
Term sext(const Term& a, unsigned bits);
Term bvnot(const Term& a);
Term eq(const Term& a, const Term& b);
Term lnot(const Term& a);
Term land(const Term& a, const Term& b);
Term lor(const Term& a, const Term& b);
Term land(const std::vector<Term>& xs);
Term lor(const std::vector<Term>& xs);
Term ite(const Term& c, const Term& a, const Term& b);
Term to_bv(const Term& c);   // ite(c, 1, 0)
Term to_bool(const Term& w); // w != 0
} // namespace T

bool is_const(const Term& t);
bool is_true(const Term& t);
bool is_false(const Term& t);

/// EVM semantics of a 256-bit operation on constants; comparisons yield 0/1.
Word eval_op(Op op, const Word& a, const Word& b, unsigned bits = 0);

/// Evaluates a term under an assignment of variables and a table of
/// uninterpreted applications (missing entries are 0).
using AppTable = std::map<std::string, std::map<std::vector<Word>, Word>>;
Word evaluate(const Term& t, const std::map<std::string, Word>& vars, const AppTable& apps);

std::string smt(const Term& t);
std::string smt_symbol(const std::string& name);

/// Free variables and uninterpreted applications (with arity) of a term.
void collect(const Term& t, std::set<std::string>& vars, std::map<std::string, std::size_t>& apps,
             std::vector<Term>& app_terms);

} // namespace dsol::equiv
