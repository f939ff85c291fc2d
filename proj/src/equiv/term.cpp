#include "dsol/equiv/term.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace dsol::equiv {

namespace {

const Word kOnes = ~Word(0);
const Word kSignBit = Word(1) << 255;

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

Term make(Op op, Sort sort, std::vector<Term> args, Word value = 0, std::string name = {}, unsigned bits = 0) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->sort = sort;
    n->value = value;
    n->name = std::move(name);
    n->bits = bits;
    n->args = std::move(args);
    std::size_t h = static_cast<std::size_t>(op);
    h = mix(h, static_cast<std::size_t>(static_cast<std::uint64_t>(value & Word(~std::uint64_t{0}))));
    h = mix(h, std::hash<std::string>{}(n->name));
    h = mix(h, bits);
    for (const auto& a : n->args) h = mix(h, a->hash);
    n->hash = h;
    return n;
}

bool negative(const Word& w) { return (w & kSignBit) != 0; }
Word negate(const Word& w) { return ~w + 1; }

bool complementary(const Term& a, const Term& b) {
    return (a->op == Op::Not && same(a->args[0], b)) || (b->op == Op::Not && same(b->args[0], a));
}

bool is_comparison(Op op) { return op == Op::Ult || op == Op::Ule || op == Op::Slt || op == Op::Sle; }

Word pow_mod(Word base, Word exp) {
    Word result = 1;
    while (exp != 0) {
        if ((exp & 1) != 0) result *= base;
        base *= base;
        exp >>= 1;
    }
    return result;
}

} // namespace

bool same(const Term& a, const Term& b) {
    if (a == b) return true;
    if (a->hash != b->hash || a->op != b->op || a->sort != b->sort || a->value != b->value || a->name != b->name ||
        a->bits != b->bits || a->args.size() != b->args.size())
        return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!same(a->args[i], b->args[i])) return false;
    return true;
}

bool is_const(const Term& t) { return t->op == Op::Const; }
bool is_true(const Term& t) { return t->op == Op::True; }
bool is_false(const Term& t) { return t->op == Op::False; }

Word eval_op(Op op, const Word& a, const Word& b, unsigned bits) {
    switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::UDiv: return b == 0 ? Word(0) : a / b;
    case Op::SDiv: {
        if (b == 0) return 0;
        Word ua = negative(a) ? negate(a) : a;
        Word ub = negative(b) ? negate(b) : b;
        Word q = ua / ub;
        return negative(a) != negative(b) ? negate(q) : q;
    }
    case Op::URem: return b == 0 ? Word(0) : a % b;
    case Op::SRem: {
        if (b == 0) return 0;
        Word ua = negative(a) ? negate(a) : a;
        Word ub = negative(b) ? negate(b) : b;
        Word r = ua % ub;
        return negative(a) ? negate(r) : r;
    }
    case Op::Exp: return pow_mod(a, b);
    case Op::And: return a & b;
    case Op::Or: return a | b;
    case Op::Xor: return a ^ b;
    case Op::BvNot: return ~a;
    case Op::Shl: return b >= 256 ? Word(0) : Word(a << static_cast<unsigned>(b));
    case Op::LShr: return b >= 256 ? Word(0) : Word(a >> static_cast<unsigned>(b));
    case Op::AShr:
        if (!negative(a)) return b >= 256 ? Word(0) : Word(a >> static_cast<unsigned>(b));
        return b >= 256 ? kOnes : Word(~((~a) >> static_cast<unsigned>(b)));
    case Op::SExt: return bits >= 256 ? a : sign_extend(a, bits);
    case Op::Ult: return a < b ? 1 : 0;
    case Op::Ule: return a <= b ? 1 : 0;
    case Op::Slt: return (a ^ kSignBit) < (b ^ kSignBit) ? 1 : 0;
    case Op::Sle: return (a ^ kSignBit) <= (b ^ kSignBit) ? 1 : 0;
    case Op::Eq: return a == b ? 1 : 0;
    default: throw std::logic_error("eval_op: not a word operation");
    }
}

namespace T {

Term bv(const Word& w) { return make(Op::Const, Sort::BV, {}, w); }
Term var(const std::string& name) { return make(Op::Var, Sort::BV, {}, 0, name); }
Term boolean(bool b) { return make(b ? Op::True : Op::False, Sort::Bool, {}); }
Term app(const std::string& name, std::vector<Term> args) { return make(Op::App, Sort::BV, std::move(args), 0, name); }

Term binary(Op op, const Term& a, const Term& b) {
    if (is_const(a) && is_const(b)) {
        Word r = eval_op(op, a->value, b->value);
        return is_comparison(op) ? boolean(r != 0) : bv(r);
    }
    auto zero = [](const Term& t) { return is_const(t) && t->value == 0; };
    auto one = [](const Term& t) { return is_const(t) && t->value == 1; };
    switch (op) {
    case Op::Add:
        if (zero(a)) return b;
        if (zero(b)) return a;
        break;
    case Op::Sub:
        if (zero(b)) return a;
        if (same(a, b)) return bv(0);
        break;
    case Op::Mul:
        if (zero(a) || zero(b)) return bv(0);
        if (one(a)) return b;
        if (one(b)) return a;
        break;
    case Op::And:
        if (zero(a) || zero(b)) return bv(0);
        if (is_const(a) && a->value == kOnes) return b;
        if (is_const(b) && b->value == kOnes) return a;
        if (same(a, b)) return a;
        break;
    case Op::Or:
        if (zero(a)) return b;
        if (zero(b)) return a;
        if (same(a, b)) return a;
        break;
    case Op::Xor:
        if (zero(a)) return b;
        if (zero(b)) return a;
        if (same(a, b)) return bv(0);
        break;
    case Op::Shl:
    case Op::LShr:
    case Op::AShr:
        if (zero(b)) return a;
        break;
    case Op::UDiv:
    case Op::SDiv:
        if (one(b)) return a;
        if (zero(b)) return bv(0);
        break;
    case Op::URem:
    case Op::SRem:
        if (zero(b) || one(b)) return bv(0);
        break;
    case Op::Ult:
    case Op::Slt:
        if (same(a, b)) return boolean(false);
        break;
    case Op::Ule:
    case Op::Sle:
        if (same(a, b)) return boolean(true);
        break;
    default: break;
    }
    return make(op, is_comparison(op) ? Sort::Bool : Sort::BV, {a, b});
}

Term sext(const Term& a, unsigned bits) {
    if (bits >= 256) return a;
    if (is_const(a)) return bv(eval_op(Op::SExt, a->value, 0, bits));
    return make(Op::SExt, Sort::BV, {a}, 0, {}, bits);
}

Term bvnot(const Term& a) {
    if (is_const(a)) return bv(~a->value);
    if (a->op == Op::BvNot) return a->args[0];
    return make(Op::BvNot, Sort::BV, {a});
}

Term eq(const Term& a, const Term& b) {
    if (same(a, b)) return boolean(true);
    if (is_const(a) && is_const(b)) return boolean(a->value == b->value);
    if (a->sort == Sort::Bool) {
        if (is_true(a)) return b;
        if (is_true(b)) return a;
        if (is_false(a)) return lnot(b);
        if (is_false(b)) return lnot(a);
    }
    // ite(c, 1, 0) compared with a constant
    auto flag = [](const Term& t) {
        return t->op == Op::Ite && is_const(t->args[1]) && t->args[1]->value == 1 && is_const(t->args[2]) &&
               t->args[2]->value == 0;
    };
    if (flag(a) && is_const(b)) return b->value == 1 ? a->args[0] : b->value == 0 ? lnot(a->args[0]) : boolean(false);
    if (flag(b) && is_const(a)) return eq(b, a);
    return make(Op::Eq, Sort::Bool, {a, b});
}

Term lnot(const Term& a) {
    if (is_true(a)) return boolean(false);
    if (is_false(a)) return boolean(true);
    if (a->op == Op::Not) return a->args[0];
    return make(Op::Not, Sort::Bool, {a});
}

Term land(const Term& a, const Term& b) {
    if (is_false(a) || is_false(b)) return boolean(false);
    if (is_true(a)) return b;
    if (is_true(b)) return a;
    if (same(a, b)) return a;
    if (complementary(a, b)) return boolean(false);
    return make(Op::LAnd, Sort::Bool, {a, b});
}

Term lor(const Term& a, const Term& b) {
    if (is_true(a) || is_true(b)) return boolean(true);
    if (is_false(a)) return b;
    if (is_false(b)) return a;
    if (same(a, b)) return a;
    if (complementary(a, b)) return boolean(true);
    return make(Op::LOr, Sort::Bool, {a, b});
}

Term land(const std::vector<Term>& xs) {
    Term acc = boolean(true);
    for (const auto& x : xs) acc = land(acc, x);
    return acc;
}

Term lor(const std::vector<Term>& xs) {
    Term acc = boolean(false);
    for (const auto& x : xs) acc = lor(acc, x);
    return acc;
}

Term ite(const Term& c, const Term& a, const Term& b) {
    if (is_true(c)) return a;
    if (is_false(c)) return b;
    if (same(a, b)) return a;
    if (a->sort == Sort::Bool) {
        if (is_true(a) && is_false(b)) return c;
        if (is_false(a) && is_true(b)) return lnot(c);
    }
    return make(Op::Ite, a->sort, {c, a, b});
}

Term to_bv(const Term& c) { return ite(c, bv(1), bv(0)); }

Term to_bool(const Term& w) {
    if (w->op == Op::Ite && is_const(w->args[1]) && w->args[1]->value == 1 && is_const(w->args[2]) &&
        w->args[2]->value == 0)
        return w->args[0];
    return lnot(eq(w, bv(0)));
}

} // namespace T

Word evaluate(const Term& t, const std::map<std::string, Word>& vars, const AppTable& apps) {
    switch (t->op) {
    case Op::Const: return t->value;
    case Op::Var: {
        auto it = vars.find(t->name);
        return it == vars.end() ? Word(0) : it->second;
    }
    case Op::True: return 1;
    case Op::False: return 0;
    case Op::App: {
        std::vector<Word> args;
        for (const auto& a : t->args) args.push_back(evaluate(a, vars, apps));
        auto f = apps.find(t->name);
        if (f == apps.end()) return 0;
        auto it = f->second.find(args);
        return it == f->second.end() ? Word(0) : it->second;
    }
    case Op::Not: return evaluate(t->args[0], vars, apps) == 0 ? 1 : 0;
    case Op::LAnd: return evaluate(t->args[0], vars, apps) != 0 && evaluate(t->args[1], vars, apps) != 0 ? 1 : 0;
    case Op::LOr: return evaluate(t->args[0], vars, apps) != 0 || evaluate(t->args[1], vars, apps) != 0 ? 1 : 0;
    case Op::Ite:
        return evaluate(t->args[0], vars, apps) != 0 ? evaluate(t->args[1], vars, apps) : evaluate(t->args[2], vars, apps);
    case Op::BvNot: return ~evaluate(t->args[0], vars, apps);
    case Op::SExt: return eval_op(Op::SExt, evaluate(t->args[0], vars, apps), 0, t->bits);
    default: return eval_op(t->op, evaluate(t->args[0], vars, apps), evaluate(t->args[1], vars, apps));
    }
}

std::string smt_symbol(const std::string& name) {
    std::string out = "|";
    for (char c : name) out += (c == '|' || c == '\\') ? '_' : c;
    return out + "|";
}

namespace {

const char* smt_op(Op op) {
    switch (op) {
    case Op::Add: return "bvadd";
    case Op::Sub: return "bvsub";
    case Op::Mul: return "bvmul";
    case Op::And: return "bvand";
    case Op::Or: return "bvor";
    case Op::Xor: return "bvxor";
    case Op::BvNot: return "bvnot";
    case Op::Shl: return "bvshl";
    case Op::LShr: return "bvlshr";
    case Op::AShr: return "bvashr";
    case Op::Ult: return "bvult";
    case Op::Ule: return "bvule";
    case Op::Slt: return "bvslt";
    case Op::Sle: return "bvsle";
    case Op::Eq: return "=";
    case Op::Not: return "not";
    case Op::LAnd: return "and";
    case Op::LOr: return "or";
    case Op::Ite: return "ite";
    default: return nullptr;
    }
}

void print(const Term& t, std::string& out, std::unordered_map<const Node*, std::string>& memo) {
    if (auto it = memo.find(t.get()); it != memo.end()) {
        out += it->second;
        return;
    }
    std::string s;
    auto arg = [&](std::size_t i) {
        std::string a;
        print(t->args[i], a, memo);
        return a;
    };
    const std::string zero = word_smt(0);
    switch (t->op) {
    case Op::Const: s = word_smt(t->value); break;
    case Op::Var: s = smt_symbol(t->name); break;
    case Op::True: s = "true"; break;
    case Op::False: s = "false"; break;
    case Op::App:
        if (t->args.empty()) {
            s = smt_symbol(t->name);
        } else {
            s = "(" + smt_symbol(t->name);
            for (std::size_t i = 0; i < t->args.size(); ++i) s += " " + arg(i);
            s += ")";
        }
        break;
    case Op::UDiv:
    case Op::SDiv:
    case Op::URem:
    case Op::SRem: {
        static const std::map<Op, const char*> names{
            {Op::UDiv, "bvudiv"}, {Op::SDiv, "bvsdiv"}, {Op::URem, "bvurem"}, {Op::SRem, "bvsrem"}};
        auto a = arg(0), b = arg(1);
        s = "(ite (= " + b + " " + zero + ") " + zero + " (" + names.at(t->op) + " " + a + " " + b + "))";
        break;
    }
    case Op::SExt:
        s = "((_ sign_extend " + std::to_string(256 - t->bits) + ") ((_ extract " + std::to_string(t->bits - 1) +
            " 0) " + arg(0) + "))";
        break;
    case Op::Exp: throw std::logic_error("exponentiation has no SMT-LIB encoding; abstract it first");
    default: {
        s = std::string("(") + smt_op(t->op);
        for (std::size_t i = 0; i < t->args.size(); ++i) s += " " + arg(i);
        s += ")";
    }
    }
    out += s;
    memo.emplace(t.get(), std::move(s));
}

} // namespace

std::string smt(const Term& t) {
    std::string out;
    std::unordered_map<const Node*, std::string> memo;
    print(t, out, memo);
    return out;
}

void collect(const Term& t, std::set<std::string>& vars, std::map<std::string, std::size_t>& apps,
             std::vector<Term>& app_terms) {
    std::set<const Node*> seen;
    std::vector<Term> stack{t};
    while (!stack.empty()) {
        auto n = stack.back();
        stack.pop_back();
        if (!seen.insert(n.get()).second) continue;
        if (n->op == Op::Var) vars.insert(n->name);
        if (n->op == Op::App) {
            apps.emplace(n->name, n->args.size());
            if (std::none_of(app_terms.begin(), app_terms.end(), [&](const Term& x) { return same(x, n); }))
                app_terms.push_back(n);
        }
        for (const auto& a : n->args) stack.push_back(a);
    }
}

} // namespace dsol::equiv
