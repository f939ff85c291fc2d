#include "dsol/typecheck/typecheck.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace dsol::typecheck {

using frontend::IRFunction;
using frontend::IRInstr;
using frontend::IRModule;
using frontend::IRValue;
using frontend::Opcode;
using frontend::ValueKind;
using types::FamilySet;
using types::Kind;
using types::SolType;
namespace family = types::family;

const char* rule_name(Rule rule) {
    switch (rule) {
    case Rule::Constant: return "Constant";
    case Rule::Shift: return "LShift/RShift";
    case Rule::Numeric: return "Numeric Operations";
    case Rule::Compare: return "Lt/LtE/Gt/GtE";
    case Rule::TupleArray: return "Tuple/Array";
    case Rule::Comprehension: return "Comprehension";
    case Rule::Boolean: return "Boolean Operation";
    case Rule::Bitwise: return "BitOr/BitAnd/BitXor";
    case Rule::Equality: return "Eq/NotEq/Is/IsNot";
    case Rule::Call: return "Call";
    case Rule::Slice: return "Slice";
    }
    return "?";
}

const std::vector<Rule>& all_rules() {
    static const std::vector<Rule> rules{Rule::Constant, Rule::Shift,   Rule::Numeric,  Rule::Compare,
                                         Rule::TupleArray, Rule::Comprehension, Rule::Boolean, Rule::Bitwise,
                                         Rule::Equality, Rule::Call,    Rule::Slice};
    return rules;
}

// ---------------------------------------------------------------- env

TypeEnv TypeEnv::seed(const IRModule& module, const dg::BuiltinTable& builtins) {
    TypeEnv env;
    env.builtins_ = &builtins;
    env.storage_ = module.storage;
    for (const auto& fn : module.functions) {
        auto& locals = env.locals_[fn.name];
        for (std::size_t i = 0; i < fn.params.size(); ++i)
            locals[fn.params[i]] = fn.param_types[i] ? *fn.param_types[i] : SolType::unknown();
        for (const auto& [name, t] : fn.local_types) locals[name] = t;
    }
    return env;
}

std::optional<SolType> TypeEnv::lookup(const std::string& function, const std::string& name) const {
    if (auto f = locals_.find(function); f != locals_.end())
        if (auto it = f->second.find(name); it != f->second.end()) return it->second;
    if (auto it = storage_.find(name); it != storage_.end()) return it->second;
    if (builtins_)
        if (auto t = builtins_->environment(name)) return t;
    return std::nullopt;
}

void TypeEnv::bind(const std::string& function, const std::string& name, SolType type) {
    locals_[function][name] = std::move(type);
}

void TypeEnv::bind_storage(const std::string& slot, SolType type) { storage_[slot] = std::move(type); }

const std::map<std::string, SolType>& TypeEnv::locals(const std::string& function) const {
    static const std::map<std::string, SolType> none;
    auto it = locals_.find(function);
    return it == locals_.end() ? none : it->second;
}

// ---------------------------------------------------------------- report

namespace {

std::string suggestion_for(Rule rule, const std::string& expected, const std::string& found) {
    switch (rule) {
    case Rule::Constant:
        return "The constant of type " + found + " does not fit " + expected + "; choose a type that can hold it.";
    case Rule::Shift:
    case Rule::Numeric:
    case Rule::Bitwise:
    case Rule::Boolean:
        return "The operands of this operator must belong to " + expected + ", but one is " + found +
               "; change the type of that operand.";
    case Rule::Compare:
    case Rule::Equality:
        return "Both sides of the comparison need a common type; " + found + " cannot be compared with " + expected + ".";
    case Rule::TupleArray:
        return "The elements do not match the expected shape " + expected + " (found " + found + ").";
    case Rule::Comprehension:
    case Rule::Slice:
        return "Indexing needs " + expected + ", but the operand is " + found + "; fix the type of the indexed value or the index.";
    case Rule::Call:
        return found + " cannot be directly converted into " + expected + "; declare the receiving variable as " + found +
               " or convert explicitly.";
    }
    return {};
}

} // namespace

std::string Violation::key() const { return std::string(rule_name(rule)) + "|" + expected + "|" + found; }

std::string Violation::str() const {
    std::string s = std::string("[") + rule_name(rule) + "] " + function + " line " + std::to_string(pos.line);
    if (!statement.empty()) s += " (`" + statement + "`)";
    s += ": expected " + expected + ", found " + found + ". " + suggestion;
    return s;
}

std::size_t ViolationReport::count(Rule rule) const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; }));
}

std::string ViolationReport::to_json() const {
    nlohmann::ordered_json j;
    j["count"] = violations.size();
    j["violations"] = nlohmann::ordered_json::array();
    for (const auto& v : violations) {
        nlohmann::ordered_json o;
        o["rule"] = rule_name(v.rule);
        o["function"] = v.function;
        o["line"] = v.pos.line;
        o["col"] = v.pos.col;
        o["statement"] = v.statement;
        o["expected"] = v.expected;
        o["found"] = v.found;
        o["suggestion"] = v.suggestion;
        j["violations"].push_back(o);
    }
    return j.dump();
}

std::string ViolationReport::text() const {
    if (violations.empty()) return "No type violations.\n";
    std::string s;
    for (const auto& v : violations) s += "- " + v.str() + "\n";
    return s;
}

ViolationReport new_violations(const ViolationReport& baseline, const ViolationReport& current) {
    std::map<std::string, int> budget;
    for (const auto& v : baseline.violations) ++budget[v.key()];
    ViolationReport out;
    for (const auto& v : current.violations)
        if (budget[v.key()]-- <= 0) out.violations.push_back(v);
    return out;
}

// ---------------------------------------------------------------- literals

bool literal_fits(const IRValue& v, const SolType& target) {
    switch (v.kind) {
    case ValueKind::Bool: return target.is_unknown() ? (target.constraint() & family::Bool) != 0 : target.kind() == Kind::Bool;
    case ValueKind::Str:
        return target.is_unknown() ? (target.constraint() & (family::String | family::Bytes)) != 0
                                   : target.kind() == Kind::String || target.kind() == Kind::DynBytes;
    case ValueKind::Const: break;
    default: return true;
    }
    std::size_t digits = v.hex ? v.name.size() - 2 : 0;
    switch (target.kind()) {
    case Kind::Unknown: return (target.constraint() & (family::Int | family::Byte | family::Address)) != 0;
    case Kind::Int: return v.value <= word_mask(target.is_signed() ? target.width() - 1 : target.width());
    case Kind::FixedBytes: return v.value == 0 || (v.hex && digits == 2 * target.length());
    case Kind::Address: return v.value == 0 || (v.hex && digits == 40);
    default: return false;
    }
}

// ---------------------------------------------------------------- checker

namespace {

struct Val {
    SolType t;
    bool literal = false;
    IRValue v;
};

struct Produced {
    SolType t;
    std::optional<Rule> rule;
};

FamilySet literal_families(const IRValue& v) {
    switch (v.kind) {
    case ValueKind::Bool: return family::Bool;
    case ValueKind::Str: return family::String | family::Bytes;
    case ValueKind::Const: {
        FamilySet f = family::Int | family::Address;
        std::size_t digits = v.name.size() - 2;
        if (v.value == 0 || (v.hex && digits % 2 == 0 && digits <= 64)) f |= family::Byte;
        return f;
    }
    default: return family::All;
    }
}

bool in_family(const Val& x, FamilySet f) {
    if (x.literal) return (literal_families(x.v) & f) != 0;
    if (x.t.is_unknown()) return true;
    return (x.t.family() & f) != 0;
}

std::string shown(const Val& x) { return x.literal ? x.t.str() + " literal " + x.v.name : x.t.str(); }

/// Common type of two operands with literals adapting to the other side.
std::optional<SolType> common(const Val& a, const Val& b) {
    if (a.t.is_unknown() && !a.literal) return b.literal ? SolType::unknown() : b.t;
    if (b.t.is_unknown() && !b.literal) return a.literal ? SolType::unknown() : a.t;
    if (a.literal && b.literal) {
        if (a.t.kind() == Kind::Int && b.t.kind() == Kind::Int) return types::more_precise(a.t, b.t);
        if (a.t == b.t) return a.t;
        return std::nullopt;
    }
    if (a.literal) return literal_fits(a.v, b.t) ? std::optional(b.t) : std::nullopt;
    if (b.literal) return literal_fits(b.v, a.t) ? std::optional(a.t) : std::nullopt;
    if (a.t.kind() == Kind::Int && b.t.kind() == Kind::Int) {
        auto m = types::more_precise(a.t, b.t);
        return m.is_bottom() ? std::nullopt : std::optional(m);
    }
    if (types::implicitly_convertible(a.t, b.t)) return b.t;
    if (types::implicitly_convertible(b.t, a.t)) return a.t;
    return std::nullopt;
}

class FunctionChecker {
public:
    FunctionChecker(const IRModule& module, const IRFunction& fn, TypeEnv& env, std::vector<Violation>& out)
        : module_(module), fn_(fn), env_(env), out_(out) {
        for (const auto& in : fn.instrs)
            if (in.op == Opcode::Member && in.opname == "length" && in.operands.at(0).is_named())
                length_bases_.insert(in.operands[0].name);
        for (std::size_t i = 0; i < fn.params.size(); ++i)
            if (fn.param_types[i]) declared_[fn.params[i]] = *fn.param_types[i];
        for (const auto& [name, t] : fn.local_types) declared_[name] = t;
    }

    void run() {
        for (const auto& in : fn_.instrs) step(in);
    }

private:
    const IRModule& module_;
    const IRFunction& fn_;
    TypeEnv& env_;
    std::vector<Violation>& out_;
    std::set<std::string> length_bases_;
    std::map<std::string, SolType> declared_;
    std::map<std::string, Produced> temps_;

    void report(Rule rule, const IRInstr& in, std::string expected, std::string found) {
        Violation v;
        v.rule = rule;
        v.function = fn_.name;
        v.pos = in.pos;
        if (in.stmt >= 0 && in.stmt < static_cast<int>(fn_.stmts.size())) v.statement = fn_.stmts[in.stmt].text;
        v.suggestion = suggestion_for(rule, expected, found);
        v.expected = std::move(expected);
        v.found = std::move(found);
        out_.push_back(std::move(v));
    }

    Val value(const IRValue& v) const {
        if (v.is_literal()) return {dg::literal_type(v), true, v};
        if (v.kind == ValueKind::Temp) {
            auto it = temps_.find(v.name);
            return {it == temps_.end() ? SolType::unknown() : it->second.t, false, v};
        }
        auto t = env_.lookup(fn_.name, v.name);
        return {t ? *t : SolType::unknown(), false, v};
    }

    /// A value flowing into a slot of type `target`. Literals are judged by the
    /// Constant rule, temps by the rule that produced them; named variables are
    /// copies and are not judged.
    void flow(const IRInstr& in, const IRValue& v, const SolType& target) {
        if (target.is_unknown()) return;
        Val x = value(v);
        if (x.literal) {
            if (!literal_fits(v, target)) report(Rule::Constant, in, target.str(), shown(x));
            return;
        }
        if (v.kind != ValueKind::Temp) return;
        auto it = temps_.find(v.name);
        if (it == temps_.end() || !it->second.rule) return;
        if (!types::implicitly_convertible(x.t, target)) report(*it->second.rule, in, target.str(), x.t.str());
    }

    /// Result of `in` assigned to its destination.
    void define(const IRInstr& in, const SolType& t, std::optional<Rule> rule) {
        if (!in.dest) return;
        const auto& d = *in.dest;
        if (d.kind == ValueKind::Temp) {
            temps_[d.name] = {t, rule};
            return;
        }
        if (auto it = declared_.find(d.name); it != declared_.end()) {
            if (rule && !t.is_unknown() && !types::implicitly_convertible(t, it->second))
                report(*rule, in, it->second.str(), t.str());
            return;
        }
        auto known = env_.lookup(fn_.name, d.name);
        if (!known || known->is_unknown()) env_.bind(fn_.name, d.name, t);
    }

    SolType index(const IRInstr& in, const SolType& base, const Val& key, Rule rule) {
        if (base.is_unknown()) return SolType::unknown();
        switch (base.kind()) {
        case Kind::Mapping: {
            bool ok = key.literal ? literal_fits(key.v, base.key())
                                  : types::implicitly_convertible(key.t, base.key());
            if (!ok) report(rule, in, base.key().str(), shown(key));
            return base.value();
        }
        case Kind::Array:
        case Kind::DynBytes:
        case Kind::String:
        case Kind::FixedBytes:
            if (!in_family(key, family::Int | family::Bool)) report(rule, in, types::family_set_str(family::Int | family::Bool), shown(key));
            return types::element_type(base);
        default: {
            FamilySet f = family::String | family::Bytes | family::Byte | family::Array;
            if (rule == Rule::Slice) f |= family::Mapping;
            report(rule, in, types::family_set_str(f), base.str());
            return SolType::unknown();
        }
        }
    }

    void binop(const IRInstr& in) {
        Val a = value(in.operands.at(0));
        Val b = value(in.operands.at(1));
        const auto& op = in.opname;
        auto need = [&](Rule rule, FamilySet f) {
            bool ok = true;
            for (const auto* x : {&a, &b})
                if (!in_family(*x, f)) {
                    report(rule, in, types::family_set_str(f), shown(*x));
                    ok = false;
                }
            return ok;
        };
        auto joined = [&](Rule rule) -> SolType {
            auto c = common(a, b);
            if (!c || c->is_bottom()) {
                report(rule, in, shown(a), shown(b));
                return SolType::unknown();
            }
            return *c;
        };
        if (op == "&&" || op == "||") {
            need(Rule::Boolean, family::Bool);
            define(in, SolType::boolean(), Rule::Boolean);
        } else if (op == "<<" || op == ">>") {
            need(Rule::Shift, family::Bool | family::Int);
            define(in, a.literal ? SolType::unknown_in(family::Int) : a.t, Rule::Shift);
        } else if (op == "&" || op == "|" || op == "^") {
            SolType t = need(Rule::Bitwise, family::Bool | family::Int | family::Byte) ? joined(Rule::Bitwise) : SolType::unknown();
            define(in, t, Rule::Bitwise);
        } else if (op == "<" || op == "<=" || op == ">" || op == ">=") {
            if (need(Rule::Compare, family::Int | family::Address | family::Byte | family::Array | family::Tuple))
                joined(Rule::Compare);
            define(in, SolType::boolean(), Rule::Compare);
        } else if (op == "==" || op == "!=") {
            joined(Rule::Equality);
            define(in, SolType::boolean(), Rule::Equality);
        } else {
            SolType t = SolType::unknown();
            if (need(Rule::Numeric, family::Bool | family::Int)) {
                if (op == "**") t = a.literal ? SolType::unknown_in(family::Int) : a.t;
                else t = joined(Rule::Numeric);
            }
            if (t.is_concrete() && t.kind() != Kind::Int) {
                report(Rule::Numeric, in, types::family_set_str(family::Int), t.str());
                t = SolType::unknown();
            }
            define(in, t, Rule::Numeric);
        }
    }

    void unop(const IRInstr& in) {
        Val a = value(in.operands.at(0));
        if (in.opname == "!") {
            if (!in_family(a, family::Bool)) report(Rule::Boolean, in, types::family_set_str(family::Bool), shown(a));
            define(in, SolType::boolean(), Rule::Boolean);
        } else if (in.opname == "~") {
            FamilySet f = family::Int | family::Byte;
            if (!in_family(a, f)) report(Rule::Bitwise, in, types::family_set_str(f), shown(a));
            define(in, a.literal ? SolType::unknown_in(family::Int) : a.t, Rule::Bitwise);
        } else {
            if (!in_family(a, family::Int)) report(Rule::Numeric, in, types::family_set_str(family::Int), shown(a));
            define(in, a.literal ? SolType::unknown_in(family::Int) : a.t, Rule::Numeric);
        }
    }

    void check_args(const IRInstr& in, std::size_t first, const std::vector<std::optional<SolType>>& params) {
        if (in.operands.size() - first != params.size()) {
            report(Rule::Call, in, std::to_string(params.size()) + " arguments", std::to_string(in.operands.size() - first));
            return;
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!params[i] || params[i]->is_unknown()) continue;
            Val x = value(in.operands[first + i]);
            bool ok = x.literal ? literal_fits(x.v, *params[i]) : types::implicitly_convertible(x.t, *params[i]);
            if (!ok) report(Rule::Call, in, params[i]->str(), shown(x));
        }
    }

    void call(const IRInstr& in) {
        const auto& builtins = env_.builtins();
        if (in.emit) return define(in, SolType::unknown(), std::nullopt);
        if (in.method) {
            Val recv = value(in.operands.at(0));
            if (const auto* sig = builtins.method(in.opname)) {
                if (!in_family(recv, family::Address)) report(Rule::Call, in, types::family_set_str(family::Address), shown(recv));
                std::vector<std::optional<SolType>> ps(sig->params.begin(), sig->params.end());
                if (!sig->variadic) check_args(in, 1, ps);
                return define(in, sig->ret ? *sig->ret : SolType::unknown(), Rule::Call);
            }
            return define(in, SolType::unknown(), std::nullopt);
        }
        if (auto target = dg::conversion_type(in.opname)) {
            for (const auto& op : in.operands) {
                Val x = value(op);
                if (!x.literal && x.t.is_concrete() && !x.t.is_elementary())
                    report(Rule::Call, in, "an elementary type", x.t.str());
            }
            return define(in, *target, Rule::Call);
        }
        if (const auto* sig = builtins.function(in.opname)) {
            std::vector<std::optional<SolType>> ps(sig->params.begin(), sig->params.end());
            if (!sig->variadic) check_args(in, 0, ps);
            return define(in, sig->ret ? *sig->ret : SolType::unknown(), Rule::Call);
        }
        if (const auto* callee = module_.find(in.opname)) {
            check_args(in, 0, callee->param_types);
            SolType ret = SolType::unknown();
            if (callee->returns.size() == 1) ret = callee->returns[0];
            else if (callee->returns.size() > 1) ret = SolType::tuple(callee->returns);
            return define(in, ret, Rule::Call);
        }
        define(in, SolType::unknown(), std::nullopt);
    }

    SolType storage_path(const IRInstr& in, std::size_t keys) {
        auto t = env_.lookup(fn_.name, in.opname).value_or(SolType::unknown());
        for (std::size_t i = 0; i < keys; ++i) t = index(in, t, value(in.operands[i]), Rule::Slice);
        return t;
    }

    void step(const IRInstr& in) {
        switch (in.op) {
        case Opcode::Copy: {
            const auto& src = in.operands.at(0);
            Val x = value(src);
            if (x.literal) {
                SolType t = x.t;
                if (in.dest && declared_.count(in.dest->name)) {
                    flow(in, src, declared_.at(in.dest->name));
                    t = declared_.at(in.dest->name);
                }
                if (in.dest && in.dest->kind == ValueKind::Temp) temps_[in.dest->name] = {t, Rule::Constant};
                else if (in.dest && !declared_.count(in.dest->name)) define(in, t, std::nullopt);
                return;
            }
            if (in.dest && declared_.count(in.dest->name)) {
                flow(in, src, declared_.at(in.dest->name));
                return;
            }
            if (in.dest) {
                std::optional<Rule> rule;
                if (src.kind == ValueKind::Temp)
                    if (auto it = temps_.find(src.name); it != temps_.end()) rule = it->second.rule;
                define(in, x.t, rule);
            }
            return;
        }
        case Opcode::Binop: return binop(in);
        case Opcode::Unop: return unop(in);
        case Opcode::Call: return call(in);
        case Opcode::LoadStorage: return define(in, storage_path(in, in.operands.size()), Rule::Slice);
        case Opcode::StoreStorage: {
            auto t = storage_path(in, in.operands.size() - 1);
            flow(in, in.operands.back(), t);
            return;
        }
        case Opcode::Index: {
            Val base = value(in.operands.at(0));
            Rule rule = in.operands[0].is_named() && length_bases_.count(in.operands[0].name) ? Rule::Comprehension : Rule::Slice;
            return define(in, index(in, base.t, value(in.operands.at(1)), rule), rule);
        }
        case Opcode::Member: {
            auto t = env_.builtins().member(in.opname);
            return define(in, t ? *t : SolType::unknown(), std::nullopt);
        }
        case Opcode::Tuple: {
            std::vector<SolType> ms;
            for (const auto& op : in.operands) ms.push_back(value(op).t);
            return define(in, SolType::tuple(std::move(ms)), Rule::TupleArray);
        }
        case Opcode::Array: {
            std::optional<Val> acc;
            for (const auto& op : in.operands) {
                Val x = value(op);
                if (!acc) {
                    acc = x;
                    continue;
                }
                auto c = common(*acc, x);
                if (!c || c->is_bottom()) {
                    report(Rule::TupleArray, in, shown(*acc), shown(x));
                    acc = Val{SolType::unknown(), false, {}};
                } else if (!(acc->literal && x.literal)) {
                    acc = Val{*c, false, {}};
                }
            }
            SolType elem = acc ? acc->t : SolType::unknown();
            return define(in, SolType::array(elem, in.operands.size()), Rule::TupleArray);
        }
        case Opcode::Slice: {
            Val base = value(in.operands.at(0));
            FamilySet f = family::String | family::Bytes | family::Array;
            if (!in_family(base, f)) report(Rule::Slice, in, types::family_set_str(f), shown(base));
            for (std::size_t i = 1; i < in.operands.size(); ++i) {
                Val b = value(in.operands[i]);
                if (!in_family(b, family::Int | family::Bool)) report(Rule::Slice, in, types::family_set_str(family::Int | family::Bool), shown(b));
            }
            return define(in, base.t, Rule::Slice);
        }
        case Opcode::Ret: {
            if (fn_.returns.empty()) return;
            if (in.operands.size() != fn_.returns.size()) {
                report(Rule::TupleArray, in, std::to_string(fn_.returns.size()) + " return values",
                       std::to_string(in.operands.size()));
                return;
            }
            for (std::size_t i = 0; i < in.operands.size(); ++i) flow(in, in.operands[i], fn_.returns[i]);
            return;
        }
        default: return;
        }
    }
};

} // namespace

ViolationReport check_unit(const IRModule& module, TypeEnv& env) {
    ViolationReport report;
    for (const auto& fn : module.functions) FunctionChecker(module, fn, env, report.violations).run();
    std::stable_sort(report.violations.begin(), report.violations.end(), [](const Violation& a, const Violation& b) {
        return std::tie(a.function, a.pos.line, a.pos.col, a.rule, a.expected, a.found) <
               std::tie(b.function, b.pos.line, b.pos.col, b.rule, b.expected, b.found);
    });
    return report;
}

ViolationReport check_unit(const IRModule& module) {
    auto env = TypeEnv::seed(module);
    return check_unit(module, env);
}

} // namespace dsol::typecheck
