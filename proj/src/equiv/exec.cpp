#include "exec.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

#include "dsol/dg/builtins.hpp"

namespace dsol::equiv::detail {

using frontend::IRFunction;
using frontend::IRInstr;
using frontend::IRValue;
using frontend::Opcode;
using frontend::ValueKind;
using types::Kind;
using types::SolType;

namespace {

const std::set<std::string> kPure{"keccak256",  "sha3",       "sha256",           "ripemd160",
                                  "ecrecover",  "addmod",     "mulmod",           "blockhash",
                                  "gasleft",    "abi.encode", "abi.encodePacked", "abi.encodeWithSelector",
                                  "abi.encodeWithSignature"};

const std::set<std::string> kArith{"+", "-", "*", "/", "%", "**", "&", "|", "^", "<<", ">>"};

std::uint64_t fnv(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

bool signed_int(const SolType& t) { return t.kind() == Kind::Int && t.is_signed(); }

Term keys_equal(const std::vector<Term>& a, const std::vector<Term>& b) {
    if (a.size() != b.size()) return T::boolean(false);
    std::vector<Term> parts;
    for (std::size_t i = 0; i < a.size(); ++i) parts.push_back(T::eq(a[i], b[i]));
    return T::land(parts);
}

std::optional<SolType> declared(const IRFunction& fn, const std::string& name) {
    if (auto it = fn.local_types.find(name); it != fn.local_types.end()) return it->second;
    for (std::size_t i = 0; i < fn.params.size(); ++i)
        if (fn.params[i] == name && i < fn.param_types.size() && fn.param_types[i]) return *fn.param_types[i];
    return std::nullopt;
}

} // namespace

Word string_word(const std::string& s) { return Word(fnv(s)); }
Word name_id(const std::string& s) { return Word(fnv(s)); }

types::SolType value_type_at(SolType t, std::size_t depth) {
    for (std::size_t i = 0; i < depth; ++i) {
        if (t.kind() == Kind::Mapping)
            t = t.value();
        else if (t.kind() == Kind::Array)
            t = t.element();
        else
            return SolType::unknown();
    }
    return t;
}

Term coerce(const Term& t, const SolType& type) {
    switch (type.kind()) {
    case Kind::Bool: return T::to_bv(T::to_bool(t));
    case Kind::Int:
        if (type.is_signed()) return T::sext(t, type.width());
        if (type.width() < 256) return T::binary(Op::And, t, T::bv(word_mask(type.width())));
        return t;
    case Kind::Address: return T::binary(Op::And, t, T::bv(word_mask(160)));
    case Kind::FixedBytes:
        if (type.length() < 32) return T::binary(Op::And, t, T::bv(~word_mask(256 - 8 * type.length())));
        return t;
    default: return t;
    }
}

Executor::Executor(const frontend::IRModule& module, Bounds bounds, InputModel inputs)
    : module_(module), bounds_(bounds), inputs_(std::move(inputs)) {}

void Executor::make_concrete(const std::map<std::string, Word>* vars, const AppTable* table) {
    concrete_ = true;
    vars_ = vars;
    table_ = table;
    bounds_.max_paths = 1;
}

std::string Executor::canonical(const std::string& slot) const {
    auto it = inputs_.slot_alias.find(slot);
    return it == inputs_.slot_alias.end() ? slot : it->second;
}

const Executor::FnInfo& Executor::info(const IRFunction& fn) {
    if (auto it = infos_.find(&fn); it != infos_.end()) return it->second;
    FnInfo fi;
    for (std::size_t i = 0; i < fn.instrs.size(); ++i)
        if (fn.instrs[i].op == Opcode::Label) fi.labels[fn.instrs[i].opname] = i;
    for (std::size_t j = 0; j < fn.instrs.size(); ++j) {
        const auto& in = fn.instrs[j];
        if (in.op != Opcode::Jump || in.targets.empty()) continue;
        auto l = fi.labels.find(in.targets[0]);
        if (l == fi.labels.end() || l->second >= j) continue;
        for (std::size_t k = l->second; k < j; ++k)
            if (fn.instrs[k].op == Opcode::Branch) {
                fi.loop_headers.insert(k);
                break;
            }
    }

    for (std::size_t i = 0; i < fn.params.size(); ++i)
        if (i < fn.param_types.size() && fn.param_types[i] && signed_int(*fn.param_types[i]))
            fi.signed_names.insert(fn.params[i]);
    for (const auto& [name, type] : fn.local_types)
        if (signed_int(type)) fi.signed_names.insert(name);

    auto sgn = [&](const IRValue& v) { return v.is_named() && fi.signed_names.count(v.name) != 0; };
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& in : fn.instrs) {
            if (!in.dest || declared(fn, in.dest->name) || fi.signed_names.count(in.dest->name)) continue;
            bool s = false;
            switch (in.op) {
            case Opcode::Copy: s = sgn(in.operands[0]); break;
            case Opcode::Binop:
                s = kArith.count(in.opname) && (sgn(in.operands[0]) || sgn(in.operands[1]));
                break;
            case Opcode::Unop: s = (in.opname == "-" || in.opname == "~") && sgn(in.operands[0]); break;
            case Opcode::LoadStorage:
                if (auto st = module_.storage.find(in.opname); st != module_.storage.end())
                    s = signed_int(value_type_at(st->second, in.operands.size()));
                break;
            case Opcode::Call:
                if (auto conv = dg::conversion_type(in.opname))
                    s = signed_int(*conv);
                else if (const auto* callee = module_.find(in.opname); callee && !in.method && !callee->returns.empty())
                    s = signed_int(callee->returns[0]);
                break;
            default: break;
            }
            if (s) {
                fi.signed_names.insert(in.dest->name);
                changed = true;
            }
        }
    }
    return infos_.emplace(&fn, std::move(fi)).first->second;
}

Term Executor::input(const std::string& name) const {
    if (!concrete_) return T::var(name);
    auto it = vars_->find(name);
    return T::bv(it == vars_->end() ? Word(0) : it->second);
}

Term Executor::uf(const std::string& name, std::vector<Term> args) const {
    if (concrete_ && std::all_of(args.begin(), args.end(), [](const Term& a) { return is_const(a); })) {
        std::vector<Word> key;
        for (const auto& a : args) key.push_back(a->value);
        auto f = table_->find(name);
        if (f == table_->end()) return T::bv(0);
        auto it = f->second.find(key);
        return T::bv(it == f->second.end() ? Word(0) : it->second);
    }
    return T::app(name, std::move(args));
}

Term Executor::nonlinear(Op op, const std::string& tag, const Term& a, const Term& b) const {
    if (is_const(a) && is_const(b)) return T::bv(eval_op(op, a->value, b->value));
    if (op == Op::Mul && (is_const(a) || is_const(b))) return T::binary(op, a, b);
    if (op != Op::Mul && op != Op::Exp && is_const(b)) return T::binary(op, a, b);
    return uf("nl!" + tag, {a, b});
}

Term Executor::value(const Frame& f, const IRValue& v) const {
    switch (v.kind) {
    case ValueKind::Var:
    case ValueKind::Temp: {
        if (auto it = f.vars.find(v.name); it != f.vars.end()) return it->second;
        if (frontend::is_env_name(v.name)) return input("e!" + v.name);
        return T::bv(0);
    }
    case ValueKind::Const:
    case ValueKind::Bool: return T::bv(v.value);
    case ValueKind::Str: return T::bv(string_word(v.name));
    }
    return T::bv(0);
}

bool Executor::is_signed(const Frame& f, const IRValue& v) const {
    return v.is_named() && f.info->signed_names.count(v.name) != 0;
}

void Executor::define(Frame& f, const std::string& name, Term t) const {
    if (auto type = declared(*f.fn, name)) t = coerce(t, *type);
    f.vars[name] = std::move(t);
}

Term Executor::initial(const std::string& slot, const std::vector<Term>& keys) const {
    SolType type;
    if (auto it = inputs_.storage_types.find(slot); it != inputs_.storage_types.end()) {
        type = it->second;
    } else {
        std::string local = slot;
        for (const auto& [from, to] : inputs_.slot_alias)
            if (to == slot) local = from;
        if (auto st = module_.storage.find(local); st != module_.storage.end()) type = st->second;
    }
    return coerce(uf("s!" + slot, keys), value_type_at(type, keys.size()));
}

Term Executor::load(const State& s, const std::string& local_slot, const std::vector<Term>& keys) const {
    std::string slot = canonical(local_slot);
    Term v = initial(slot, keys);
    if (auto it = s.path.writes.find(slot); it != s.path.writes.end())
        for (const auto& w : it->second) v = T::ite(keys_equal(w.keys, keys), w.value, v);
    return v;
}

Term Executor::binop(const Frame& f, const IRInstr& in) const {
    const auto& op = in.opname;
    Term a = value(f, in.operands[0]);
    Term b = value(f, in.operands[1]);
    bool sg = is_signed(f, in.operands[0]) || is_signed(f, in.operands[1]);
    if (op == "+") return T::binary(Op::Add, a, b);
    if (op == "-") return T::binary(Op::Sub, a, b);
    if (op == "*") return nonlinear(Op::Mul, "mul", a, b);
    if (op == "/") return sg ? nonlinear(Op::SDiv, "sdiv", a, b) : nonlinear(Op::UDiv, "div", a, b);
    if (op == "%") return sg ? nonlinear(Op::SRem, "smod", a, b) : nonlinear(Op::URem, "mod", a, b);
    if (op == "**") return nonlinear(Op::Exp, "exp", a, b);
    if (op == "&") return T::binary(Op::And, a, b);
    if (op == "|") return T::binary(Op::Or, a, b);
    if (op == "^") return T::binary(Op::Xor, a, b);
    if (op == "<<") return T::binary(Op::Shl, a, b);
    if (op == ">>") return T::binary(is_signed(f, in.operands[0]) ? Op::AShr : Op::LShr, a, b);
    if (op == "<") return T::to_bv(T::binary(sg ? Op::Slt : Op::Ult, a, b));
    if (op == "<=") return T::to_bv(T::binary(sg ? Op::Sle : Op::Ule, a, b));
    if (op == ">") return T::to_bv(T::binary(sg ? Op::Slt : Op::Ult, b, a));
    if (op == ">=") return T::to_bv(T::binary(sg ? Op::Sle : Op::Ule, b, a));
    if (op == "==") return T::to_bv(T::eq(a, b));
    if (op == "!=") return T::to_bv(T::lnot(T::eq(a, b)));
    if (op == "&&") return T::to_bv(T::land(T::to_bool(a), T::to_bool(b)));
    if (op == "||") return T::to_bv(T::lor(T::to_bool(a), T::to_bool(b)));
    return uf("op!" + op, {a, b});
}

Term Executor::unop(const Frame& f, const IRInstr& in) const {
    Term a = value(f, in.operands[0]);
    if (in.opname == "!") return T::to_bv(T::lnot(T::to_bool(a)));
    if (in.opname == "-") return T::binary(Op::Sub, T::bv(0), a);
    if (in.opname == "~") return T::bvnot(a);
    return uf("op!" + in.opname, {a});
}

void Executor::push_frame(State& s, const IRFunction& fn, const std::vector<Term>& args,
                          std::optional<std::string> dest, bool entry) {
    Frame fr;
    fr.fn = &fn;
    fr.info = &info(fn);
    fr.dest = std::move(dest);
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
        Term t = i < args.size() ? args[i] : T::bv(0);
        std::optional<SolType> type;
        if (i < fn.param_types.size()) type = fn.param_types[i];
        if (entry)
            if (auto it = inputs_.param_types.find(i); it != inputs_.param_types.end()) type = it->second;
        if (type) t = coerce(t, *type);
        fr.vars[fn.params[i]] = t;
    }
    s.frames.push_back(std::move(fr));
}

void Executor::complete(State& s) {
    if (static_cast<int>(done_.size()) >= bounds_.max_paths) {
        bound_hit_ = true;
        stop_ = true;
        return;
    }
    s.path.cond = s.cond;
    done_.push_back(std::move(s.path));
}

void Executor::finish_return(State& s, std::vector<Term> values, std::vector<State>& /*work*/) {
    const IRFunction& fn = *s.frames.back().fn;
    for (std::size_t i = 0; i < values.size() && i < fn.returns.size(); ++i) values[i] = coerce(values[i], fn.returns[i]);
    auto dest = s.frames.back().dest;
    s.frames.pop_back();
    if (s.frames.empty()) {
        s.path.returns = std::move(values);
        complete(s);
        return;
    }
    if (dest) {
        Term r = values.empty()        ? T::bv(0)
                 : values.size() == 1 ? values[0]
                                      : uf("tuple!" + std::to_string(values.size()), values);
        define(s.frames.back(), *dest, r);
    }
}

void Executor::fork(State& s, const Term& c, std::vector<State>& /*work*/, bool /*revert_on_false*/) {
    State r = s;
    r.cond = T::land(s.cond, T::lnot(c));
    r.path.reverted = true;
    complete(r);
    s.cond = T::land(s.cond, c);
}

bool Executor::step(State& s, std::vector<State>& work) {
    if (stop_) return false;
    Frame& f = s.frames.back();
    const auto& instrs = f.fn->instrs;
    if (f.pc >= instrs.size()) {
        std::vector<Term> zeros(f.fn->returns.size(), T::bv(0));
        finish_return(s, std::move(zeros), work);
        return !s.frames.empty();
    }
    if (++s.steps > bounds_.max_steps) {
        bound_hit_ = true;
        return false;
    }
    const IRInstr& in = instrs[f.pc];
    auto set = [&](Term t) {
        if (in.dest) define(f, in.dest->name, std::move(t));
    };
    auto goto_label = [&](Frame& fr, const std::string& label) {
        auto it = fr.info->labels.find(label);
        if (it == fr.info->labels.end()) throw std::logic_error("unknown label " + label);
        fr.pc = it->second;
    };

    switch (in.op) {
    case Opcode::Copy: set(value(f, in.operands[0])); break;
    case Opcode::Binop: set(binop(f, in)); break;
    case Opcode::Unop: set(unop(f, in)); break;
    case Opcode::LoadStorage: {
        std::vector<Term> keys;
        for (const auto& k : in.operands) keys.push_back(value(f, k));
        set(load(s, in.opname, keys));
        break;
    }
    case Opcode::StoreStorage: {
        std::vector<Term> keys;
        for (std::size_t i = 0; i + 1 < in.operands.size(); ++i) keys.push_back(value(f, in.operands[i]));
        Term v = value(f, in.operands.back());
        if (auto st = module_.storage.find(in.opname); st != module_.storage.end())
            v = coerce(v, value_type_at(st->second, keys.size()));
        s.path.writes[canonical(in.opname)].push_back({std::move(keys), std::move(v)});
        break;
    }
    case Opcode::Index: set(uf("ix", {value(f, in.operands[0]), value(f, in.operands[1])})); break;
    case Opcode::Member: set(uf("m!" + in.opname, {value(f, in.operands[0])})); break;
    case Opcode::Tuple:
    case Opcode::Array:
    case Opcode::Slice: {
        std::vector<Term> args;
        for (const auto& o : in.operands) args.push_back(value(f, o));
        std::string tag = in.op == Opcode::Tuple ? "tuple!" : in.op == Opcode::Array ? "array!" : "slice!";
        set(uf(tag + std::to_string(args.size()), std::move(args)));
        break;
    }
    case Opcode::Require: {
        Term c = T::to_bool(value(f, in.operands[0]));
        if (is_false(c)) {
            s.path.reverted = true;
            s.frames.clear();
            complete(s);
            return false;
        }
        if (!is_true(c)) fork(s, c, work, true);
        break;
    }
    case Opcode::Ret: {
        std::vector<Term> values;
        for (const auto& o : in.operands) values.push_back(value(f, o));
        finish_return(s, std::move(values), work);
        return !s.frames.empty();
    }
    case Opcode::Jump: goto_label(f, in.targets[0]); return true;
    case Opcode::Branch: {
        Term c = T::to_bool(value(f, in.operands[0]));
        bool header = f.info->loop_headers.count(f.pc) != 0;
        int visits = ++f.visits[f.pc];
        if (header && !concrete_ && visits > bounds_.loop_unroll) {
            if (!is_false(c)) bound_hit_ = true;
            if (is_true(c)) return false;
            s.cond = T::land(s.cond, T::lnot(c));
            goto_label(f, in.targets[1]);
            return true;
        }
        if (is_true(c)) {
            goto_label(f, in.targets[0]);
            return true;
        }
        if (is_false(c)) {
            goto_label(f, in.targets[1]);
            return true;
        }
        State other = s;
        other.cond = T::land(s.cond, T::lnot(c));
        goto_label(other.frames.back(), in.targets[1]);
        work.push_back(std::move(other));
        s.cond = T::land(s.cond, c);
        goto_label(f, in.targets[0]);
        return true;
    }
    case Opcode::Label: break;
    case Opcode::Call: {
        std::vector<Term> args;
        for (const auto& o : in.operands) args.push_back(value(f, o));
        const std::string& name = in.opname;
        if (in.emit) {
            s.path.calls.push_back({"emit " + name, args});
            break;
        }
        if (in.method) {
            std::string callee = "." + name;
            s.path.calls.push_back({callee, args});
            set(uf("x!" + callee + "!" + std::to_string(s.ext_counter++), std::move(args)));
            break;
        }
        if (name == "revert" || name == "throw") {
            s.path.reverted = true;
            s.frames.clear();
            complete(s);
            return false;
        }
        if (name == "assert" && !args.empty()) {
            Term c = T::to_bool(args[0]);
            if (is_false(c)) {
                s.path.reverted = true;
                s.frames.clear();
                complete(s);
                return false;
            }
            if (!is_true(c)) fork(s, c, work, true);
            break;
        }
        if (const IRFunction* callee = module_.find(name)) {
            if (static_cast<int>(s.frames.size()) > bounds_.max_depth) {
                bound_hit_ = true;
                set(uf("u!" + name, std::move(args)));
                break;
            }
            std::optional<std::string> dest;
            if (in.dest) dest = in.dest->name;
            ++f.pc;
            push_frame(s, *callee, args, dest, false);
            return true;
        }
        if (auto conv = dg::conversion_type(name); conv && args.size() == 1) {
            set(coerce(args[0], *conv));
            break;
        }
        if (kPure.count(name)) {
            set(uf("f!" + name, std::move(args)));
            break;
        }
        s.path.calls.push_back({name, args});
        set(uf("x!" + name + "!" + std::to_string(s.ext_counter++), std::move(args)));
        break;
    }
    }
    ++f.pc;
    return true;
}

SymbolicSummary Executor::run(const std::string& function) {
    const IRFunction* fn = module_.find(function);
    if (!fn) throw std::invalid_argument("no function named " + function);
    done_.clear();
    bound_hit_ = false;
    stop_ = false;

    State s0;
    s0.cond = T::boolean(true);
    std::vector<Term> args;
    for (std::size_t i = 0; i < fn->params.size(); ++i) args.push_back(input("p!" + std::to_string(i)));
    push_frame(s0, *fn, args, std::nullopt, true);

    std::vector<State> work{std::move(s0)};
    while (!work.empty() && !stop_) {
        State s = std::move(work.back());
        work.pop_back();
        while (step(s, work)) {
        }
    }
    if (!work.empty()) bound_hit_ = true;

    SymbolicSummary out;
    out.function = function;
    out.params = fn->params;
    out.paths = std::move(done_);
    out.bound_hit = bound_hit_;
    auto self = std::make_shared<Executor>(module_, bounds_, inputs_);
    if (concrete_) self->make_concrete(vars_, table_);
    out.initial = [self](const std::string& slot, const std::vector<Term>& keys) { return self->initial(slot, keys); };
    done_.clear();
    return out;
}

} // namespace dsol::equiv::detail
