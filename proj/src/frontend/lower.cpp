#include "dsol/frontend/ir.hpp"

#include <algorithm>
#include <set>

#include "dsol/frontend/render.hpp"

namespace dsol::frontend {

LoweringError::LoweringError(std::string function, SourcePos pos, const std::string& message)
    : std::runtime_error(function + " at " + pos.str() + ": " + message), function_(std::move(function)),
      pos_(pos) {}

IRValue IRValue::var(std::string name) { return {ValueKind::Var, std::move(name)}; }
IRValue IRValue::temp(std::string name) { return {ValueKind::Temp, std::move(name)}; }

IRValue IRValue::constant(const std::string& spelling) {
    IRValue v{ValueKind::Const, spelling};
    v.value = parse_word(spelling).value_or(0);
    v.hex = spelling.size() > 2 && spelling[0] == '0' && (spelling[1] == 'x' || spelling[1] == 'X');
    return v;
}

IRValue IRValue::boolean(bool b) {
    IRValue v{ValueKind::Bool, b ? "true" : "false"};
    v.value = b ? 1 : 0;
    return v;
}

IRValue IRValue::str(std::string body) { return {ValueKind::Str, std::move(body)}; }

std::string IRValue::str() const { return kind == ValueKind::Str ? "\"" + name + "\"" : name; }

bool is_env_name(const std::string& name) {
    return name.find('.') != std::string::npos || name == "now" || name == "this";
}

const char* opcode_name(Opcode op) {
    switch (op) {
    case Opcode::Copy: return "copy";
    case Opcode::Binop: return "binop";
    case Opcode::Unop: return "unop";
    case Opcode::Call: return "call";
    case Opcode::LoadStorage: return "load_storage";
    case Opcode::StoreStorage: return "store_storage";
    case Opcode::Index: return "index";
    case Opcode::Member: return "member";
    case Opcode::Tuple: return "tuple";
    case Opcode::Array: return "array";
    case Opcode::Slice: return "slice";
    case Opcode::Require: return "require";
    case Opcode::Ret: return "ret";
    case Opcode::Branch: return "branch";
    case Opcode::Jump: return "jump";
    case Opcode::Label: return "label";
    }
    return "?";
}

bool is_terminator(Opcode op) { return op == Opcode::Ret || op == Opcode::Branch || op == Opcode::Jump; }

namespace {

std::string join(const std::vector<IRValue>& vs, std::size_t from = 0, std::size_t to = std::string::npos) {
    std::string out;
    to = std::min(to, vs.size());
    for (std::size_t i = from; i < to; ++i) {
        if (i > from) out += ", ";
        out += vs[i].str();
    }
    return out;
}

std::string keys(const std::vector<IRValue>& vs, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count && i < vs.size(); ++i) out += "[" + vs[i].str() + "]";
    return out;
}

} // namespace

std::string IRInstr::str() const {
    std::string lhs = dest ? dest->str() + " = " : "";
    const auto& o = operands;
    switch (op) {
    case Opcode::Copy: return lhs + o.at(0).str();
    case Opcode::Binop: return lhs + o.at(0).str() + " " + opname + " " + o.at(1).str();
    case Opcode::Unop: return lhs + opname + o.at(0).str();
    case Opcode::Call:
        if (method) return lhs + (emit ? "emit " : "call ") + o.at(0).str() + "." + opname + "(" + join(o, 1) + ")";
        return lhs + (emit ? "emit " : "call ") + opname + "(" + join(o) + ")";
    case Opcode::LoadStorage: return lhs + "load_storage " + opname + keys(o, o.size());
    case Opcode::StoreStorage:
        return "store_storage " + opname + keys(o, o.size() - 1) + " = " + o.back().str();
    case Opcode::Index: return lhs + o.at(0).str() + "[" + o.at(1).str() + "]";
    case Opcode::Member: return lhs + o.at(0).str() + "." + opname;
    case Opcode::Tuple: return lhs + "(" + join(o) + ")";
    case Opcode::Array: return lhs + "[" + join(o) + "]";
    case Opcode::Slice: return lhs + o.at(0).str() + "[" + o.at(1).str() + ":" + o.at(2).str() + "]";
    case Opcode::Require: return "require " + o.at(0).str();
    case Opcode::Ret: return o.empty() ? "ret" : "ret " + join(o);
    case Opcode::Branch: return "branch " + o.at(0).str() + " ? " + targets.at(0) + " : " + targets.at(1);
    case Opcode::Jump: return "jump " + targets.at(0);
    case Opcode::Label: return opname + ":";
    }
    return {};
}

bool IRFunction::is_param(const std::string& n) const {
    return std::find(params.begin(), params.end(), n) != params.end();
}

std::string IRFunction::str() const {
    std::string out = "function " + name + "(";
    for (std::size_t i = 0; i < params.size(); ++i) out += (i ? ", " : "") + params[i];
    out += ")\n";
    for (const auto& in : instrs) out += (in.op == Opcode::Label ? "" : "  ") + in.str() + "\n";
    return out;
}

const IRFunction* IRModule::find(const std::string& n) const {
    for (const auto& f : functions)
        if (f.name == n) return &f;
    return nullptr;
}

namespace {

bool is_env_base(const Expr& e) {
    return e.kind == ExprKind::Var && (e.text == "msg" || e.text == "block" || e.text == "tx" || e.text == "abi");
}

class Lowerer {
public:
    Lowerer(const SourceUnit& unit, const FunctionDecl& decl) : unit_(unit), decl_(decl) {}

    IRFunction run() {
        fn_.name = decl_.name;
        fn_.span = decl_.span;
        fn_.pos = decl_.pos;
        fn_.returns = decl_.returns;
        for (const auto& p : decl_.params) {
            fn_.params.push_back(p.name);
            fn_.param_types.push_back(p.type);
        }
        block(decl_.body, 0);
        fn_.temp_count = temps_;
        return std::move(fn_);
    }

private:
    const SourceUnit& unit_;
    const FunctionDecl& decl_;
    IRFunction fn_;
    int temps_ = 0;
    int labels_ = 0;
    int stmt_ = -1;

    [[noreturn]] void fail(SourcePos pos, const std::string& message) const {
        throw LoweringError(decl_.name, pos, message);
    }

    bool storage(const std::string& name) const { return is_storage_name(unit_, name); }

    IRValue fresh() { return IRValue::temp("t" + std::to_string(temps_++)); }
    std::string label() { return "L" + std::to_string(labels_++); }

    IRInstr& emit(Opcode op, SourcePos pos) {
        IRInstr in;
        in.op = op;
        in.pos = pos;
        in.stmt = stmt_;
        fn_.instrs.push_back(std::move(in));
        return fn_.instrs.back();
    }

    IRValue define(IRInstr& in, const std::optional<IRValue>& dest) {
        in.dest = dest ? *dest : fresh();
        return *in.dest;
    }

    // Storage index chain m[a][b] -> ("m", {a, b}); nullopt if not rooted at storage.
    std::optional<std::pair<std::string, std::vector<const Expr*>>> storage_chain(const Expr& e) const {
        std::vector<const Expr*> ks;
        const Expr* cur = &e;
        while (cur->kind == ExprKind::Index) {
            ks.push_back(&cur->args[1]);
            cur = &cur->args[0];
        }
        if (cur->kind != ExprKind::Var || !storage(cur->text)) return std::nullopt;
        std::reverse(ks.begin(), ks.end());
        return std::make_pair(cur->text, ks);
    }

    IRValue leaf_or_copy(IRValue v, const std::optional<IRValue>& dest, SourcePos pos) {
        if (!dest) return v;
        auto& in = emit(Opcode::Copy, pos);
        in.operands = {std::move(v)};
        return define(in, dest);
    }

    std::vector<IRValue> lower_all(const std::vector<Expr>& es, std::size_t from = 0) {
        std::vector<IRValue> out;
        for (std::size_t i = from; i < es.size(); ++i) out.push_back(lower(es[i]));
        return out;
    }

    IRValue call(const Expr& e, const std::optional<IRValue>& dest, bool want_value, bool emitted) {
        const Expr& callee = e.args[0];
        std::vector<IRValue> ops;
        std::string name;
        bool method = false;
        if (callee.kind == ExprKind::Var) {
            name = callee.text;
        } else if (callee.kind == ExprKind::Member) {
            const Expr& recv = callee.args[0];
            ops.push_back(is_env_base(recv) ? IRValue::var(recv.text) : lower(recv));
            name = callee.text;
            method = true;
            if (is_env_base(recv)) {
                // msg.foo(...) is not a method on a value; treat msg.foo as the callee
                ops.clear();
                name = recv.text + "." + callee.text;
                method = false;
            }
        } else {
            fail(e.pos, "unsupported callee expression");
        }
        auto args = lower_all(e.args, 1);
        ops.insert(ops.end(), args.begin(), args.end());
        auto& in = emit(Opcode::Call, e.pos);
        in.opname = name;
        in.operands = std::move(ops);
        in.method = method;
        in.emit = emitted;
        if (dest || want_value) return define(in, dest);
        return {};
    }

    IRValue lower(const Expr& e, const std::optional<IRValue>& dest = std::nullopt) {
        switch (e.kind) {
        case ExprKind::Var:
            if (storage(e.text)) {
                auto& in = emit(Opcode::LoadStorage, e.pos);
                in.opname = e.text;
                return define(in, dest);
            }
            return leaf_or_copy(IRValue::var(e.text), dest, e.pos);
        case ExprKind::Const:
            switch (e.const_kind) {
            case ConstKind::Bool: return leaf_or_copy(IRValue::boolean(e.text == "true"), dest, e.pos);
            case ConstKind::Str: return leaf_or_copy(IRValue::str(e.text), dest, e.pos);
            default: return leaf_or_copy(IRValue::constant(e.text), dest, e.pos);
            }
        case ExprKind::Member: {
            if (is_env_base(e.args[0])) return leaf_or_copy(IRValue::var(e.args[0].text + "." + e.text), dest, e.pos);
            auto base = lower(e.args[0]);
            auto& in = emit(Opcode::Member, e.pos);
            in.opname = e.text;
            in.operands = {base};
            return define(in, dest);
        }
        case ExprKind::Index: {
            if (auto chain = storage_chain(e)) {
                std::vector<IRValue> ks;
                for (const auto* k : chain->second) ks.push_back(lower(*k));
                auto& in = emit(Opcode::LoadStorage, e.pos);
                in.opname = chain->first;
                in.operands = std::move(ks);
                return define(in, dest);
            }
            auto base = lower(e.args[0]);
            auto idx = lower(e.args[1]);
            auto& in = emit(Opcode::Index, e.pos);
            in.operands = {base, idx};
            return define(in, dest);
        }
        case ExprKind::SliceRange: {
            auto ops = lower_all(e.args);
            auto& in = emit(Opcode::Slice, e.pos);
            in.operands = std::move(ops);
            return define(in, dest);
        }
        case ExprKind::Binary: {
            auto l = lower(e.args[0]);
            auto r = lower(e.args[1]);
            auto& in = emit(Opcode::Binop, e.pos);
            in.opname = e.text;
            in.operands = {l, r};
            return define(in, dest);
        }
        case ExprKind::Unary: {
            auto a = lower(e.args[0]);
            auto& in = emit(Opcode::Unop, e.pos);
            in.opname = e.text;
            in.operands = {a};
            return define(in, dest);
        }
        case ExprKind::Tuple:
        case ExprKind::ArrayLit: {
            auto ops = lower_all(e.args);
            auto& in = emit(e.kind == ExprKind::Tuple ? Opcode::Tuple : Opcode::Array, e.pos);
            in.operands = std::move(ops);
            return define(in, dest);
        }
        case ExprKind::Call: return call(e, dest, true, false);
        }
        fail(e.pos, "unsupported expression");
    }

    void storage_write(const Stmt& s) {
        auto chain = storage_chain(s.lhs());
        if (!chain) fail(s.pos, "unsupported storage write target");
        std::vector<IRValue> ops;
        for (const auto* k : chain->second) ops.push_back(lower(*k));
        IRValue value = lower(s.rhs());
        if (s.op != "=") {
            auto& load = emit(Opcode::LoadStorage, s.pos);
            load.opname = chain->first;
            load.operands = ops;
            IRValue old = define(load, std::nullopt);
            auto& bin = emit(Opcode::Binop, s.pos);
            bin.opname = s.op.substr(0, s.op.size() - 1);
            bin.operands = {old, value};
            value = define(bin, std::nullopt);
        }
        ops.push_back(value);
        auto& st = emit(Opcode::StoreStorage, s.pos);
        st.opname = chain->first;
        st.operands = std::move(ops);
    }

    void assign(const Stmt& s) {
        const Expr& lhs = s.lhs();
        if (lhs.kind != ExprKind::Var || is_env_name(lhs.text))
            fail(s.pos, "unsupported assignment target " + render_expr(lhs));
        IRValue dest = IRValue::var(lhs.text);
        if (s.op == "=") {
            lower(s.rhs(), dest);
            return;
        }
        IRValue r = lower(s.rhs());
        auto& in = emit(Opcode::Binop, s.pos);
        in.opname = s.op.substr(0, s.op.size() - 1);
        in.operands = {dest, r};
        in.dest = dest;
    }

    int open_stmt(const Stmt& s, int depth) {
        fn_.stmts.push_back({s.kind, s.pos, render_stmt_line(s), depth});
        stmt_ = static_cast<int>(fn_.stmts.size()) - 1;
        return stmt_;
    }

    void place_label(const std::string& name, SourcePos pos, int stmt) {
        stmt_ = stmt;
        auto& in = emit(Opcode::Label, pos);
        in.opname = name;
    }

    void jump(const std::string& target, SourcePos pos, int stmt) {
        stmt_ = stmt;
        auto& in = emit(Opcode::Jump, pos);
        in.targets = {target};
    }

    void block(const std::vector<Stmt>& body, int depth) {
        for (const auto& s : body) statement(s, depth);
    }

    void statement(const Stmt& s, int depth) {
        int id = open_stmt(s, depth);
        switch (s.kind) {
        case StmtKind::VarDecl: {
            fn_.local_types[s.name] = s.decl_type;
            if (s.has_init) {
                lower(s.init(), IRValue::var(s.name));
            } else {
                auto& in = emit(Opcode::Copy, s.pos);
                in.operands = {IRValue::constant("0")};
                in.dest = IRValue::var(s.name);
            }
            return;
        }
        case StmtKind::Assign: assign(s); return;
        case StmtKind::StorageWrite: storage_write(s); return;
        case StmtKind::ExprStmt: {
            const Expr& e = s.exprs[0];
            if (e.kind == ExprKind::Call) {
                call(e, std::nullopt, false, s.emit);
            } else {
                lower(e);
            }
            return;
        }
        case StmtKind::Require: {
            auto c = lower(s.cond());
            auto& in = emit(Opcode::Require, s.pos);
            in.operands = {c};
            if (s.exprs.size() > 1) in.opname = render_expr(s.exprs[1]);
            return;
        }
        case StmtKind::Return: {
            auto vs = lower_all(s.exprs);
            auto& in = emit(Opcode::Ret, s.pos);
            in.operands = std::move(vs);
            return;
        }
        case StmtKind::If: {
            auto c = lower(s.cond());
            std::string then_l = label();
            std::string else_l = s.has_else ? label() : std::string{};
            std::string join_l = label();
            {
                auto& br = emit(Opcode::Branch, s.pos);
                br.operands = {c};
                br.targets = {then_l, s.has_else ? else_l : join_l};
            }
            place_label(then_l, s.pos, id);
            block(s.body, depth + 1);
            jump(join_l, s.pos, id);
            if (s.has_else) {
                place_label(else_l, s.pos, id);
                block(s.else_body, depth + 1);
                jump(join_l, s.pos, id);
            }
            place_label(join_l, s.pos, id);
            return;
        }
        case StmtKind::While: {
            std::string head = label();
            std::string body_l = label();
            std::string exit_l = label();
            place_label(head, s.pos, id);
            auto c = lower(s.cond());
            {
                auto& br = emit(Opcode::Branch, s.pos);
                br.operands = {c};
                br.targets = {body_l, exit_l};
            }
            place_label(body_l, s.pos, id);
            block(s.body, depth + 1);
            jump(head, s.pos, id);
            place_label(exit_l, s.pos, id);
            return;
        }
        }
    }
};

void collect_storage(const SourceUnit& unit, IRModule& m) {
    for (const auto& d : unit.storage) {
        if (m.storage.emplace(d.name, d.type).second) {
            m.storage_order.push_back(d.name);
            m.storage_pos[d.name] = d.pos;
        }
    }
    auto note = [&](const Expr& e) {
        if (e.kind == ExprKind::Var && is_synthetic_storage_name(e.text) &&
            m.storage.emplace(e.text, types::SolType::unknown()).second) {
            m.storage_order.push_back(e.text);
            m.storage_pos[e.text] = e.pos;
        }
    };
    for (const auto& fn : unit.functions) {
        for_each_stmt(fn.body, [&](const Stmt& s) {
            for (const auto& e : s.exprs) for_each_expr(e, note);
        });
    }
}

} // namespace

IRFunction lower_function(const SourceUnit& unit, const FunctionDecl& fn) { return Lowerer(unit, fn).run(); }

IRModule lower_ir(const SourceUnit& unit) {
    IRModule m;
    m.file_id = unit.file_id;
    collect_storage(unit, m);
    for (const auto& fn : unit.functions) {
        try {
            m.functions.push_back(lower_function(unit, fn));
        } catch (const LoweringError& e) {
            m.errors.push_back(e);
        }
    }
    return m;
}

} // namespace dsol::frontend
