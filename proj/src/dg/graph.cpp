#include "dsol/dg/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <json.hpp>

namespace dsol::dg {

using frontend::IRFunction;
using frontend::IRInstr;
using frontend::IRModule;
using frontend::IRValue;
using frontend::Opcode;
using frontend::ValueKind;
using types::SolType;

const char* dep_label_name(DepLabel label) {
    switch (label) {
    case DepLabel::DFD: return "DFD";
    case DepLabel::SD: return "SD";
    case DepLabel::TD: return "TD";
    }
    return "?";
}

int DependencyGraph::add_node(DGNode node) {
    if (auto it = index_.find(node.key); it != index_.end()) return it->second;
    node.id = static_cast<int>(nodes_.size());
    index_[node.key] = node.id;
    nodes_.push_back(std::move(node));
    out_.emplace_back();
    in_.emplace_back();
    return nodes_.back().id;
}

int DependencyGraph::add_edge(int src, int dst, DepLabel label, EdgeInfo info) {
    if (src < 0 || dst < 0 || src >= static_cast<int>(nodes_.size()) || dst >= static_cast<int>(nodes_.size()))
        throw ConsistencyError("edge endpoint out of range");
    int id = static_cast<int>(edges_.size());
    edges_.push_back({id, src, dst, label, std::move(info)});
    out_[static_cast<std::size_t>(src)].push_back(id);
    in_[static_cast<std::size_t>(dst)].push_back(id);
    return id;
}

std::optional<int> DependencyGraph::find(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t DependencyGraph::count(DepLabel label) const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [&](const DGEdge& e) { return e.label == label; }));
}

std::string DependencyGraph::serialize() const {
    std::string out;
    for (const auto& n : nodes_) {
        out += "node " + std::to_string(n.id) + (n.kind == NodeKind::Variable ? " var " : " expr ") + n.key + " \"" +
               n.label + "\" @" + n.pos.str() + "\n";
    }
    for (const auto& e : edges_) {
        out += "edge " + std::to_string(e.id) + " " + dep_label_name(e.label) + " " + std::to_string(e.src) + " -> " +
               std::to_string(e.dst);
        if (!e.info.role.empty()) out += " role=" + e.info.role;
        if (e.info.type) out += " type=" + e.info.type->str();
        if (!e.info.name.empty()) out += " name=" + e.info.name;
        out += "\n";
    }
    return out;
}

std::string DependencyGraph::to_json() const {
    nlohmann::ordered_json j;
    j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : nodes_) {
        nlohmann::ordered_json jn;
        jn["id"] = n.id;
        jn["kind"] = n.kind == NodeKind::Variable ? "variable" : "expression";
        jn["key"] = n.key;
        jn["label"] = n.label;
        jn["function"] = n.function;
        jn["line"] = n.pos.line;
        jn["col"] = n.pos.col;
        if (n.kind == NodeKind::Expression) jn["statement"] = n.statement;
        if (n.type) jn["type"] = n.type->str();
        j["nodes"].push_back(jn);
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : edges_) {
        nlohmann::ordered_json je;
        je["id"] = e.id;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["label"] = dep_label_name(e.label);
        je["role"] = e.info.role;
        if (e.info.type) je["type"] = e.info.type->str();
        if (!e.info.name.empty()) je["name"] = e.info.name;
        j["edges"].push_back(je);
    }
    return j.dump(2);
}

std::string var_key(const std::string& fn, const std::string& name) { return "v:" + fn + "::" + name; }
std::string storage_key(const std::string& slot) { return "s:" + slot; }
std::string ret_key(const std::string& fn) { return "r:" + fn; }
std::string expr_key(const std::string& fn, int instr) { return "e:" + fn + "#" + std::to_string(instr); }

DGNode variable_node(const IRFunction& fn, const std::string& name) {
    DGNode n;
    n.kind = NodeKind::Variable;
    n.key = var_key(fn.name, name);
    n.label = name;
    n.function = fn.name;
    n.pos = fn.pos;
    for (std::size_t i = 0; i < fn.params.size(); ++i)
        if (fn.params[i] == name && fn.param_types[i]) n.type = fn.param_types[i];
    if (!fn.is_param(name)) {
        for (const auto& in : fn.instrs)
            if (in.dest && in.dest->kind == ValueKind::Var && in.dest->name == name) {
                n.pos = in.pos;
                break;
            }
    }
    if (auto it = fn.local_types.find(name); it != fn.local_types.end()) n.type = it->second;
    return n;
}

DGNode storage_node(const IRModule& module, const std::string& slot) {
    DGNode n;
    n.kind = NodeKind::Variable;
    n.key = storage_key(slot);
    n.label = slot;
    n.storage = true;
    if (auto it = module.storage_pos.find(slot); it != module.storage_pos.end()) n.pos = it->second;
    if (auto it = module.storage.find(slot); it != module.storage.end() &&
                                             !(it->second.is_unknown() && it->second.spelling().empty()))
        n.type = it->second;
    return n;
}

DGNode return_node(const IRFunction& fn) {
    DGNode n;
    n.kind = NodeKind::Variable;
    n.key = ret_key(fn.name);
    n.label = fn.name;
    n.function = fn.name;
    n.pos = fn.pos;
    n.is_return = true;
    if (fn.returns.size() == 1) n.type = fn.returns[0];
    return n;
}

DGNode expression_node(const IRFunction& fn, int instr) {
    const auto& in = fn.instrs.at(static_cast<std::size_t>(instr));
    DGNode n;
    n.kind = NodeKind::Expression;
    n.key = expr_key(fn.name, instr);
    n.label = in.str();
    n.function = fn.name;
    n.pos = in.pos;
    n.instr = instr;
    n.stmt = in.stmt;
    if (in.stmt >= 0) n.statement = fn.stmts.at(static_cast<std::size_t>(in.stmt)).text;
    return n;
}

namespace {

bool is_named_var(const IRValue& v) { return v.kind == ValueKind::Var && !frontend::is_env_name(v.name); }

int temp_def(const IRFunction& fn, const std::string& temp) {
    for (int i = 0; i < static_cast<int>(fn.instrs.size()); ++i) {
        const auto& d = fn.instrs[static_cast<std::size_t>(i)].dest;
        if (d && d->kind == ValueKind::Temp && d->name == temp) return i;
    }
    return -1;
}

class TypeEdges {
public:
    TypeEdges(const IRModule& m, const IRFunction& fn, const BuiltinTable& b) : m_(m), fn_(fn), b_(b) {}

    std::vector<RawEdge> run() {
        for (int i = 0; i < static_cast<int>(fn_.instrs.size()); ++i) instr(i);
        return std::move(out_);
    }

private:
    const IRModule& m_;
    const IRFunction& fn_;
    const BuiltinTable& b_;
    std::vector<RawEdge> out_;
    int cur_ = -1;

    EdgeInfo info(std::string role, std::optional<SolType> type = std::nullopt, std::string name = {}) const {
        const auto& in = fn_.instrs[static_cast<std::size_t>(cur_)];
        EdgeInfo e;
        e.role = std::move(role);
        e.type = std::move(type);
        e.name = std::move(name);
        e.pos = in.pos;
        if (in.stmt >= 0) e.statement = fn_.stmts[static_cast<std::size_t>(in.stmt)].text;
        e.function = fn_.name;
        e.stmt = in.stmt;
        return e;
    }

    void add(DGNode src, DGNode dst, EdgeInfo i) { out_.push_back({std::move(src), std::move(dst), DepLabel::TD, std::move(i)}); }

    DGNode var(const std::string& name) const { return variable_node(fn_, name); }
    DGNode self() const { return expression_node(fn_, cur_); }

    std::optional<SolType> value_type(const IRValue& v) const {
        if (v.is_literal()) return literal_type(v);
        if (v.kind == ValueKind::Var && frontend::is_env_name(v.name)) return b_.environment(v.name);
        return std::nullopt;
    }

    // Literal or environment value flowing into a variable node.
    bool typed_source(const IRValue& v, const DGNode& dst) {
        if (auto t = value_type(v)) {
            add(self(), dst, info("type", t, v.str()));
            return true;
        }
        return false;
    }

    void operand(const IRValue& v, const std::string& role) {
        if (is_named_var(v)) add(var(v.name), self(), info(role));
    }

    void instr(int i) {
        cur_ = i;
        const IRInstr& in = fn_.instrs[static_cast<std::size_t>(i)];
        const auto& ops = in.operands;
        switch (in.op) {
        case Opcode::LoadStorage:
        case Opcode::StoreStorage: {
            DGNode slot = storage_node(m_, in.opname);
            std::size_t nkeys = in.op == Opcode::StoreStorage ? ops.size() - 1 : ops.size();
            for (std::size_t k = 0; k < nkeys; ++k)
                if (is_named_var(ops[k])) add(var(ops[k].name), slot, info("key"));
            if (in.op == Opcode::StoreStorage) {
                const auto& v = ops.back();
                if (is_named_var(v)) add(var(v.name), slot, info("value"));
                else typed_source(v, slot);
            }
            break;
        }
        case Opcode::Index:
            if (is_named_var(ops[0])) {
                if (is_named_var(ops[1])) add(var(ops[1].name), var(ops[0].name), info("key"));
                add(var(ops[0].name), self(), info("target"));
            } else {
                operand(ops[1], "key");
            }
            break;
        case Opcode::Ret:
            for (const auto& v : ops) {
                if (is_named_var(v)) {
                    add(var(v.name), return_node(fn_), info("return"));
                } else if (v.kind == ValueKind::Temp) {
                    int d = temp_def(fn_, v.name);
                    if (d >= 0) add(expression_node(fn_, d), return_node(fn_), info("return"));
                } else {
                    typed_source(v, return_node(fn_));
                }
            }
            break;
        case Opcode::Copy: break;
        case Opcode::Call:
            for (std::size_t k = 0; k < ops.size(); ++k) operand(ops[k], in.method && k == 0 ? "target" : "operand");
            break;
        case Opcode::Member:
        case Opcode::Slice:
            operand(ops[0], "target");
            for (std::size_t k = 1; k < ops.size(); ++k) operand(ops[k], "operand");
            break;
        default:
            for (const auto& v : ops) operand(v, "operand");
            break;
        }
        if (in.dest && in.dest->kind == ValueKind::Var) destination(in);
    }

    void destination(const IRInstr& in) {
        DGNode dst = var(in.dest->name);
        const auto& ops = in.operands;
        switch (in.op) {
        case Opcode::Copy: {
            const auto& v = ops[0];
            if (is_named_var(v)) add(var(v.name), dst, info("assign"));
            else if (typed_source(v, dst)) {}
            else add(self(), dst, info("assign"));
            return;
        }
        case Opcode::LoadStorage:
            if (ops.empty()) add(storage_node(m_, in.opname), dst, info("assign"));
            else add(self(), dst, info("assign"));
            return;
        case Opcode::Call: {
            if (!in.method) {
                if (const auto* sig = b_.function(in.opname); sig && sig->ret) {
                    add(self(), dst, info("builtin", sig->ret, in.opname));
                    return;
                }
                if (auto t = conversion_type(in.opname)) {
                    add(self(), dst, info("type", t, in.opname));
                    return;
                }
                if (const auto* callee = m_.find(in.opname)) {
                    add(return_node(*callee), dst, info("call-return", std::nullopt, in.opname));
                    return;
                }
            } else if (const auto* sig = b_.method(in.opname); sig && sig->ret) {
                add(self(), dst, info("builtin", sig->ret, in.opname));
                return;
            }
            add(self(), dst, info("assign"));
            return;
        }
        case Opcode::Member:
            if (auto t = b_.member(in.opname)) {
                add(self(), dst, info("builtin", t, in.opname));
                return;
            }
            add(self(), dst, info("assign"));
            return;
        default: add(self(), dst, info("assign")); return;
        }
    }
};

EdgeInfo state_info(const IRFunction& fn, int i, std::string role) {
    const auto& in = fn.instrs[static_cast<std::size_t>(i)];
    EdgeInfo e;
    e.role = std::move(role);
    e.pos = in.pos;
    if (in.stmt >= 0) e.statement = fn.stmts[static_cast<std::size_t>(in.stmt)].text;
    e.function = fn.name;
    e.stmt = in.stmt;
    e.name = in.opname;
    return e;
}

} // namespace

std::vector<RawEdge> extract_type_edges(const IRModule& module, const IRFunction& fn, const BuiltinTable& builtins) {
    return TypeEdges(module, fn, builtins).run();
}

std::vector<RawEdge> extract_state_edges(const IRModule& module) {
    std::vector<RawEdge> out;
    for (const auto& fn : module.functions) {
        for (int i = 0; i < static_cast<int>(fn.instrs.size()); ++i) {
            const auto& in = fn.instrs[static_cast<std::size_t>(i)];
            if (in.op == Opcode::LoadStorage) {
                out.push_back({expression_node(fn, i), storage_node(module, in.opname), DepLabel::SD, state_info(fn, i, "read")});
            } else if (in.op == Opcode::StoreStorage) {
                out.push_back({storage_node(module, in.opname), expression_node(fn, i), DepLabel::SD, state_info(fn, i, "write")});
                const auto& v = in.operands.back();
                if (v.kind != ValueKind::Temp) continue;
                int d = temp_def(fn, v.name);
                if (d < 0) continue;
                const auto& def = fn.instrs[static_cast<std::size_t>(d)];
                if (def.op == Opcode::LoadStorage && def.opname != in.opname) {
                    out.push_back({storage_node(module, def.opname), storage_node(module, in.opname), DepLabel::SD,
                                   state_info(fn, i, "flow")});
                }
            }
        }
    }
    return out;
}

namespace {

void check_endpoint(const IRModule& module, const DGNode& n) {
    if (n.storage) {
        if (!module.is_storage(n.label)) throw ConsistencyError("unknown storage variable " + n.label);
        return;
    }
    const auto* fn = module.find(n.function);
    if (!fn) throw ConsistencyError("node " + n.key + " refers to unknown function " + n.function);
    if (n.kind == NodeKind::Expression && (n.instr < 0 || n.instr >= static_cast<int>(fn->instrs.size())))
        throw ConsistencyError("node " + n.key + " refers to a missing instruction");
}

} // namespace

DependencyGraph assemble_dg(const IRModule& module, const std::vector<flow::ControlFlowGraph>& cfgs,
                            const std::vector<flow::DataFlowGraph>& dfgs, const std::vector<RawEdge>& td,
                            const std::vector<RawEdge>& sd) {
    if (cfgs.size() != dfgs.size()) throw ConsistencyError("cfg/dfg count mismatch");
    DependencyGraph g;
    for (const auto& slot : module.storage_order) g.add_node(storage_node(module, slot));
    for (const auto& fn : module.functions) {
        for (const auto& p : fn.params) g.add_node(variable_node(fn, p));
        for (const auto& in : fn.instrs)
            if (in.dest && in.dest->kind == ValueKind::Var) g.add_node(variable_node(fn, in.dest->name));
    }
    auto merge = [&](const std::vector<RawEdge>& edges) {
        for (const auto& e : edges) {
            check_endpoint(module, e.src);
            check_endpoint(module, e.dst);
            int s = g.add_node(e.src);
            int d = g.add_node(e.dst);
            g.add_edge(s, d, e.label, e.info);
        }
    };
    merge(td);
    merge(sd);
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
        const auto* fn = cfgs[k].fn;
        if (!fn || !module.find(fn->name)) throw ConsistencyError("cfg for a function outside the module");
        for (const auto& e : dfgs[k].edges) {
            int n = static_cast<int>(fn->instrs.size());
            if (e.def < 0 || e.use < 0 || e.def >= n || e.use >= n)
                throw ConsistencyError("data-flow edge outside " + fn->name);
            int s = g.add_node(expression_node(*fn, e.def));
            int d = g.add_node(expression_node(*fn, e.use));
            EdgeInfo info;
            info.role = e.var;
            const auto& use = fn->instrs[static_cast<std::size_t>(e.use)];
            info.pos = use.pos;
            if (use.stmt >= 0) info.statement = fn->stmts[static_cast<std::size_t>(use.stmt)].text;
            info.function = fn->name;
            info.stmt = use.stmt;
            g.add_edge(s, d, DepLabel::DFD, info);
        }
    }
    return g;
}

Analysis analyze(const IRModule& module, const BuiltinTable& builtins) {
    Analysis a;
    std::vector<RawEdge> td;
    for (const auto& fn : module.functions) {
        a.cfgs.push_back(flow::build_cfg(fn));
        a.dfgs.push_back(flow::build_dfg(a.cfgs.back()));
        auto e = extract_type_edges(module, fn, builtins);
        td.insert(td.end(), e.begin(), e.end());
    }
    a.calls = flow::call_graph(module);
    a.dg = assemble_dg(module, a.cfgs, a.dfgs, td, extract_state_edges(module));
    return a;
}

SliceGraph slice_variable(const DependencyGraph& dg, int target, const std::vector<DepLabel>& labels) {
    if (target < 0 || target >= static_cast<int>(dg.nodes().size()))
        throw UnknownNode("no node with id " + std::to_string(target));
    auto allowed = [&](const DGEdge& e) {
        return labels.empty() || std::find(labels.begin(), labels.end(), e.label) != labels.end();
    };
    SliceGraph s;
    s.target = target;
    s.hop[target] = 0;
    std::deque<int> queue{target};
    while (!queue.empty()) {
        int n = queue.front();
        queue.pop_front();
        auto visit = [&](int eid, bool forward) {
            const auto& e = dg.edge(eid);
            if (!allowed(e)) return;
            int m = forward ? e.dst : e.src;
            if (!s.hop.count(m)) {
                s.hop[m] = s.hop[n] + 1;
                queue.push_back(m);
            }
        };
        for (int eid : dg.out_edges(n)) visit(eid, true);
        for (int eid : dg.in_edges(n)) visit(eid, false);
    }
    for (const auto& [n, h] : s.hop) s.nodes.push_back(n);
    std::sort(s.nodes.begin(), s.nodes.end(), [&](int a, int b) {
        const auto& na = dg.node(a);
        const auto& nb = dg.node(b);
        return std::tie(s.hop[a], na.pos, a) < std::tie(s.hop[b], nb.pos, b);
    });
    for (const auto& e : dg.edges())
        if (allowed(e) && s.hop.count(e.src) && s.hop.count(e.dst)) s.edges.push_back(e.id);
    return s;
}

namespace {

constexpr std::size_t kMaxChains = 256;
constexpr std::size_t kMaxHops = 3;

void extend(const flow::CallGraph& cg, std::vector<std::string>& path, std::set<std::string>& on_path, bool up,
            std::size_t hops, std::vector<std::vector<std::string>>& out) {
    if (out.size() >= kMaxChains) return;
    const std::string& end = up ? path.front() : path.back();
    std::vector<std::string> next;
    if (hops < kMaxHops)
        for (const auto& n : up ? cg.callers(end) : cg.callees(end))
            if (!on_path.count(n)) next.push_back(n);
    if (next.empty()) {
        out.push_back(path);
        return;
    }
    for (const auto& n : next) {
        if (up) path.insert(path.begin(), n);
        else path.push_back(n);
        on_path.insert(n);
        extend(cg, path, on_path, up, hops + 1, out);
        on_path.erase(n);
        if (up) path.erase(path.begin());
        else path.pop_back();
    }
}

} // namespace

std::vector<std::vector<std::string>> call_chains(const flow::CallGraph& cg, const std::string& fn) {
    if (!cg.has_node(fn)) throw UnknownFunction("unknown function " + fn);
    std::vector<std::vector<std::string>> ups;
    std::vector<std::vector<std::string>> downs;
    {
        std::vector<std::string> path{fn};
        std::set<std::string> on{fn};
        extend(cg, path, on, true, 0, ups);
        extend(cg, path, on, false, 0, downs);
    }
    std::vector<std::vector<std::string>> chains;
    for (const auto& up : ups) {
        std::set<std::string> used(up.begin(), up.end());
        for (const auto& down : downs) {
            std::vector<std::string> chain = up;
            for (std::size_t i = 1; i < down.size() && !used.count(down[i]); ++i) chain.push_back(down[i]);
            if (std::find(chains.begin(), chains.end(), chain) == chains.end()) chains.push_back(std::move(chain));
        }
    }
    return chains;
}

std::vector<std::string> slice_function(const flow::CallGraph& cg, const std::string& fn) {
    std::vector<std::string> out;
    for (const auto& chain : call_chains(cg, fn))
        for (const auto& f : chain)
            if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    return out;
}

} // namespace dsol::dg
