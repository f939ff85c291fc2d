#include "dsol/flow/dfg.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace dsol::flow {

using frontend::IRInstr;
using frontend::Opcode;
using frontend::ValueKind;

std::string storage_var(const std::string& slot) { return "storage:" + slot; }

std::optional<DefSite> instr_def(const IRInstr& in) {
    if (in.op == Opcode::StoreStorage) return DefSite{storage_var(in.opname), in.operands.size() == 1};
    if (in.dest) return DefSite{in.dest->name, true};
    return std::nullopt;
}

std::vector<std::string> instr_uses(const IRInstr& in) {
    std::vector<std::string> out;
    for (const auto& v : in.operands) {
        if (v.kind == ValueKind::Temp || (v.kind == ValueKind::Var && !frontend::is_env_name(v.name)))
            if (std::find(out.begin(), out.end(), v.name) == out.end()) out.push_back(v.name);
    }
    if (in.op == Opcode::LoadStorage) out.push_back(storage_var(in.opname));
    return out;
}

namespace {

using DefSet = std::vector<char>; // indexed by definition number

struct Defs {
    std::vector<int> instr;                      // def number -> instruction index
    std::vector<DefSite> site;                   // def number -> site
    std::map<int, int> number;                   // instruction index -> def number
    std::map<std::string, std::vector<int>> of;  // variable -> def numbers
};

Defs collect(const frontend::IRFunction& fn) {
    Defs d;
    for (int i = 0; i < static_cast<int>(fn.instrs.size()); ++i) {
        if (auto s = instr_def(fn.instrs[static_cast<std::size_t>(i)])) {
            int n = static_cast<int>(d.instr.size());
            d.instr.push_back(i);
            d.site.push_back(*s);
            d.number[i] = n;
            d.of[s->var].push_back(n);
        }
    }
    return d;
}

void transfer(const Defs& d, const frontend::IRFunction& fn, int i, DefSet& set) {
    auto it = d.number.find(i);
    if (it == d.number.end()) return;
    const auto& site = d.site[static_cast<std::size_t>(it->second)];
    if (site.strong)
        for (int k : d.of.at(site.var)) set[static_cast<std::size_t>(k)] = 0;
    set[static_cast<std::size_t>(it->second)] = 1;
    (void)fn;
}

} // namespace

DataFlowGraph build_dfg(const ControlFlowGraph& cfg) {
    const auto& fn = *cfg.fn;
    Defs d = collect(fn);
    std::size_t n = d.instr.size();
    std::vector<DefSet> in(cfg.blocks.size(), DefSet(n, 0));
    std::vector<DefSet> out(cfg.blocks.size(), DefSet(n, 0));

    std::deque<int> work;
    std::vector<char> queued(cfg.blocks.size(), 1);
    for (const auto& b : cfg.blocks) work.push_back(b.id);
    while (!work.empty()) {
        int b = work.front();
        work.pop_front();
        queued[static_cast<std::size_t>(b)] = 0;
        DefSet cur(n, 0);
        for (int p : cfg.predecessors(b))
            for (std::size_t k = 0; k < n; ++k) cur[k] |= out[static_cast<std::size_t>(p)][k];
        in[static_cast<std::size_t>(b)] = cur;
        for (int i : cfg.block(b).instrs) transfer(d, fn, i, cur);
        if (cur != out[static_cast<std::size_t>(b)]) {
            out[static_cast<std::size_t>(b)] = std::move(cur);
            for (int s : cfg.successors(b))
                if (!queued[static_cast<std::size_t>(s)]) {
                    queued[static_cast<std::size_t>(s)] = 1;
                    work.push_back(s);
                }
        }
    }

    DataFlowGraph g;
    for (const auto& b : cfg.blocks) {
        DefSet cur = in[static_cast<std::size_t>(b.id)];
        for (int i : b.instrs) {
            for (const auto& var : instr_uses(fn.instrs[static_cast<std::size_t>(i)])) {
                auto it = d.of.find(var);
                if (it == d.of.end()) continue;
                for (int k : it->second)
                    if (cur[static_cast<std::size_t>(k)]) g.edges.push_back({d.instr[static_cast<std::size_t>(k)], i, var});
            }
            transfer(d, fn, i, cur);
        }
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    return g;
}

std::string export_dfg(const DataFlowGraph& dfg) {
    std::string out;
    for (const auto& e : dfg.edges)
        out += "i" + std::to_string(e.def) + " -> i" + std::to_string(e.use) + " [" + e.var + "]\n";
    return out;
}

} // namespace dsol::flow
