#include "dsol/flow/cfg.hpp"

#include <map>

namespace dsol::flow {

using frontend::IRFunction;
using frontend::Opcode;

const char* edge_kind_name(EdgeKind kind) {
    switch (kind) {
    case EdgeKind::Fallthrough: return "fallthrough";
    case EdgeKind::BranchTrue: return "branch-true";
    case EdgeKind::BranchFalse: return "branch-false";
    }
    return "?";
}

std::vector<int> ControlFlowGraph::successors(int b) const {
    std::vector<int> out;
    for (const auto& e : edges)
        if (e.from == b) out.push_back(e.to);
    return out;
}

std::vector<int> ControlFlowGraph::predecessors(int b) const {
    std::vector<int> out;
    for (const auto& e : edges)
        if (e.to == b) out.push_back(e.from);
    return out;
}

ControlFlowGraph build_cfg(const IRFunction& fn) {
    ControlFlowGraph g;
    g.fn = &fn;
    g.blocks.push_back({0, "entry", {}, false});
    bool closed = false;
    for (int i = 0; i < static_cast<int>(fn.instrs.size()); ++i) {
        const auto& in = fn.instrs[static_cast<std::size_t>(i)];
        if (in.op == Opcode::Label) {
            int id = static_cast<int>(g.blocks.size());
            g.blocks.push_back({id, in.opname, {}, false});
            closed = false;
        } else if (closed) {
            int id = static_cast<int>(g.blocks.size());
            g.blocks.push_back({id, "b" + std::to_string(id), {}, false});
            closed = false;
        }
        g.blocks.back().instrs.push_back(i);
        if (frontend::is_terminator(in.op)) closed = true;
    }

    // A trailing block that holds only its label is the function end.
    std::string tail_label;
    std::vector<int> tail_instrs;
    if (g.blocks.size() > 1) {
        const auto& last = g.blocks.back();
        if (last.instrs.size() == 1 && fn.instrs[static_cast<std::size_t>(last.instrs[0])].op == Opcode::Label) {
            tail_label = last.label;
            tail_instrs = last.instrs;
            g.blocks.pop_back();
        }
    }
    g.exit = static_cast<int>(g.blocks.size());
    g.blocks.push_back({g.exit, "exit", tail_instrs, false});

    std::map<std::string, int> by_label;
    for (const auto& b : g.blocks) by_label[b.label] = b.id;
    if (!tail_label.empty()) by_label[tail_label] = g.exit;
    auto target = [&](const std::string& l) { return by_label.at(l); };

    for (const auto& b : g.blocks) {
        if (b.id == g.exit) continue;
        const frontend::IRInstr* last = b.instrs.empty() ? nullptr : &fn.instrs[static_cast<std::size_t>(b.instrs.back())];
        if (last && last->op == Opcode::Branch) {
            g.edges.push_back({b.id, target(last->targets[0]), EdgeKind::BranchTrue});
            g.edges.push_back({b.id, target(last->targets[1]), EdgeKind::BranchFalse});
        } else if (last && last->op == Opcode::Jump) {
            g.edges.push_back({b.id, target(last->targets[0]), EdgeKind::Fallthrough});
        } else if (last && last->op == Opcode::Ret) {
            g.edges.push_back({b.id, g.exit, EdgeKind::Fallthrough});
        } else {
            g.edges.push_back({b.id, b.id + 1, EdgeKind::Fallthrough});
        }
    }

    g.instr_block.assign(fn.instrs.size(), g.exit);
    for (const auto& b : g.blocks)
        for (int i : b.instrs) g.instr_block[static_cast<std::size_t>(i)] = b.id;

    std::vector<char> seen(g.blocks.size(), 0);
    std::vector<int> stack{g.entry};
    seen[0] = 1;
    while (!stack.empty()) {
        int b = stack.back();
        stack.pop_back();
        for (int s : g.successors(b))
            if (!seen[static_cast<std::size_t>(s)]) {
                seen[static_cast<std::size_t>(s)] = 1;
                stack.push_back(s);
            }
    }
    for (auto& b : g.blocks) b.dead = !seen[static_cast<std::size_t>(b.id)];
    return g;
}

std::vector<CfgEdge> back_edges(const ControlFlowGraph& cfg) {
    std::vector<CfgEdge> out;
    std::vector<int> state(cfg.blocks.size(), 0); // 0 new, 1 on stack, 2 done
    auto dfs = [&](auto&& self, int b) -> void {
        state[static_cast<std::size_t>(b)] = 1;
        for (const auto& e : cfg.edges) {
            if (e.from != b) continue;
            auto& s = state[static_cast<std::size_t>(e.to)];
            if (s == 1) out.push_back(e);
            else if (s == 0) self(self, e.to);
        }
        state[static_cast<std::size_t>(b)] = 2;
    };
    dfs(dfs, cfg.entry);
    return out;
}

std::string export_cfg(const ControlFlowGraph& cfg) {
    std::string out;
    for (const auto& e : cfg.edges)
        out += cfg.block(e.from).label + " -> " + cfg.block(e.to).label + " [" + edge_kind_name(e.kind) + "]\n";
    return out;
}

} // namespace dsol::flow
