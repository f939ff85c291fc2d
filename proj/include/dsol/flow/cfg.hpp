#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsol/frontend/ir.hpp"

namespace dsol::flow {

enum class EdgeKind : std::uint8_t { Fallthrough, BranchTrue, BranchFalse };

const char* edge_kind_name(EdgeKind kind);

struct BasicBlock {
    int id = 0;
    std::string label;       // "entry", "exit", the IR label, or "b<id>"
    std::vector<int> instrs; // indices into IRFunction::instrs
    bool dead = false;       // unreachable from entry
};

struct CfgEdge {
    int from = 0;
    int to = 0;
    EdgeKind kind = EdgeKind::Fallthrough;
    bool operator==(const CfgEdge&) const = default;
};

/// Per-function control-flow graph. Holds a pointer to the function it was built
/// from; the function must outlive the graph.
struct ControlFlowGraph {
    const frontend::IRFunction* fn = nullptr;
    std::vector<BasicBlock> blocks;
    std::vector<CfgEdge> edges;
    std::vector<int> instr_block; // instruction index -> block id
    int entry = 0;
    int exit = 0;

    std::vector<int> successors(int block) const;
    std::vector<int> predecessors(int block) const;
    const BasicBlock& block(int id) const { return blocks.at(static_cast<std::size_t>(id)); }
};

/// Splits at labels and after terminators. A synthetic exit block is always
/// appended; a trailing block holding only a label is folded into it.
ControlFlowGraph build_cfg(const frontend::IRFunction& fn);

/// Edges whose target is on the DFS stack from entry (loop back-edges).
std::vector<CfgEdge> back_edges(const ControlFlowGraph& cfg);

/// Line-oriented export: one `a -> b [kind]` line per edge, blocks named by label.
std::string export_cfg(const ControlFlowGraph& cfg);

} // namespace dsol::flow
