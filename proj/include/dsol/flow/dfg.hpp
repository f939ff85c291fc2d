#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsol/flow/cfg.hpp"

namespace dsol::flow {

struct DfgEdge {
    int def = 0; // instruction index of the definition
    int use = 0; // instruction index of the use
    std::string var;
    bool operator==(const DfgEdge&) const = default;
    auto operator<=>(const DfgEdge&) const = default;
};

struct DataFlowGraph {
    std::vector<DfgEdge> edges; // sorted by (def, use, var)
};

/// Pseudo-variable for a storage slot.
std::string storage_var(const std::string& slot);

struct DefSite {
    std::string var;
    bool strong = true; // false for keyed storage writes, which do not kill
};

/// Variable defined by an instruction, if any.
std::optional<DefSite> instr_def(const frontend::IRInstr& in);

/// Variables read by an instruction (environment values excluded).
std::vector<std::string> instr_uses(const frontend::IRInstr& in);

/// Reaching-definitions def-use edges (iterative worklist to fixpoint).
DataFlowGraph build_dfg(const ControlFlowGraph& cfg);

/// One `i<def> -> i<use> [var]` line per edge.
std::string export_dfg(const DataFlowGraph& dfg);

} // namespace dsol::flow
