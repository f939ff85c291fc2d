#pragma once

#include <set>
#include <string>
#include <vector>

#include "dsol/frontend/ir.hpp"

namespace dsol::flow {

struct CallEdge {
    std::string caller;
    std::string callee;
    frontend::SourcePos pos;
};

struct CallGraph {
    std::vector<std::string> nodes; // module function order
    std::vector<CallEdge> edges;    // one per resolved call site
    std::set<std::string> externals;

    bool has_node(const std::string& name) const;
    /// Distinct callees / callers, sorted by name.
    std::vector<std::string> callees(const std::string& name) const;
    std::vector<std::string> callers(const std::string& name) const;
};

/// Name under which an unresolved call is listed in externals.
std::string callee_name(const frontend::IRInstr& call);

CallGraph call_graph(const frontend::IRModule& module);

} // namespace dsol::flow
