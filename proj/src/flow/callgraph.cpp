#include "dsol/flow/callgraph.hpp"

#include <algorithm>

namespace dsol::flow {

bool CallGraph::has_node(const std::string& name) const {
    return std::find(nodes.begin(), nodes.end(), name) != nodes.end();
}

std::vector<std::string> CallGraph::callees(const std::string& name) const {
    std::vector<std::string> out;
    for (const auto& e : edges)
        if (e.caller == name) out.push_back(e.callee);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> CallGraph::callers(const std::string& name) const {
    std::vector<std::string> out;
    for (const auto& e : edges)
        if (e.callee == name) out.push_back(e.caller);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string callee_name(const frontend::IRInstr& call) {
    if (call.method && !call.operands.empty()) return call.operands[0].str() + "." + call.opname;
    return call.opname;
}

CallGraph call_graph(const frontend::IRModule& module) {
    CallGraph g;
    for (const auto& fn : module.functions) g.nodes.push_back(fn.name);
    for (const auto& fn : module.functions) {
        for (const auto& in : fn.instrs) {
            if (in.op != frontend::Opcode::Call) continue;
            if (!in.method && module.has_function(in.opname)) {
                g.edges.push_back({fn.name, in.opname, in.pos});
            } else {
                g.externals.insert(callee_name(in));
            }
        }
    }
    return g;
}

} // namespace dsol::flow
