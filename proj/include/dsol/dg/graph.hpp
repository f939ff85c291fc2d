#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsol/dg/builtins.hpp"
#include "dsol/flow/callgraph.hpp"
#include "dsol/flow/cfg.hpp"
#include "dsol/flow/dfg.hpp"
#include "dsol/frontend/ir.hpp"

namespace dsol::dg {

using frontend::SourcePos;

class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownNode : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownFunction : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class NodeKind : std::uint8_t { Variable, Expression };
enum class DepLabel : std::uint8_t { DFD, SD, TD };

const char* dep_label_name(DepLabel label);

struct DGNode {
    int id = -1;
    NodeKind kind = NodeKind::Variable;
    std::string key;      // unique: v:<fn>::<name>, s:<slot>, r:<fn>, e:<fn>#<instr>
    std::string label;    // display name
    std::string function; // owning function, empty for storage
    SourcePos pos;
    int instr = -1;       // expression nodes
    int stmt = -1;        // expression nodes
    std::string statement; // canonical text of the owning statement
    bool storage = false;
    bool is_return = false;
    std::optional<types::SolType> type; // declared type of a variable node, if any
};

struct EdgeInfo {
    std::string role;                 // TD: key, value, operand, target, assign, call-return, builtin,
                                      //     type, return; SD: read, write, flow; DFD: the variable
    std::optional<types::SolType> type; // annotated type (builtin / literal / environment)
    std::string name;                 // builtin or callee name when relevant
    SourcePos pos;                    // position the relation arises at
    std::string statement;            // statement the relation arises in
    std::string function;
    int stmt = -1;                    // index of that statement in the function
};

/// Edge before assembly: endpoints carried as full node descriptors.
struct RawEdge {
    DGNode src;
    DGNode dst;
    DepLabel label = DepLabel::TD;
    EdgeInfo info;
};

struct DGEdge {
    int id = -1;
    int src = -1;
    int dst = -1;
    DepLabel label = DepLabel::TD;
    EdgeInfo info;
};

class DependencyGraph {
public:
    int add_node(DGNode node); // returns the existing id when the key is present
    int add_edge(int src, int dst, DepLabel label, EdgeInfo info = {});

    const std::vector<DGNode>& nodes() const { return nodes_; }
    const std::vector<DGEdge>& edges() const { return edges_; }
    const DGNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const DGEdge& edge(int id) const { return edges_.at(static_cast<std::size_t>(id)); }
    std::optional<int> find(const std::string& key) const;

    const std::vector<int>& out_edges(int node) const { return out_.at(static_cast<std::size_t>(node)); }
    const std::vector<int>& in_edges(int node) const { return in_.at(static_cast<std::size_t>(node)); }

    std::size_t count(DepLabel label) const;

    /// Deterministic line-oriented serialization.
    std::string serialize() const;
    std::string to_json() const;

private:
    std::vector<DGNode> nodes_;
    std::vector<DGEdge> edges_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
    std::map<std::string, int> index_;
};

std::string var_key(const std::string& fn, const std::string& name);
std::string storage_key(const std::string& slot);
std::string ret_key(const std::string& fn);
std::string expr_key(const std::string& fn, int instr);

DGNode variable_node(const frontend::IRFunction& fn, const std::string& name);
DGNode storage_node(const frontend::IRModule& module, const std::string& slot);
DGNode return_node(const frontend::IRFunction& fn);
DGNode expression_node(const frontend::IRFunction& fn, int instr);

std::vector<RawEdge> extract_type_edges(const frontend::IRModule& module, const frontend::IRFunction& fn,
                                        const BuiltinTable& builtins);
std::vector<RawEdge> extract_state_edges(const frontend::IRModule& module);

/// Merges DFD edges from the data-flow graphs with TD and SD edges. The node set
/// is every edge endpoint plus every declared variable (parameters, assigned
/// locals, storage).
DependencyGraph assemble_dg(const frontend::IRModule& module, const std::vector<flow::ControlFlowGraph>& cfgs,
                            const std::vector<flow::DataFlowGraph>& dfgs, const std::vector<RawEdge>& td,
                            const std::vector<RawEdge>& sd);

/// Everything above in one call.
struct Analysis {
    std::vector<flow::ControlFlowGraph> cfgs;
    std::vector<flow::DataFlowGraph> dfgs;
    flow::CallGraph calls;
    DependencyGraph dg;
};
Analysis analyze(const frontend::IRModule& module, const BuiltinTable& builtins = BuiltinTable::defaults());

struct SliceGraph {
    int target = -1;
    std::vector<int> nodes;   // ascending hop, then position, then id
    std::vector<int> edges;   // DG edge ids with both endpoints in the slice
    std::map<int, int> hop;   // node -> undirected BFS distance from target
};

/// Forward+backward reachability from target, optionally restricted to edges
/// whose label is in `labels`.
SliceGraph slice_variable(const DependencyGraph& dg, int target, const std::vector<DepLabel>& labels = {});

/// Every maximal simple call chain through fn (callers above, callees below,
/// neighbours visited in name order), concatenated and deduplicated.
std::vector<std::string> slice_function(const flow::CallGraph& cg, const std::string& fn);

/// The maximal chains themselves, each as an ordered list of functions.
std::vector<std::vector<std::string>> call_chains(const flow::CallGraph& cg, const std::string& fn);

} // namespace dsol::dg
