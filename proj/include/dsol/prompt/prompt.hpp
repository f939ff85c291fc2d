#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsol/dg/graph.hpp"
#include "dsol/frontend/ast.hpp"

namespace dsol::prompt {

class EmptySlice : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedKind : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingTemplate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidTarget : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TargetKind : std::uint8_t { VariableType, ContractAttribute, FunctionBoundary };

const char* target_kind_name(TargetKind kind); // "type", "attribute", "boundary"

/// Storage type targets leave `function` empty; boundary targets leave `name` empty.
struct OptimizationTarget {
    TargetKind kind = TargetKind::VariableType;
    std::string function;
    std::string name;

    /// type:<fn>.<var>, type:<slot>, attr:<slot>, boundary:<fn>
    std::string id() const;
    static OptimizationTarget parse(const std::string& id);

    static OptimizationTarget variable(std::string function, std::string name);
    static OptimizationTarget storage(std::string slot);
    static OptimizationTarget attribute(std::string slot);
    static OptimizationTarget boundary(std::string function);

    friend bool operator==(const OptimizationTarget&, const OptimizationTarget&) = default;
};

struct CotTemplate {
    std::string category; // type, state, control
    std::string row;
    std::string pattern;
    std::map<std::string, std::vector<std::string>> choices; // alternative groups picked by edge role
};

class TemplateSet {
public:
    static TemplateSet load(const std::string& path);
    static TemplateSet parse(const std::string& json_text);
    static const TemplateSet& defaults();

    int version() const { return version_; }
    const std::vector<CotTemplate>& rows() const { return rows_; }
    const CotTemplate& row(const std::string& name) const; // MissingTemplate if absent
    const std::string& instruction(TargetKind kind) const;
    const std::string& output_format(TargetKind kind) const;
    const std::string& feedback_header() const { return feedback_; }

private:
    int version_ = 0;
    std::vector<CotTemplate> rows_;
    std::map<std::string, std::string> instructions_;
    std::map<std::string, std::string> formats_;
    std::string feedback_;
};

/// Fills placeholders left to right; repeated placeholders take successive
/// values. `choice` selects the alternative in each choice group.
std::string fill(const CotTemplate& tpl, const std::map<std::string, std::vector<std::string>>& values,
                 const std::string& choice = {});

struct Sentence {
    std::string text;
    std::string row;
    int hop = 0;
    frontend::SourcePos pos;
    int edge = -1; // DG edge id, -1 for statement-derived sentences
};

std::vector<std::string> candidates_for(TargetKind kind);

/// DG node standing for the target variable. InvalidTarget if absent or the
/// kind does not fit the node.
int target_node(const frontend::IRModule& module, const dg::DependencyGraph& dg, const OptimizationTarget& target);

/// Slice for a variable target: TD edges for types, SD edges for attributes.
dg::SliceGraph target_slice(const frontend::IRModule& module, const dg::DependencyGraph& dg,
                            const OptimizationTarget& target);

/// Storage declarations and the statements owning slice expression nodes or slice edges,
/// grouped under their function headers, in source order.
std::string render_context(const frontend::SourceUnit& unit, const frontend::IRModule& module,
                           const dg::DependencyGraph& dg, const dg::SliceGraph& slice);

/// Full canonical bodies of the listed functions in source order, with line
/// numbers matching the canonical rendering of the whole unit.
std::string render_function_context(const frontend::SourceUnit& unit, const std::vector<std::string>& functions);

/// One sentence per slice edge, ordered by the nearer endpoint's hop, then
/// position, then edge id.
std::vector<Sentence> render_cot(const dg::DependencyGraph& dg, const dg::SliceGraph& slice,
                                 const TemplateSet& templates = TemplateSet::defaults());

/// Control-flow sentences for a boundary target: call sites, modifier-like
/// require prefixes shared by at least two functions, returns, declarations.
std::vector<Sentence> boundary_cot(const frontend::IRModule& module, const flow::CallGraph& cg,
                                   const std::string& function, const std::vector<std::string>& chain,
                                   const TemplateSet& templates = TemplateSet::defaults());

struct PromptOptions {
    std::size_t token_budget = 6000;
    std::string feedback; // violation text from the previous iteration
};

struct PromptBundle {
    OptimizationTarget target;
    std::string instruction;
    std::string context;
    std::vector<std::string> candidates;
    std::vector<Sentence> cot;
    std::string feedback;
    std::string output_format;
    std::size_t dropped = 0; // sentences removed to fit the budget

    std::string text() const;
    std::string to_json() const;
    std::uint64_t hash() const; // FNV-1a over text()
    std::size_t token_estimate() const;
};

std::size_t estimate_tokens(const std::string& text);
std::uint64_t fnv1a(const std::string& text);
std::string hash_hex(std::uint64_t h);

PromptBundle assemble_prompt(const OptimizationTarget& target, std::string context, std::vector<std::string> candidates,
                             std::vector<Sentence> cot, const PromptOptions& options = {},
                             const TemplateSet& templates = TemplateSet::defaults());

/// Slice, context, candidates and chain-of-thought for one target.
PromptBundle build_prompt(const frontend::SourceUnit& unit, const frontend::IRModule& module,
                          const dg::Analysis& analysis, const OptimizationTarget& target,
                          const PromptOptions& options = {}, const TemplateSet& templates = TemplateSet::defaults());

} // namespace dsol::prompt
