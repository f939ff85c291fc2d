#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsol/dg/builtins.hpp"
#include "dsol/frontend/ir.hpp"
#include "dsol/types/lattice.hpp"

namespace dsol::typecheck {

enum class Rule : std::uint8_t {
    Constant,
    Shift,
    Numeric,
    Compare,
    TupleArray,
    Comprehension,
    Boolean,
    Bitwise,
    Equality,
    Call,
    Slice,
};

inline constexpr int kRuleCount = 11;

const char* rule_name(Rule rule); // "Constant", "LShift/RShift", ...
const std::vector<Rule>& all_rules();

/// pi: storage types, then per-function locals and parameters. Lookups resolve
/// locals first, then storage, then environment values.
class TypeEnv {
public:
    static TypeEnv seed(const frontend::IRModule& module, const dg::BuiltinTable& builtins = dg::BuiltinTable::defaults());

    std::optional<types::SolType> lookup(const std::string& function, const std::string& name) const;
    void bind(const std::string& function, const std::string& name, types::SolType type);
    void bind_storage(const std::string& slot, types::SolType type);

    const std::map<std::string, types::SolType>& storage() const { return storage_; }
    const std::map<std::string, types::SolType>& locals(const std::string& function) const;
    const dg::BuiltinTable& builtins() const { return *builtins_; }

private:
    const dg::BuiltinTable* builtins_ = nullptr;
    std::map<std::string, types::SolType> storage_;
    std::map<std::string, std::map<std::string, types::SolType>> locals_;
};

struct Violation {
    Rule rule = Rule::Constant;
    std::string function;
    frontend::SourcePos pos;
    std::string statement; // canonical statement text
    std::string expected;  // family set or type
    std::string found;
    std::string suggestion;

    /// Position-free identity used to compare reports across edits.
    std::string key() const;
    std::string str() const;
};

struct ViolationReport {
    std::vector<Violation> violations; // sorted by function, position, rule

    bool empty() const { return violations.empty(); }
    std::size_t count(Rule rule) const;
    std::string to_json() const;
    /// Violation information fed back to the model.
    std::string text() const;
};

/// Applies every rule to its syntactic form in each function and extends `env`
/// with the types inferred for undeclared locals.
ViolationReport check_unit(const frontend::IRModule& module, TypeEnv& env);
ViolationReport check_unit(const frontend::IRModule& module);

/// Violations of `current` not matched by one in `baseline` (multiset on key()).
ViolationReport new_violations(const ViolationReport& baseline, const ViolationReport& current);

/// Literal `v` can be stored in `target` without an explicit conversion.
bool literal_fits(const frontend::IRValue& v, const types::SolType& target);

} // namespace dsol::typecheck
