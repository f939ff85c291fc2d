#pragma once

#include <string>
#include <vector>

#include "dsol/edits/edits.hpp"
#include "dsol/equiv/equiv.hpp"
#include "dsol/frontend/ast.hpp"
#include "dsol/typecheck/typecheck.hpp"

namespace dsol::verify {

struct VerifyOptions {
    equiv::Bounds bounds;
    equiv::SolverConfig solver;
    edits::EditSet edits;               // used for alignment when known
    std::vector<std::string> functions; // restrict the equivalence checks; empty for all shared functions
};

struct FunctionCheck {
    std::string function;
    std::optional<equiv::EquivalenceVerdict> verdict;
    std::string error; // e.g. arity mismatch
};

struct VerifyReport {
    typecheck::ViolationReport violations;     // introduced by the optimized unit
    typecheck::ViolationReport all_violations; // everything in the optimized unit
    std::vector<FunctionCheck> functions;
    std::vector<std::string> added;   // only in the optimized unit
    std::vector<std::string> removed; // only in the original unit

    bool equivalent() const; // every check Equivalent
    bool ok() const { return violations.empty() && equivalent(); }
    std::string text() const;
    std::string to_json() const;
};

/// Type check of the optimized unit plus per-function equivalence against the
/// original. Never contacts a model.
VerifyReport verify_units(const frontend::SourceUnit& original, const frontend::SourceUnit& optimized,
                          const VerifyOptions& options = {});

VerifyReport verify_files(const std::string& original_path, const std::string& optimized_path,
                          const VerifyOptions& options = {});

} // namespace dsol::verify
