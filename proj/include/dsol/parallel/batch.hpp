#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsol/dg/graph.hpp"
#include "dsol/equiv/equiv.hpp"
#include "dsol/eval/eval.hpp"
#include "dsol/frontend/ir.hpp"
#include "dsol/typecheck/typecheck.hpp"

namespace dsol::parallel {

/// Batch kernels. Each `*_serial` function is the reference for its OpenMP
/// twin; results are stored by input index, so both return identical vectors.
/// `threads` = 0 uses the OpenMP default.

/// Slice of every DG node over `labels` (all labels when empty).
std::vector<dg::SliceGraph> slice_all_serial(const dg::DependencyGraph& dg, const std::vector<dg::DepLabel>& labels = {});
std::vector<dg::SliceGraph> slice_all(const dg::DependencyGraph& dg, const std::vector<dg::DepLabel>& labels = {},
                                      int threads = 0);

/// Type check of every module.
std::vector<typecheck::ViolationReport> check_modules_serial(const std::vector<frontend::IRModule>& modules);
std::vector<typecheck::ViolationReport> check_modules(const std::vector<frontend::IRModule>& modules, int threads = 0);

struct FunctionRef {
    const frontend::IRModule* module = nullptr;
    std::string function;
};

/// Each function checked against itself. An entry is empty when the check threw.
std::vector<std::optional<equiv::EquivalenceVerdict>> reflexive_serial(const std::vector<FunctionRef>& functions,
                                                                       const equiv::Bounds& bounds = {},
                                                                       const equiv::SolverConfig& solver = {});
std::vector<std::optional<equiv::EquivalenceVerdict>> reflexive(const std::vector<FunctionRef>& functions,
                                                                const equiv::Bounds& bounds = {},
                                                                const equiv::SolverConfig& solver = {},
                                                                int threads = 0);

/// Per-unit scores; pairs must name the same unit.
std::vector<eval::MetricsTable> score_units_serial(const std::vector<eval::Predictions>& predictions,
                                                   const std::vector<eval::GroundTruth>& truth);
std::vector<eval::MetricsTable> score_units(const std::vector<eval::Predictions>& predictions,
                                            const std::vector<eval::GroundTruth>& truth, int threads = 0);

} // namespace dsol::parallel
