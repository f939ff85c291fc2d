#include "dsol/parallel/batch.hpp"

#include <exception>
#include <stdexcept>

#include <omp.h>

namespace dsol::parallel {

namespace {

int team(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

// Runs f(i) for every index on an OpenMP team; the first exception is rethrown.
template <class F>
void for_each_index(std::size_t n, int threads, F&& f) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(team(threads))
    for (long i = 0; i < static_cast<long>(n); ++i) {
        try {
            f(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(dsol_batch_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

std::optional<equiv::EquivalenceVerdict> reflexive_one(const FunctionRef& ref, const equiv::Bounds& bounds,
                                                       const equiv::SolverConfig& solver) {
    try {
        return equiv::check_equivalence(*ref.module, ref.function, *ref.module, ref.function, {}, bounds, solver);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace

std::vector<dg::SliceGraph> slice_all_serial(const dg::DependencyGraph& dg, const std::vector<dg::DepLabel>& labels) {
    std::vector<dg::SliceGraph> out;
    out.reserve(dg.nodes().size());
    for (std::size_t i = 0; i < dg.nodes().size(); ++i) out.push_back(dg::slice_variable(dg, static_cast<int>(i), labels));
    return out;
}

std::vector<dg::SliceGraph> slice_all(const dg::DependencyGraph& dg, const std::vector<dg::DepLabel>& labels,
                                      int threads) {
    std::vector<dg::SliceGraph> out(dg.nodes().size());
    for_each_index(out.size(), threads, [&](std::size_t i) { out[i] = dg::slice_variable(dg, static_cast<int>(i), labels); });
    return out;
}

std::vector<typecheck::ViolationReport> check_modules_serial(const std::vector<frontend::IRModule>& modules) {
    std::vector<typecheck::ViolationReport> out;
    out.reserve(modules.size());
    for (const auto& m : modules) out.push_back(typecheck::check_unit(m));
    return out;
}

std::vector<typecheck::ViolationReport> check_modules(const std::vector<frontend::IRModule>& modules, int threads) {
    std::vector<typecheck::ViolationReport> out(modules.size());
    for_each_index(out.size(), threads, [&](std::size_t i) { out[i] = typecheck::check_unit(modules[i]); });
    return out;
}

std::vector<std::optional<equiv::EquivalenceVerdict>> reflexive_serial(const std::vector<FunctionRef>& functions,
                                                                       const equiv::Bounds& bounds,
                                                                       const equiv::SolverConfig& solver) {
    std::vector<std::optional<equiv::EquivalenceVerdict>> out;
    out.reserve(functions.size());
    for (const auto& f : functions) out.push_back(reflexive_one(f, bounds, solver));
    return out;
}

std::vector<std::optional<equiv::EquivalenceVerdict>> reflexive(const std::vector<FunctionRef>& functions,
                                                                const equiv::Bounds& bounds,
                                                                const equiv::SolverConfig& solver, int threads) {
    std::vector<std::optional<equiv::EquivalenceVerdict>> out(functions.size());
    for_each_index(out.size(), threads, [&](std::size_t i) { out[i] = reflexive_one(functions[i], bounds, solver); });
    return out;
}

std::vector<eval::MetricsTable> score_units_serial(const std::vector<eval::Predictions>& predictions,
                                                   const std::vector<eval::GroundTruth>& truth) {
    if (predictions.size() != truth.size()) throw std::invalid_argument("predictions and truth differ in length");
    std::vector<eval::MetricsTable> out;
    out.reserve(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) out.push_back(eval::score(predictions[i], truth[i]));
    return out;
}

std::vector<eval::MetricsTable> score_units(const std::vector<eval::Predictions>& predictions,
                                            const std::vector<eval::GroundTruth>& truth, int threads) {
    if (predictions.size() != truth.size()) throw std::invalid_argument("predictions and truth differ in length");
    std::vector<eval::MetricsTable> out(predictions.size());
    for_each_index(out.size(), threads, [&](std::size_t i) { out[i] = eval::score(predictions[i], truth[i]); });
    return out;
}

} // namespace dsol::parallel
