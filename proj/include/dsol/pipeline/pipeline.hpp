#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsol/edits/edits.hpp"
#include "dsol/equiv/equiv.hpp"
#include "dsol/frontend/ast.hpp"
#include "dsol/llm/llm.hpp"
#include "dsol/prompt/prompt.hpp"
#include "dsol/typecheck/typecheck.hpp"

namespace dsol::pipeline {

struct RunConfig {
    llm::ProviderConfig provider;
    int iteration_limit = 3;
    equiv::Bounds bounds;
    equiv::SolverConfig solver;
    std::size_t prompt_budget = 6000; // tokens per prompt
    std::size_t token_budget = 0;     // total tokens per unit, 0 for none
    bool strict_replies = false;      // reject replies that only parse leniently
    std::size_t units_in_flight = 0;  // 0 for the number of cores

    void validate() const; // std::invalid_argument
    static RunConfig from_json(const std::string& text);
    std::string to_json() const;
};

enum class Status : std::uint8_t {
    Accepted,
    RejectedViolations,
    RejectedNonEquivalent,
    Inconclusive,
    MalformedReply,
    ProviderFailure,
};

const char* status_name(Status s);

struct Iteration {
    std::string prompt_hash;
    edits::EditSet edits;
    llm::ReplyMode mode = llm::ReplyMode::Malformed;
    typecheck::ViolationReport violations;
    std::optional<equiv::EquivalenceVerdict> verdict; // empty when not applicable
    std::string note;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double seconds = 0;
};

struct OptimizationOutcome {
    prompt::OptimizationTarget target;
    Status status = Status::MalformedReply;
    std::vector<Iteration> iterations;
    std::string revision; // unit revision after this target

    std::string to_json() const;
};

/// Content-addressed id of a unit revision.
std::string revision_id(const frontend::SourceUnit& unit);

/// Every declared variable for type, every storage variable for attribute,
/// every function for boundary, in that order.
std::vector<prompt::OptimizationTarget> enumerate_targets(const frontend::SourceUnit& unit);

struct TargetResult {
    OptimizationOutcome outcome;
    frontend::SourceUnit unit; // the next revision (unchanged unless Accepted with edits)
};

/// Prompt, reply, apply, type check and equivalence until acceptance or the
/// iteration limit. `unit` must be canonical.
TargetResult optimize_target(const frontend::SourceUnit& unit, const prompt::OptimizationTarget& target,
                             llm::Provider& provider, const RunConfig& config);

struct SkippedTarget {
    std::string target;
    std::string reason;
};

struct RunReport {
    std::string unit;
    std::string input_path;
    std::string output_path;
    std::vector<std::string> revisions;
    std::vector<OptimizationOutcome> outcomes;
    std::vector<SkippedTarget> skipped;
    std::vector<std::string> errors; // functions that could not be parsed
    std::string optimized_text;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double seconds = 0;

    std::size_t count(Status s) const;
    std::string to_json() const;
};

/// Optimizes every target of the unit in `text`. Without accepted edits the
/// optimized text is the input, byte for byte.
RunReport run_text(const std::string& text, const std::string& unit_id, llm::Provider& provider,
                   const RunConfig& config);

/// Reads `path`, runs the unit and, when `out_dir` is set, writes
/// <stem>.opt.dsol and <stem>.report.json there.
RunReport run_unit(const std::string& path, llm::Provider& provider, const RunConfig& config,
                   const std::string& out_dir = {});

/// Units in parallel, reports in input order. A unit that cannot be read gets
/// a report carrying the error.
std::vector<RunReport> run_batch(const std::vector<std::string>& paths, llm::Provider& provider,
                                 const RunConfig& config, const std::string& out_dir = {});

} // namespace dsol::pipeline
