#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsol/frontend/ast.hpp"
#include "dsol/pipeline/pipeline.hpp"
#include "dsol/types/soltype.hpp"

namespace dsol::eval {

/// Invalid ground-truth document; the message starts with the field path.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Predictions and truth name different units.
class SchemaMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BoundaryEntry {
    std::string name;
    int start = 0;
    int end = 0;
};

/// `function` is empty for storage variables.
struct TypeEntry {
    std::string function;
    std::string name;
    types::SolType type;
};

struct AttributeEntry {
    std::string slot;
    std::string label;
};

struct GroundTruth {
    std::string unit;
    std::vector<BoundaryEntry> functions;
    std::vector<TypeEntry> variables;
    std::vector<AttributeEntry> attributes;
    std::optional<bool> recompiles;
};

GroundTruth parse_ground_truth(const std::string& json_text);
GroundTruth load_ground_truth(const std::string& path);

struct Predictions {
    std::string unit;
    std::vector<BoundaryEntry> functions;
    std::vector<TypeEntry> variables; // concrete types only
    std::vector<AttributeEntry> attributes;
};

/// Boundaries are canonical line spans, so `unit` is canonicalized first.
Predictions predictions_from_unit(const frontend::SourceUnit& unit, const std::string& unit_id);
Predictions predictions_from_text(const std::string& text, const std::string& unit_id);
Predictions predictions_from_report(const pipeline::RunReport& report);

struct Counts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::optional<double> precision() const; // empty when TP + FP = 0
    std::optional<double> recall() const;    // empty when TP + FN = 0
    Counts& operator+=(const Counts& o);
    friend bool operator==(const Counts&, const Counts&) = default;
};

enum class RecompileStatus { Pass, Fail, Skipped };

const char* recompile_status_name(RecompileStatus s);

struct RecompileResult {
    RecompileStatus status = RecompileStatus::Skipped;
    int exit_code = 0;
    std::string reason; // captured stderr on failure
};

struct MetricsTable {
    Counts boundary;
    Counts type;
    Counts attribute;
    std::size_t recompile_checked = 0;
    std::size_t recompile_failed = 0;

    std::optional<double> recompile_failure_rate() const;
    MetricsTable& operator+=(const MetricsTable& o);
    void add(const RecompileResult& r);

    std::string text() const; // aligned plain-text table
    std::string to_json() const;
};

/// "88.26%" with two decimals, or "undefined".
std::string percent(std::optional<double> ratio);

/// Boundaries match on the exact (start, end) span, types on structural
/// equality, attributes on the label. A prediction for a truth entry with the
/// wrong value counts as one FP and one FN.
MetricsTable score(const Predictions& predictions, const GroundTruth& truth);
MetricsTable score(const pipeline::RunReport& report, const GroundTruth& truth);

/// Pairs reports with truth by unit id; SchemaMismatch for a report without truth.
MetricsTable score_all(const std::vector<pipeline::RunReport>& reports, const std::vector<GroundTruth>& truth);

/// Runs `command` on a file holding `text`. "{file}" in the command is replaced
/// by the path, otherwise the path is appended. An empty command is skipped.
RecompileResult recompile_check(const std::string& text, const std::string& command);

} // namespace dsol::eval
