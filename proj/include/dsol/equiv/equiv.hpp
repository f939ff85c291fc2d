#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsol/edits/edits.hpp"
#include "dsol/equiv/term.hpp"
#include "dsol/frontend/ir.hpp"

namespace dsol::equiv {

class SolverUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArityMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Bounds {
    int loop_unroll = 2;
    int max_paths = 64;
    int max_depth = 8;       // inlining depth for calls into the unit
    long max_steps = 100000; // instructions per path
};

/// How inputs are typed and how optimized storage names map back to the original.
struct InputModel {
    std::map<std::string, std::string> slot_alias;        // local slot -> canonical slot
    std::map<std::size_t, types::SolType> param_types;    // by position, overrides declarations
    std::map<std::string, types::SolType> storage_types;  // by canonical slot, overrides declarations
};

struct StorageWrite {
    std::vector<Term> keys;
    Term value;
};

struct ExtCall {
    std::string name; // callee, ".method" for method calls, "emit Event" for events
    std::vector<Term> args;
};

struct SymPath {
    Term cond;
    bool reverted = false;
    std::vector<Term> returns;
    std::map<std::string, std::vector<StorageWrite>> writes; // canonical slot -> writes in order
    std::vector<ExtCall> calls;
};

struct SymbolicSummary {
    std::string function;
    std::vector<std::string> params;
    std::vector<SymPath> paths;
    bool bound_hit = false;

    /// Value of `slot` at `keys` after path `i`, reading through to initial storage.
    Term storage_at(std::size_t i, const std::string& slot, const std::vector<Term>& keys) const;

    // initial-storage reader captured at construction
    std::function<Term(const std::string&, const std::vector<Term>&)> initial;
};

/// Depth-first symbolic execution. Parameters are p!<i>, environment values
/// e!<name>, initial storage s!<slot>(keys). Calls outside the unit, hashing
/// builtins and products of two symbolic terms become uninterpreted functions.
SymbolicSummary symbolic_summary(const frontend::IRModule& module, const std::string& function,
                                 const Bounds& bounds = {}, const InputModel& inputs = {});

struct AlignmentMap {
    std::vector<std::pair<std::string, std::string>> params;  // by position
    std::vector<std::pair<std::string, std::string>> storage; // original slot, optimized slot
    std::vector<std::pair<std::size_t, std::size_t>> returns;

    InputModel optimized_inputs() const; // slot aliases for the optimized side
};

/// Parameters by position, storage by name, renames from the edit set.
/// ArityMismatch when parameter counts differ and no split explains it.
AlignmentMap align(const frontend::IRModule& original, const frontend::IRFunction& m,
                   const frontend::IRModule& optimized, const frontend::IRFunction& m2,
                   const edits::EditSet& edits = {});

struct Probe {
    std::string slot;
    std::vector<std::string> key_vars;
};

/// Phi: both summaries cover the input and some aligned observable differs.
struct Formula {
    Term phi;
    std::vector<std::string> vars;
    std::map<std::string, std::size_t> apps; // uninterpreted functions with arity
    std::vector<Term> app_terms;
    std::vector<Probe> probes;
    std::vector<std::string> observables; // names, in encoding order
    bool bound_hit = false;

    bool trivially_unsat() const { return is_false(phi); }
    std::string smt_script() const;
};

Formula equivalence_assertion(const SymbolicSummary& s, const SymbolicSummary& s2);

struct SolverConfig {
    std::string path = "z3";
    std::vector<std::string> args{"-in", "-smt2"};
    double timeout_s = 10.0;
};

enum class SolverStatus : std::uint8_t { Sat, Unsat, Unknown, Timeout };

struct SolverResult {
    SolverStatus status = SolverStatus::Unknown;
    std::map<std::string, Word> vars;
    AppTable apps;
    std::string output;
    double seconds = 0;
};

/// Runs the solver as a child process on the SMT-LIB script of `phi`.
/// SolverUnavailable when it cannot be launched.
SolverResult solve(const Formula& phi, const SolverConfig& config);

struct Witness {
    std::map<std::string, Word> vars; // p!<i>, e!<name>, k!<slot>!<j>
    AppTable apps;
    std::string observable;
    std::string original;
    std::string optimized;
};

enum class Outcome : std::uint8_t { Equivalent, NonEquivalent, Inconclusive };
enum class Reason : std::uint8_t { None, BoundHit, SolverTimeout, SolverUnknown };

const char* outcome_name(Outcome o); // Equivalent, NonEquivalent, Inconclusive
const char* reason_name(Reason r);   // bound_hit, solver_timeout, solver_unknown

struct EquivalenceVerdict {
    Outcome outcome = Outcome::Inconclusive;
    Reason reason = Reason::None;
    std::optional<Witness> witness;
    std::vector<std::string> params; // original parameter names, for display
    bool solver_called = false;
    double seconds = 0;

    std::string str() const;
    std::string to_json() const;
};

/// Concrete observation of one run under a witness.
struct Observation {
    bool complete = true;
    bool reverted = false;
    std::vector<Word> returns;
    std::vector<std::pair<std::string, std::vector<Word>>> calls;
    std::map<std::string, std::map<std::vector<Word>, Word>> storage; // written and probed entries

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Concrete interpreter over the IR with the same semantics as the symbolic
/// executor; uninterpreted applications read the witness table.
Observation replay(const frontend::IRModule& module, const std::string& function, const Witness& witness,
                   const InputModel& inputs = {},
                   const std::map<std::string, std::vector<std::vector<Word>>>& probes = {});

/// First differing observable between two complete observations.
struct Difference {
    std::string observable;
    std::string original;
    std::string optimized;
};
std::optional<Difference> compare(const Observation& a, const Observation& b);

/// Replays both sides, probing every slot written by either, and reports the
/// first difference.
std::optional<Difference> replay_pair(const frontend::IRModule& original, const std::string& f,
                                      const frontend::IRModule& optimized, const std::string& g,
                                      const Witness& witness, const InputModel& inputs_original,
                                      const InputModel& inputs_optimized);

using Confirm = std::function<std::optional<Difference>(const Witness&)>;

/// unsat -> Equivalent (Inconclusive when bounds were hit); sat -> NonEquivalent
/// only when `confirm` reproduces a difference; unknown / timeout -> Inconclusive.
EquivalenceVerdict decide(const Formula& phi, const SolverConfig& config, const Confirm& confirm);

EquivalenceVerdict check_equivalence(const frontend::IRModule& original, const std::string& f,
                                     const frontend::IRModule& optimized, const std::string& g,
                                     const edits::EditSet& edits = {}, const Bounds& bounds = {},
                                     const SolverConfig& config = {});

} // namespace dsol::equiv
