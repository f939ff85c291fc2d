#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsol/equiv/equiv.hpp"

namespace dsol::equiv::detail {

/// Executes one function of a module. In concrete mode every input is a
/// constant, uninterpreted applications are read from `table`, loops run to
/// completion within the step budget and the single path is returned.
class Executor {
public:
    Executor(const frontend::IRModule& module, Bounds bounds, InputModel inputs);

    void make_concrete(const std::map<std::string, Word>* vars, const AppTable* table);

    SymbolicSummary run(const std::string& function);

    Term initial(const std::string& slot, const std::vector<Term>& keys) const;
    std::string canonical(const std::string& slot) const;

private:
    struct FnInfo {
        std::set<std::string> signed_names;
        std::set<std::size_t> loop_headers;
        std::map<std::string, std::size_t> labels;
    };

    struct Frame {
        const frontend::IRFunction* fn = nullptr;
        const FnInfo* info = nullptr;
        std::map<std::string, Term> vars;
        std::size_t pc = 0;
        std::map<std::size_t, int> visits;
        std::optional<std::string> dest; // caller variable receiving the result
    };

    struct State {
        Term cond;
        std::vector<Frame> frames;
        SymPath path;
        int ext_counter = 0;
        long steps = 0;
    };

    const FnInfo& info(const frontend::IRFunction& fn);
    Term input(const std::string& name) const;
    Term uf(const std::string& name, std::vector<Term> args) const;
    Term nonlinear(Op op, const std::string& tag, const Term& a, const Term& b) const;
    Term value(const Frame& f, const frontend::IRValue& v) const;
    bool is_signed(const Frame& f, const frontend::IRValue& v) const;
    void define(Frame& f, const std::string& name, Term t) const;
    Term load(const State& s, const std::string& local_slot, const std::vector<Term>& keys) const;
    Term binop(const Frame& f, const frontend::IRInstr& in) const;
    Term unop(const Frame& f, const frontend::IRInstr& in) const;

    // Returns false when the state finished or was dropped.
    bool step(State& s, std::vector<State>& work);
    void push_frame(State& s, const frontend::IRFunction& fn, const std::vector<Term>& args,
                    std::optional<std::string> dest, bool entry);
    void finish_return(State& s, std::vector<Term> values, std::vector<State>& work);
    void complete(State& s);
    void fork(State& s, const Term& c, std::vector<State>& work, bool revert_on_false);

    const frontend::IRModule& module_;
    Bounds bounds_;
    InputModel inputs_;
    bool concrete_ = false;
    const std::map<std::string, Word>* vars_ = nullptr;
    const AppTable* table_ = nullptr;
    std::map<const frontend::IRFunction*, FnInfo> infos_;
    std::vector<SymPath> done_;
    bool bound_hit_ = false;
    bool stop_ = false;
};

Term coerce(const Term& t, const types::SolType& type);
types::SolType value_type_at(types::SolType t, std::size_t depth);
Word string_word(const std::string& s);
Word name_id(const std::string& s);

} // namespace dsol::equiv::detail
