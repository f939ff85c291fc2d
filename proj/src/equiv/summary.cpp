#include <algorithm>
#include <set>

#include "dsol/equiv/equiv.hpp"
#include "exec.hpp"

namespace dsol::equiv {

SymbolicSummary symbolic_summary(const frontend::IRModule& module, const std::string& function, const Bounds& bounds,
                                 const InputModel& inputs) {
    detail::Executor ex(module, bounds, inputs);
    return ex.run(function);
}

Term SymbolicSummary::storage_at(std::size_t i, const std::string& slot, const std::vector<Term>& keys) const {
    Term v = initial(slot, keys);
    const auto& writes = paths.at(i).writes;
    if (auto it = writes.find(slot); it != writes.end())
        for (const auto& w : it->second) {
            std::vector<Term> parts;
            if (w.keys.size() != keys.size()) continue;
            for (std::size_t k = 0; k < keys.size(); ++k) parts.push_back(T::eq(w.keys[k], keys[k]));
            v = T::ite(T::land(parts), w.value, v);
        }
    return v;
}

InputModel AlignmentMap::optimized_inputs() const {
    InputModel m;
    for (const auto& [o, p] : storage)
        if (o != p) m.slot_alias[p] = o;
    return m;
}

AlignmentMap align(const frontend::IRModule& original, const frontend::IRFunction& m,
                   const frontend::IRModule& optimized, const frontend::IRFunction& m2, const edits::EditSet& edits) {
    AlignmentMap map;
    if (m.params.size() != m2.params.size()) {
        bool explained = std::any_of(edits.edits.begin(), edits.edits.end(), [&](const edits::Edit& e) {
            return e.kind == edits::EditKind::Split && (e.host == m.name || e.new_name == m2.name);
        });
        if (!explained)
            throw ArityMismatch(m.name + " takes " + std::to_string(m.params.size()) + " parameters but " + m2.name +
                                " takes " + std::to_string(m2.params.size()));
    }
    for (std::size_t i = 0; i < std::min(m.params.size(), m2.params.size()); ++i)
        map.params.emplace_back(m.params[i], m2.params[i]);

    std::map<std::string, std::string> renamed;
    for (const auto& e : edits.edits)
        if (e.kind == edits::EditKind::Rename && original.is_storage(e.old_name) && optimized.is_storage(e.new_name))
            renamed[e.old_name] = e.new_name;
    for (const auto& slot : original.storage_order) {
        if (auto it = renamed.find(slot); it != renamed.end())
            map.storage.emplace_back(slot, it->second);
        else if (optimized.is_storage(slot))
            map.storage.emplace_back(slot, slot);
    }
    for (std::size_t i = 0; i < std::min(m.returns.size(), m2.returns.size()); ++i) map.returns.emplace_back(i, i);
    return map;
}

namespace {

struct Shape {
    std::size_t returns = 0;
    std::size_t calls = 0;
    std::size_t call_arity = 0;
    std::map<std::string, std::size_t> slots; // slot -> key count
};

void measure(const SymbolicSummary& s, Shape& shape) {
    for (const auto& p : s.paths) {
        if (p.reverted) continue;
        shape.returns = std::max(shape.returns, p.returns.size());
        shape.calls = std::max(shape.calls, p.calls.size());
        for (const auto& c : p.calls) shape.call_arity = std::max(shape.call_arity, c.args.size());
        for (const auto& [slot, ws] : p.writes)
            for (const auto& w : ws) shape.slots[slot] = std::max(shape.slots[slot], w.keys.size());
    }
}

std::vector<Term> observe(const SymbolicSummary& s, std::size_t i, const Shape& shape,
                          const std::map<std::string, std::vector<Term>>& probes) {
    const auto& p = s.paths[i];
    std::vector<Term> out;
    auto at = [](const std::vector<Term>& xs, std::size_t k) { return k < xs.size() ? xs[k] : T::bv(0); };
    out.push_back(T::bv(p.returns.size()));
    for (std::size_t k = 0; k < shape.returns; ++k) out.push_back(at(p.returns, k));
    out.push_back(T::bv(p.calls.size()));
    for (std::size_t k = 0; k < shape.calls; ++k) {
        bool has = k < p.calls.size();
        out.push_back(T::bv(has ? detail::name_id(p.calls[k].name) : Word(0)));
        for (std::size_t a = 0; a < shape.call_arity; ++a)
            out.push_back(has ? at(p.calls[k].args, a) : T::bv(0));
    }
    for (const auto& [slot, keys] : probes) out.push_back(s.storage_at(i, slot, keys));
    return out;
}

std::vector<std::string> observable_names(const Shape& shape) {
    std::vector<std::string> names{"return count"};
    for (std::size_t k = 0; k < shape.returns; ++k) names.push_back("return[" + std::to_string(k) + "]");
    names.emplace_back("call count");
    for (std::size_t k = 0; k < shape.calls; ++k) {
        names.push_back("call[" + std::to_string(k) + "]");
        for (std::size_t a = 0; a < shape.call_arity; ++a)
            names.push_back("call[" + std::to_string(k) + "].arg[" + std::to_string(a) + "]");
    }
    for (const auto& [slot, n] : shape.slots) names.push_back("storage " + slot);
    return names;
}

struct Encoded {
    Term covered;
    Term reverted;
    std::vector<Term> obs;
};

Encoded encode(const SymbolicSummary& s, const Shape& shape, const std::map<std::string, std::vector<Term>>& probes) {
    Encoded e;
    std::vector<Term> conds, revs;
    for (const auto& p : s.paths) {
        conds.push_back(p.cond);
        if (p.reverted) revs.push_back(p.cond);
    }
    // without truncation the path conditions partition the input space
    e.covered = s.bound_hit ? T::lor(conds) : T::boolean(true);
    e.reverted = T::lor(revs);

    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < s.paths.size(); ++i)
        if (!s.paths[i].reverted) live.push_back(i);
    std::size_t width = observable_names(shape).size();
    if (live.empty()) {
        e.obs.assign(width, T::bv(0));
        return e;
    }
    e.obs = observe(s, live.back(), shape, probes);
    for (auto it = live.rbegin() + 1; it != live.rend(); ++it) {
        auto o = observe(s, *it, shape, probes);
        for (std::size_t k = 0; k < width; ++k) e.obs[k] = T::ite(s.paths[*it].cond, o[k], e.obs[k]);
    }
    return e;
}

} // namespace

Formula equivalence_assertion(const SymbolicSummary& s, const SymbolicSummary& s2) {
    Shape shape;
    measure(s, shape);
    measure(s2, shape);

    Formula f;
    std::map<std::string, std::vector<Term>> probes;
    for (const auto& [slot, n] : shape.slots) {
        Probe probe{slot, {}};
        std::vector<Term> keys;
        for (std::size_t j = 0; j < n; ++j) {
            probe.key_vars.push_back("k!" + slot + "!" + std::to_string(j));
            keys.push_back(T::var(probe.key_vars.back()));
        }
        probes[slot] = keys;
        f.probes.push_back(std::move(probe));
    }

    Encoded a = encode(s, shape, probes);
    Encoded b = encode(s2, shape, probes);
    std::vector<Term> diffs;
    for (std::size_t k = 0; k < a.obs.size(); ++k) diffs.push_back(T::lnot(T::eq(a.obs[k], b.obs[k])));
    Term rev_diff = T::lnot(T::eq(a.reverted, b.reverted));
    Term both_live = T::land(T::lnot(a.reverted), T::lnot(b.reverted));
    Term differ = T::lor(rev_diff, T::land(both_live, T::lor(diffs)));
    f.phi = T::land({a.covered, b.covered, differ});
    f.observables = observable_names(shape);
    f.bound_hit = s.bound_hit || s2.bound_hit;

    std::set<std::string> vars;
    collect(f.phi, vars, f.apps, f.app_terms);
    f.vars.assign(vars.begin(), vars.end());
    return f;
}

std::string Formula::smt_script() const {
    const std::string bv = "(_ BitVec 256)";
    std::string out = "(set-option :produce-models true)\n(set-logic QF_UFBV)\n";
    for (const auto& v : vars) out += "(declare-fun " + smt_symbol(v) + " () " + bv + ")\n";
    for (const auto& [name, arity] : apps) {
        out += "(declare-fun " + smt_symbol(name) + " (";
        for (std::size_t i = 0; i < arity; ++i) out += (i ? " " : "") + bv;
        out += ") " + bv + ")\n";
    }
    out += "(assert " + smt(phi) + ")\n(check-sat)\n";
    std::vector<std::string> queries;
    for (const auto& v : vars) queries.push_back(smt_symbol(v));
    for (const auto& t : app_terms) {
        queries.push_back(smt(t));
        for (const auto& a : t->args) queries.push_back(smt(a));
    }
    if (!queries.empty()) {
        out += "(get-value (";
        for (std::size_t i = 0; i < queries.size(); ++i) out += (i ? " " : "") + queries[i];
        out += "))\n";
    }
    out += "(get-model)\n(exit)\n";
    return out;
}

} // namespace dsol::equiv
