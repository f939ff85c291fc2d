#include <chrono>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dsol/equiv/equiv.hpp"
#include "exec.hpp"

namespace dsol::equiv {

const char* outcome_name(Outcome o) {
    switch (o) {
    case Outcome::Equivalent: return "Equivalent";
    case Outcome::NonEquivalent: return "NonEquivalent";
    case Outcome::Inconclusive: return "Inconclusive";
    }
    return "?";
}

const char* reason_name(Reason r) {
    switch (r) {
    case Reason::None: return "none";
    case Reason::BoundHit: return "bound_hit";
    case Reason::SolverTimeout: return "solver_timeout";
    case Reason::SolverUnknown: return "solver_unknown";
    }
    return "?";
}

namespace {

std::string display_name(const std::string& var, const std::vector<std::string>& params) {
    if (var.rfind("p!", 0) == 0) {
        auto i = std::stoul(var.substr(2));
        if (i < params.size()) return params[i];
    }
    if (var.rfind("e!", 0) == 0) return var.substr(2);
    return var;
}

std::string words(const std::vector<Word>& ws) {
    std::string out;
    for (std::size_t i = 0; i < ws.size(); ++i) out += (i ? ", " : "") + word_hex(ws[i]);
    return out;
}

} // namespace

std::string EquivalenceVerdict::str() const {
    std::string out = outcome_name(outcome);
    if (outcome == Outcome::Inconclusive) out += std::string(" (") + reason_name(reason) + ")";
    if (witness) {
        out += ": " + witness->observable + " differs (original " + witness->original + ", optimized " +
               witness->optimized + ")";
        std::string inputs;
        for (const auto& [v, w] : witness->vars) {
            if (v.rfind("k!", 0) == 0) continue;
            inputs += (inputs.empty() ? "" : ", ") + display_name(v, params) + "=" + word_hex(w);
        }
        if (!inputs.empty()) out += " with " + inputs;
    }
    return out;
}

std::string EquivalenceVerdict::to_json() const {
    nlohmann::ordered_json j;
    j["outcome"] = outcome_name(outcome);
    if (outcome == Outcome::Inconclusive) j["reason"] = reason_name(reason);
    j["solver_called"] = solver_called;
    j["seconds"] = seconds;
    if (witness) {
        nlohmann::ordered_json w, inputs = nlohmann::ordered_json::object(), env = nlohmann::ordered_json::object(),
                                  probes = nlohmann::ordered_json::object();
        for (const auto& [v, x] : witness->vars) {
            if (v.rfind("p!", 0) == 0)
                inputs[display_name(v, params)] = word_hex(x);
            else if (v.rfind("e!", 0) == 0)
                env[v.substr(2)] = word_hex(x);
            else
                probes[v] = word_hex(x);
        }
        w["inputs"] = inputs;
        w["environment"] = env;
        w["storage_keys"] = probes;
        nlohmann::ordered_json apps = nlohmann::ordered_json::array();
        for (const auto& [name, table] : witness->apps)
            for (const auto& [args, value] : table) {
                nlohmann::ordered_json a;
                a["function"] = name;
                nlohmann::ordered_json xs = nlohmann::ordered_json::array();
                for (const auto& x : args) xs.push_back(word_hex(x));
                a["args"] = xs;
                a["value"] = word_hex(value);
                apps.push_back(a);
            }
        w["uninterpreted"] = apps;
        w["observable"] = witness->observable;
        w["original"] = witness->original;
        w["optimized"] = witness->optimized;
        j["witness"] = w;
    }
    return j.dump(2);
}

Observation replay(const frontend::IRModule& module, const std::string& function, const Witness& witness,
                   const InputModel& inputs, const std::map<std::string, std::vector<std::vector<Word>>>& probes) {
    Bounds b;
    b.max_steps = 1000000;
    detail::Executor ex(module, b, inputs);
    ex.make_concrete(&witness.vars, &witness.apps);
    SymbolicSummary s = ex.run(function);

    Observation obs;
    if (s.paths.size() != 1 || s.bound_hit) {
        obs.complete = false;
        return obs;
    }
    const SymPath& p = s.paths[0];
    auto word = [&](const Term& t) {
        if (!is_const(t)) obs.complete = false;
        return is_const(t) ? t->value : Word(0);
    };
    obs.reverted = p.reverted;
    if (p.reverted) return obs;
    for (const auto& r : p.returns) obs.returns.push_back(word(r));
    for (const auto& c : p.calls) {
        std::vector<Word> args;
        for (const auto& a : c.args) args.push_back(word(a));
        obs.calls.emplace_back(c.name, std::move(args));
    }
    auto probe = [&](const std::string& slot, const std::vector<Word>& keys) {
        std::vector<Term> ks;
        for (const auto& k : keys) ks.push_back(T::bv(k));
        obs.storage[slot][keys] = word(s.storage_at(0, slot, ks));
    };
    for (const auto& [slot, ws] : p.writes)
        for (const auto& w : ws) {
            std::vector<Word> keys;
            for (const auto& k : w.keys) keys.push_back(word(k));
            probe(slot, keys);
        }
    for (const auto& [slot, list] : probes)
        for (const auto& keys : list) probe(slot, keys);
    return obs;
}

std::optional<Difference> compare(const Observation& a, const Observation& b) {
    if (!a.complete || !b.complete) return std::nullopt;
    auto flag = [](bool x) { return std::string(x ? "true" : "false"); };
    if (a.reverted != b.reverted) return Difference{"reverted", flag(a.reverted), flag(b.reverted)};
    if (a.reverted) return std::nullopt;
    std::size_t n = std::max(a.returns.size(), b.returns.size());
    if (a.returns.size() != b.returns.size())
        return Difference{"return count", std::to_string(a.returns.size()), std::to_string(b.returns.size())};
    for (std::size_t i = 0; i < n; ++i)
        if (a.returns[i] != b.returns[i])
            return Difference{"return[" + std::to_string(i) + "]", word_hex(a.returns[i]), word_hex(b.returns[i])};
    if (a.calls.size() != b.calls.size())
        return Difference{"call count", std::to_string(a.calls.size()), std::to_string(b.calls.size())};
    for (std::size_t i = 0; i < a.calls.size(); ++i)
        if (a.calls[i] != b.calls[i])
            return Difference{"call[" + std::to_string(i) + "]", a.calls[i].first + "(" + words(a.calls[i].second) + ")",
                              b.calls[i].first + "(" + words(b.calls[i].second) + ")"};
    for (const auto& [slot, entries] : a.storage) {
        auto other = b.storage.find(slot);
        for (const auto& [keys, v] : entries) {
            if (other == b.storage.end()) continue;
            auto it = other->second.find(keys);
            if (it != other->second.end() && it->second != v)
                return Difference{"storage " + slot + (keys.empty() ? "" : "[" + words(keys) + "]"), word_hex(v),
                                  word_hex(it->second)};
        }
    }
    return std::nullopt;
}

std::optional<Difference> replay_pair(const frontend::IRModule& original, const std::string& f,
                                      const frontend::IRModule& optimized, const std::string& g,
                                      const Witness& witness, const InputModel& inputs_original,
                                      const InputModel& inputs_optimized) {
    Observation a = replay(original, f, witness, inputs_original);
    Observation b = replay(optimized, g, witness, inputs_optimized);
    std::map<std::string, std::vector<std::vector<Word>>> probes;
    auto add = [&](const Observation& o) {
        for (const auto& [slot, entries] : o.storage)
            for (const auto& [keys, v] : entries) probes[slot].push_back(keys);
    };
    add(a);
    add(b);
    // solver-chosen storage keys
    std::map<std::string, std::map<std::size_t, Word>> chosen;
    for (const auto& [name, value] : witness.vars) {
        if (name.rfind("k!", 0) != 0) continue;
        auto bang = name.rfind('!');
        chosen[name.substr(2, bang - 2)][std::stoul(name.substr(bang + 1))] = value;
    }
    for (const auto& [slot, keys] : chosen) {
        std::vector<Word> ks;
        for (const auto& [i, k] : keys) ks.push_back(k);
        probes[slot].push_back(ks);
    }
    a = replay(original, f, witness, inputs_original, probes);
    b = replay(optimized, g, witness, inputs_optimized, probes);
    return compare(a, b);
}

EquivalenceVerdict decide(const Formula& phi, const SolverConfig& config, const Confirm& confirm) {
    EquivalenceVerdict v;
    if (phi.trivially_unsat()) {
        v.outcome = phi.bound_hit ? Outcome::Inconclusive : Outcome::Equivalent;
        v.reason = phi.bound_hit ? Reason::BoundHit : Reason::None;
        return v;
    }
    v.solver_called = true;
    SolverResult r = solve(phi, config);
    switch (r.status) {
    case SolverStatus::Unsat:
        v.outcome = phi.bound_hit ? Outcome::Inconclusive : Outcome::Equivalent;
        v.reason = phi.bound_hit ? Reason::BoundHit : Reason::None;
        break;
    case SolverStatus::Sat: {
        Witness w;
        w.vars = std::move(r.vars);
        w.apps = std::move(r.apps);
        if (auto d = confirm(w)) {
            w.observable = d->observable;
            w.original = d->original;
            w.optimized = d->optimized;
            v.outcome = Outcome::NonEquivalent;
            v.witness = std::move(w);
        } else {
            v.outcome = Outcome::Inconclusive;
            v.reason = Reason::SolverUnknown;
        }
        break;
    }
    case SolverStatus::Unknown:
        v.outcome = Outcome::Inconclusive;
        v.reason = Reason::SolverUnknown;
        break;
    case SolverStatus::Timeout:
        v.outcome = Outcome::Inconclusive;
        v.reason = Reason::SolverTimeout;
        break;
    }
    return v;
}

EquivalenceVerdict check_equivalence(const frontend::IRModule& original, const std::string& f,
                                     const frontend::IRModule& optimized, const std::string& g,
                                     const edits::EditSet& edits, const Bounds& bounds, const SolverConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    const auto* m = original.find(f);
    const auto* m2 = optimized.find(g);
    if (!m) throw std::invalid_argument("no function named " + f + " in the original unit");
    if (!m2) throw std::invalid_argument("no function named " + g + " in the optimized unit");
    AlignmentMap map = align(original, *m, optimized, *m2, edits);

    // inputs are typed by the more informative declaration, preferring the optimized one
    InputModel in_orig;
    InputModel in_opt = map.optimized_inputs();
    for (std::size_t i = 0; i < std::min(m->params.size(), m2->params.size()); ++i) {
        std::optional<types::SolType> t;
        if (i < m2->param_types.size() && m2->param_types[i] && m2->param_types[i]->is_concrete())
            t = m2->param_types[i];
        else if (i < m->param_types.size() && m->param_types[i])
            t = m->param_types[i];
        if (t) in_orig.param_types[i] = in_opt.param_types[i] = *t;
    }
    for (const auto& [o, p] : map.storage) {
        const auto& to = original.storage.at(o);
        const auto& tp = optimized.storage.at(p);
        in_orig.storage_types[o] = in_opt.storage_types[o] = tp.is_concrete() ? tp : to;
    }

    SymbolicSummary s = symbolic_summary(original, f, bounds, in_orig);
    SymbolicSummary s2 = symbolic_summary(optimized, g, bounds, in_opt);
    Formula phi = equivalence_assertion(s, s2);
    EquivalenceVerdict v = decide(phi, config, [&](const Witness& w) {
        return replay_pair(original, f, optimized, g, w, in_orig, in_opt);
    });
    v.params = m->params;
    v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

} // namespace dsol::equiv
