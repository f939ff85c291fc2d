#include "dsol/prompt/prompt.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dsol/frontend/parser.hpp"
#include "dsol/frontend/render.hpp"

namespace dsol::prompt {

using dg::DepLabel;
using dg::DependencyGraph;
using dg::DGEdge;
using dg::DGNode;
using dg::NodeKind;
using frontend::StmtKind;
using json = nlohmann::json;

const char* target_kind_name(TargetKind kind) {
    switch (kind) {
    case TargetKind::VariableType: return "type";
    case TargetKind::ContractAttribute: return "attribute";
    case TargetKind::FunctionBoundary: return "boundary";
    }
    return "?";
}

std::string OptimizationTarget::id() const {
    switch (kind) {
    case TargetKind::VariableType: return function.empty() ? "type:" + name : "type:" + function + "." + name;
    case TargetKind::ContractAttribute: return "attr:" + name;
    case TargetKind::FunctionBoundary: return "boundary:" + function;
    }
    return {};
}

OptimizationTarget OptimizationTarget::parse(const std::string& id) {
    auto colon = id.find(':');
    if (colon == std::string::npos || colon + 1 >= id.size()) throw InvalidTarget("bad target id '" + id + "'");
    std::string kind = id.substr(0, colon);
    std::string rest = id.substr(colon + 1);
    if (kind == "type") {
        auto dot = rest.find('.');
        if (dot == std::string::npos) return storage(rest);
        return variable(rest.substr(0, dot), rest.substr(dot + 1));
    }
    if (kind == "attr") return attribute(rest);
    if (kind == "boundary") return boundary(rest);
    throw InvalidTarget("bad target id '" + id + "'");
}

OptimizationTarget OptimizationTarget::variable(std::string function, std::string name) {
    return {TargetKind::VariableType, std::move(function), std::move(name)};
}
OptimizationTarget OptimizationTarget::storage(std::string slot) { return {TargetKind::VariableType, {}, std::move(slot)}; }
OptimizationTarget OptimizationTarget::attribute(std::string slot) {
    return {TargetKind::ContractAttribute, {}, std::move(slot)};
}
OptimizationTarget OptimizationTarget::boundary(std::string function) {
    return {TargetKind::FunctionBoundary, std::move(function), {}};
}

// ---------------------------------------------------------------- templates

TemplateSet TemplateSet::parse(const std::string& text) {
    TemplateSet t;
    try {
        json j = json::parse(text);
        t.version_ = j.at("version").get<int>();
        for (const auto& [k, v] : j.at("instructions").items()) t.instructions_[k] = v.get<std::string>();
        for (const auto& [k, v] : j.at("output_format").items()) t.formats_[k] = v.get<std::string>();
        t.feedback_ = j.value("feedback", std::string("Feedback:"));
        std::set<std::string> seen;
        for (const auto& r : j.at("rows")) {
            CotTemplate c;
            c.category = r.at("category").get<std::string>();
            c.row = r.at("row").get<std::string>();
            c.pattern = r.at("pattern").get<std::string>();
            if (r.contains("choices"))
                for (const auto& [k, v] : r.at("choices").items()) c.choices[k] = v.get<std::vector<std::string>>();
            if (!seen.insert(c.row).second) throw dg::DataError("templates: duplicate row " + c.row);
            t.rows_.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw dg::DataError(std::string("templates: ") + e.what());
    }
    for (const char* k : {"type", "attribute", "boundary"}) {
        if (!t.instructions_.count(k)) throw dg::DataError(std::string("templates: missing instruction ") + k);
        if (!t.formats_.count(k)) throw dg::DataError(std::string("templates: missing output format ") + k);
    }
    return t;
}

TemplateSet TemplateSet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dg::DataError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const TemplateSet& TemplateSet::defaults() {
    static const TemplateSet set = load(dg::data_dir() + "/templates.json");
    return set;
}

const CotTemplate& TemplateSet::row(const std::string& name) const {
    for (const auto& r : rows_)
        if (r.row == name) return r;
    throw MissingTemplate("no template row " + name);
}

const std::string& TemplateSet::instruction(TargetKind kind) const { return instructions_.at(target_kind_name(kind)); }
const std::string& TemplateSet::output_format(TargetKind kind) const { return formats_.at(target_kind_name(kind)); }

std::string fill(const CotTemplate& tpl, const std::map<std::string, std::vector<std::string>>& values,
                 const std::string& choice) {
    std::string out = tpl.pattern;
    for (const auto& [group, options] : tpl.choices) {
        auto at = out.find(group);
        if (at == std::string::npos || options.empty()) continue;
        auto it = std::find(options.begin(), options.end(), choice);
        out.replace(at, group.size(), it == options.end() ? options.front() : *it);
    }
    std::map<std::string, std::size_t> used;
    std::string result;
    std::size_t i = 0;
    while (i < out.size()) {
        if (out[i] == '[') {
            auto close = out.find(']', i);
            if (close != std::string::npos) {
                std::string name = out.substr(i + 1, close - i - 1);
                auto v = values.find(name);
                if (v != values.end() && !v->second.empty()) {
                    std::size_t& n = used[name];
                    result += v->second[std::min(n, v->second.size() - 1)];
                    ++n;
                    i = close + 1;
                    continue;
                }
            }
        }
        result += out[i++];
    }
    return result;
}

// ---------------------------------------------------------------- candidates

std::vector<std::string> candidates_for(TargetKind kind) {
    switch (kind) {
    case TargetKind::VariableType: {
        std::vector<std::string> out{"bool"};
        for (int w = 8; w <= 256; w += 8) out.push_back("uint" + std::to_string(w));
        for (int w = 8; w <= 256; w += 8) out.push_back("int" + std::to_string(w));
        out.push_back("address");
        out.push_back("address payable");
        for (int n = 1; n <= 32; ++n) out.push_back("bytes" + std::to_string(n));
        for (const char* s : {"bytes", "string", "mapping(K=>V)", "T[]", "T[k]", "tuple"}) out.emplace_back(s);
        return out;
    }
    case TargetKind::ContractAttribute: return {"Limit", "Fee", "Flag", "Address", "Asset", "Router", "Others"};
    case TargetKind::FunctionBoundary: break;
    }
    throw UnsupportedKind("boundary targets carry no candidates");
}

// ---------------------------------------------------------------- slices

int target_node(const frontend::IRModule& module, const DependencyGraph& dg, const OptimizationTarget& target) {
    std::string key;
    switch (target.kind) {
    case TargetKind::VariableType:
        key = target.function.empty() ? dg::storage_key(target.name) : dg::var_key(target.function, target.name);
        break;
    case TargetKind::ContractAttribute:
        if (!module.is_storage(target.name)) throw InvalidTarget(target.id() + ": attribute targets need a state variable");
        key = dg::storage_key(target.name);
        break;
    case TargetKind::FunctionBoundary: throw InvalidTarget(target.id() + ": boundary targets have no variable node");
    }
    auto n = dg.find(key);
    if (!n) throw InvalidTarget(target.id() + ": no such variable");
    return *n;
}

dg::SliceGraph target_slice(const frontend::IRModule& module, const DependencyGraph& dg, const OptimizationTarget& target) {
    int node = target_node(module, dg, target);
    if (target.kind == TargetKind::ContractAttribute) return dg::slice_variable(dg, node, {DepLabel::SD});
    return dg::slice_variable(dg, node, {DepLabel::TD});
}

namespace {

std::string header_line(const frontend::FunctionDecl& fn) {
    std::string text = frontend::render_function(fn);
    return text.substr(0, text.find('\n'));
}

} // namespace

std::string render_context(const frontend::SourceUnit& unit, const frontend::IRModule& module,
                           const DependencyGraph& dg, const dg::SliceGraph& slice) {
    std::set<std::string> slots;
    std::map<std::string, std::set<int>> stmts;
    for (int id : slice.nodes) {
        const auto& n = dg.node(id);
        if (n.storage) slots.insert(n.label);
        if (n.kind == NodeKind::Expression && n.stmt >= 0) stmts[n.function].insert(n.stmt);
    }
    for (int eid : slice.edges) {
        const auto& info = dg.edge(eid).info;
        if (info.stmt >= 0 && !info.function.empty()) stmts[info.function].insert(info.stmt);
    }
    if (stmts.empty()) throw EmptySlice("slice has no statement");
    std::string out;
    for (const auto& decl : unit.storage)
        if (slots.count(decl.name)) out += frontend::render_storage(decl) + "\n";
    for (const auto& fn : module.functions) {
        auto it = stmts.find(fn.name);
        if (it == stmts.end()) continue;
        const auto* decl = unit.find_function(fn.name);
        if (!out.empty()) out += "\n";
        out += (decl ? header_line(*decl) : "function " + fn.name + "() {") + "\n";
        for (int s : it->second) {
            const auto& info = fn.stmts[static_cast<std::size_t>(s)];
            out += std::string(static_cast<std::size_t>(4 * (info.depth + 1)), ' ') + info.text + "\n";
        }
        out += "}\n";
    }
    return out;
}

std::string render_function_context(const frontend::SourceUnit& unit, const std::vector<std::string>& functions) {
    auto canon = frontend::canonicalize(unit);
    std::vector<std::string> lines;
    {
        std::istringstream in(frontend::render_unit(canon));
        for (std::string l; std::getline(in, l);) lines.push_back(l);
    }
    std::string out;
    for (const auto& fn : canon.functions) {
        if (std::find(functions.begin(), functions.end(), fn.name) == functions.end()) continue;
        if (!out.empty()) out += "\n";
        for (int l = fn.span.start_line; l <= fn.span.end_line && l <= static_cast<int>(lines.size()); ++l) {
            char num[16];
            std::snprintf(num, sizeof num, "%4d | ", l);
            out += num + lines[static_cast<std::size_t>(l - 1)] + "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------- chain of thought

namespace {

std::string clause(std::string text) {
    if (!text.empty() && text.back() == ';') text.pop_back();
    return text;
}

std::string node_name(const DGNode& n) { return n.is_return ? n.label + "()" : n.label; }
std::string node_type(const DGNode& n) { return n.type ? n.type->str() : "unknown"; }

Sentence sentence(const TemplateSet& t, const std::string& row, std::map<std::string, std::vector<std::string>> values,
                  const std::string& choice = {}) {
    Sentence s;
    s.row = row;
    s.text = fill(t.row(row), values, choice);
    return s;
}

Sentence edge_sentence(const DependencyGraph& dg, const DGEdge& e, const TemplateSet& t) {
    const auto& src = dg.node(e.src);
    const auto& dst = dg.node(e.dst);
    const bool sv = src.kind == NodeKind::Variable;
    const bool dv = dst.kind == NodeKind::Variable;
    const std::string type = e.info.type ? e.info.type->str() : "unknown";
    switch (e.label) {
    case DepLabel::TD:
        if (e.info.role == "builtin")
            return sentence(t, "Type->Expression", {{"NAME", {e.info.name}}, {"STATEMENT", {clause(e.info.statement)}}, {"TYPE", {type}}});
        if (e.info.role == "type" && dv) return sentence(t, "Type->Variable", {{"NAME", {node_name(dst)}}, {"TYPE", {type}}});
        if (sv && dv) return sentence(t, "Variable->Variable", {{"NAME", {node_name(dst), node_name(src)}}});
        if (!sv && dv)
            return sentence(t, "Expression->Variable", {{"NAME", {node_name(dst)}}, {"STATEMENT", {clause(src.statement)}}});
        if (sv && !dv)
            return sentence(t, "Variable->Expression", {{"STATEMENT", {clause(dst.statement)}}, {"TYPE", {node_type(src)}}},
                            e.info.role);
        break;
    case DepLabel::SD:
        if (src.storage && dst.storage)
            return sentence(t, "State->State", {{"NAME", {node_name(dst), node_name(src)}}});
        if (src.storage && !dv)
            return sentence(t, "State->Expression", {{"NAME", {node_name(src)}}, {"STATEMENT", {clause(dst.statement)}}});
        if (dst.storage && !sv)
            return sentence(t, "Expression->State", {{"NAME", {node_name(dst)}}, {"STATEMENT", {clause(src.statement)}}});
        break;
    case DepLabel::DFD:
        if (!sv && !dv) {
            if (src.label.find(" = call ") != std::string::npos || src.label.rfind("call ", 0) == 0)
                return sentence(t, "Call Site", {{"STATEMENT", {clause(src.statement)}}});
            if (dst.label.rfind("ret", 0) == 0) return sentence(t, "Return Value", {{"STATEMENT", {clause(dst.statement)}}});
        }
        break;
    }
    throw MissingTemplate(std::string("no template for ") + dg::dep_label_name(e.label) + " edge " + src.key + " -> " +
                          dst.key + (e.info.role.empty() ? "" : " (" + e.info.role + ")"));
}

} // namespace

std::vector<Sentence> render_cot(const DependencyGraph& dg, const dg::SliceGraph& slice, const TemplateSet& templates) {
    std::vector<Sentence> out;
    for (int eid : slice.edges) {
        const auto& e = dg.edge(eid);
        Sentence s = edge_sentence(dg, e, templates);
        s.hop = std::min(slice.hop.at(e.src), slice.hop.at(e.dst));
        s.pos = e.info.pos;
        s.edge = eid;
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(),
              [](const Sentence& a, const Sentence& b) { return std::tie(a.hop, a.pos, a.edge) < std::tie(b.hop, b.pos, b.edge); });
    return out;
}

namespace {

std::vector<std::string> require_prefix(const frontend::IRFunction& fn) {
    std::vector<std::string> out;
    for (const auto& s : fn.stmts) {
        if (s.depth != 0) continue;
        if (s.kind != StmtKind::Require) break;
        out.push_back(s.text);
    }
    return out;
}

std::map<std::string, int> chain_distance(const flow::CallGraph& cg, const std::string& from,
                                          const std::vector<std::string>& chain) {
    std::map<std::string, int> dist{{from, 0}};
    std::vector<std::string> frontier{from};
    while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const auto& f : frontier) {
            auto around = cg.callees(f);
            auto up = cg.callers(f);
            around.insert(around.end(), up.begin(), up.end());
            for (const auto& g : around) {
                if (dist.count(g) || std::find(chain.begin(), chain.end(), g) == chain.end()) continue;
                dist[g] = dist[f] + 1;
                next.push_back(g);
            }
        }
        frontier = std::move(next);
    }
    return dist;
}

} // namespace

std::vector<Sentence> boundary_cot(const frontend::IRModule& module, const flow::CallGraph& cg, const std::string& function,
                                   const std::vector<std::string>& chain, const TemplateSet& templates) {
    if (!module.find(function)) throw InvalidTarget("unknown function " + function);
    auto dist = chain_distance(cg, function, chain);
    std::vector<Sentence> out;
    for (const auto& fn : module.functions) {
        if (std::find(chain.begin(), chain.end(), fn.name) == chain.end()) continue;
        int hop = dist.count(fn.name) ? dist[fn.name] : static_cast<int>(chain.size());
        auto add = [&](Sentence s, frontend::SourcePos pos) {
            s.hop = hop;
            s.pos = pos;
            out.push_back(std::move(s));
        };

        auto prefix = require_prefix(fn);
        std::size_t shared = 0;
        for (const auto& other : module.functions) {
            if (other.name == fn.name) continue;
            auto op = require_prefix(other);
            std::size_t k = 0;
            while (k < prefix.size() && k < op.size() && prefix[k] == op[k]) ++k;
            shared = std::max(shared, k);
        }
        if (shared > 0) {
            std::size_t first = 0;
            while (fn.stmts[first].depth != 0) ++first;
            add(sentence(templates, "Modifier", {{"STATEMENT", {clause(prefix.front()), clause(prefix[shared - 1])}}}), fn.stmts[first].pos);
        }

        std::set<int> call_stmts;
        for (const auto& in : fn.instrs)
            if (in.op == frontend::Opcode::Call && !in.method && module.find(in.opname) && in.stmt >= 0)
                call_stmts.insert(in.stmt);
        for (std::size_t i = 0; i < fn.stmts.size(); ++i) {
            const auto& s = fn.stmts[i];
            if (call_stmts.count(static_cast<int>(i))) add(sentence(templates, "Call Site", {{"STATEMENT", {clause(s.text)}}}), s.pos);
            if (s.kind == StmtKind::VarDecl)
                add(sentence(templates, "Variable Declaration", {{"STATEMENT", {clause(s.text)}}}), s.pos);
            if (s.kind == StmtKind::Return) add(sentence(templates, "Return Value", {{"STATEMENT", {clause(s.text)}}}), s.pos);
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Sentence& a, const Sentence& b) { return std::tie(a.hop, a.pos) < std::tie(b.hop, b.pos); });
    return out;
}

// ---------------------------------------------------------------- bundle

std::size_t estimate_tokens(const std::string& text) { return (text.size() + 3) / 4; }

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string PromptBundle::text() const {
    std::string out = "## Instruction\n" + instruction + "\n\n## Target\n" + target.id() + "\n\n## Code Context\n```solidity\n" +
                      context + "```\n";
    if (!candidates.empty()) {
        out += "\n## Inference Candidates\n";
        for (std::size_t i = 0; i < candidates.size(); ++i) out += (i ? ", " : "") + candidates[i];
        out += "\n";
    }
    if (!cot.empty()) {
        out += "\n## Chain-of-Thought\n";
        for (std::size_t i = 0; i < cot.size(); ++i) out += std::to_string(i + 1) + ". " + cot[i].text + "\n";
    }
    if (!feedback.empty()) out += "\n## Feedback\n" + feedback + (feedback.back() == '\n' ? "" : "\n");
    out += "\n## Output Format\n" + output_format + "\n";
    return out;
}

std::string PromptBundle::to_json() const {
    nlohmann::ordered_json j;
    j["target"] = target.id();
    j["kind"] = target_kind_name(target.kind);
    j["instruction"] = instruction;
    j["context"] = context;
    j["candidates"] = candidates;
    j["cot"] = nlohmann::ordered_json::array();
    for (const auto& s : cot) j["cot"].push_back({{"row", s.row}, {"hop", s.hop}, {"text", s.text}});
    if (!feedback.empty()) j["feedback"] = feedback;
    j["output_format"] = output_format;
    j["dropped_sentences"] = dropped;
    j["tokens"] = token_estimate();
    j["hash"] = hash_hex(hash());
    return j.dump(2);
}

std::uint64_t PromptBundle::hash() const { return fnv1a(text()); }
std::size_t PromptBundle::token_estimate() const { return estimate_tokens(text()); }

PromptBundle assemble_prompt(const OptimizationTarget& target, std::string context, std::vector<std::string> candidates,
                             std::vector<Sentence> cot, const PromptOptions& options, const TemplateSet& templates) {
    PromptBundle b;
    b.target = target;
    b.instruction = templates.instruction(target.kind);
    b.context = std::move(context);
    b.candidates = std::move(candidates);
    b.cot = std::move(cot);
    if (!options.feedback.empty()) b.feedback = templates.feedback_header() + "\n" + options.feedback;
    b.output_format = templates.output_format(target.kind);
    while (!b.cot.empty() && b.token_estimate() > options.token_budget) {
        b.cot.pop_back();
        ++b.dropped;
    }
    return b;
}

PromptBundle build_prompt(const frontend::SourceUnit& unit, const frontend::IRModule& module, const dg::Analysis& analysis,
                          const OptimizationTarget& target, const PromptOptions& options, const TemplateSet& templates) {
    if (target.kind == TargetKind::FunctionBoundary) {
        if (!module.find(target.function)) throw InvalidTarget(target.id() + ": no such function");
        auto chain = dg::slice_function(analysis.calls, target.function);
        return assemble_prompt(target, render_function_context(unit, chain), {},
                               boundary_cot(module, analysis.calls, target.function, chain, templates), options, templates);
    }
    auto slice = target_slice(module, analysis.dg, target);
    auto context = render_context(unit, module, analysis.dg, slice);
    return assemble_prompt(target, std::move(context), candidates_for(target.kind), render_cot(analysis.dg, slice, templates),
                           options, templates);
}

} // namespace dsol::prompt
