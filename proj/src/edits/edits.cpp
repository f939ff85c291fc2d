#include "dsol/edits/edits.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dsol/frontend/parser.hpp"
#include "dsol/frontend/render.hpp"
#include "dsol/types/attributes.hpp"

namespace dsol::edits {

using frontend::Expr;
using frontend::ExprKind;
using frontend::FunctionDecl;
using frontend::SourceUnit;
using frontend::Stmt;
using frontend::StmtKind;
using json = nlohmann::json;

const char* edit_kind_name(EditKind kind) {
    switch (kind) {
    case EditKind::Retype: return "retype";
    case EditKind::Attribute: return "attribute";
    case EditKind::Split: return "split";
    case EditKind::Rename: return "rename";
    }
    return "?";
}

Edit Edit::retype(std::string name, std::string type, std::string function) {
    Edit e;
    e.kind = EditKind::Retype;
    e.name = std::move(name);
    e.type = std::move(type);
    e.function = std::move(function);
    return e;
}

Edit Edit::attribute(std::string name, std::string label) {
    Edit e;
    e.kind = EditKind::Attribute;
    e.name = std::move(name);
    e.label = std::move(label);
    return e;
}

Edit Edit::split(std::string host, std::string new_name, int start_line, int end_line) {
    Edit e;
    e.kind = EditKind::Split;
    e.host = std::move(host);
    e.new_name = std::move(new_name);
    e.start_line = start_line;
    e.end_line = end_line;
    return e;
}

Edit Edit::rename(std::string old_name, std::string new_name, std::string function) {
    Edit e;
    e.kind = EditKind::Rename;
    e.old_name = std::move(old_name);
    e.new_name = std::move(new_name);
    e.function = std::move(function);
    return e;
}

std::string Edit::str() const {
    std::string scope = function.empty() ? "" : function + ".";
    switch (kind) {
    case EditKind::Retype: return "retype " + scope + name + " : " + type;
    case EditKind::Attribute: return "attribute " + name + " = " + label;
    case EditKind::Split:
        return "split " + host + " lines " + std::to_string(start_line) + "-" + std::to_string(end_line) + " -> " + new_name;
    case EditKind::Rename: return "rename " + scope + old_name + " -> " + new_name;
    }
    return {};
}

bool EditSet::touches_code() const {
    return std::any_of(edits.begin(), edits.end(), [](const Edit& e) { return e.kind != EditKind::Attribute; });
}

namespace {

bool mentions(const std::vector<Stmt>& body, const std::string& name) {
    bool found = false;
    frontend::for_each_stmt(body, [&](const Stmt& s) {
        if (s.kind == StmtKind::VarDecl && s.name == name) found = true;
        for (const auto& e : s.exprs)
            frontend::for_each_expr(e, [&](const Expr& x) {
                if (x.kind == ExprKind::Var && x.text == name) found = true;
            });
    });
    return found;
}

} // namespace

std::vector<std::string> EditSet::touched_functions(const SourceUnit& unit) const {
    std::set<std::string> out;
    for (const auto& e : edits) {
        switch (e.kind) {
        case EditKind::Attribute: break;
        case EditKind::Split:
            out.insert(e.host);
            out.insert(e.new_name);
            break;
        case EditKind::Retype:
        case EditKind::Rename: {
            std::string fn = e.function.empty() ? scope : e.function;
            const std::string& var = e.kind == EditKind::Retype ? e.name : e.old_name;
            if (!fn.empty() && unit.find_function(fn)) {
                out.insert(fn);
            } else {
                for (const auto& f : unit.functions)
                    if (mentions(f.body, var)) out.insert(f.name);
            }
            break;
        }
        }
    }
    return {out.begin(), out.end()};
}

// ---------------------------------------------------------------- JSON

std::vector<Edit> edits_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidEdit(std::string("edit list is not JSON: ") + e.what());
    }
    if (j.is_object()) j = json::array({j});
    if (!j.is_array()) throw InvalidEdit("edit list must be a JSON array");
    std::vector<Edit> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& o = j[i];
        const std::string where = "edit[" + std::to_string(i) + "]";
        auto str = [&](const char* key) {
            if (!o.is_object() || !o.contains(key) || !o.at(key).is_string())
                throw InvalidEdit(where + "." + key + ": expected a string");
            return o.at(key).get<std::string>();
        };
        auto num = [&](const char* key) {
            if (!o.contains(key) || !o.at(key).is_number_integer()) throw InvalidEdit(where + "." + key + ": expected an integer");
            return o.at(key).get<int>();
        };
        std::string op = str("op");
        std::string fn = o.contains("function") && o.at("function").is_string() ? o.at("function").get<std::string>() : "";
        if (op == "retype") out.push_back(Edit::retype(str("name"), str("type"), fn));
        else if (op == "attribute") out.push_back(Edit::attribute(str("name"), str("label")));
        else if (op == "split") out.push_back(Edit::split(str("host"), str("new_name"), num("start_line"), num("end_line")));
        else if (op == "rename") out.push_back(Edit::rename(str("old"), str("new"), fn));
        else throw InvalidEdit(where + ".op: unknown operation '" + op + "'");
    }
    return out;
}

std::string edits_to_json(const std::vector<Edit>& edits) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& e : edits) {
        nlohmann::ordered_json o;
        o["op"] = edit_kind_name(e.kind);
        switch (e.kind) {
        case EditKind::Retype:
            o["name"] = e.name;
            o["type"] = e.type;
            break;
        case EditKind::Attribute:
            o["name"] = e.name;
            o["label"] = e.label;
            break;
        case EditKind::Split:
            o["host"] = e.host;
            o["new_name"] = e.new_name;
            o["start_line"] = e.start_line;
            o["end_line"] = e.end_line;
            break;
        case EditKind::Rename:
            o["old"] = e.old_name;
            o["new"] = e.new_name;
            break;
        }
        if (!e.function.empty()) o["function"] = e.function;
        j.push_back(o);
    }
    return j.dump();
}

// ---------------------------------------------------------------- apply

std::vector<StmtLines> statement_lines(const FunctionDecl& fn) {
    std::vector<StmtLines> out;
    for (const auto& s : fn.body) {
        FunctionDecl one;
        one.name = "f";
        one.body = {s};
        auto text = frontend::render_function(one);
        int lines = static_cast<int>(std::count(text.begin(), text.end(), '\n')) - 2;
        out.push_back({s.pos.line, s.pos.line + lines - 1});
    }
    return out;
}

namespace {

bool is_env(const std::string& n) {
    return n == "msg" || n == "block" || n == "tx" || n == "abi" || n == "now" || n == "this";
}

bool is_param(const FunctionDecl& fn, const std::string& name) {
    return std::any_of(fn.params.begin(), fn.params.end(), [&](const auto& p) { return p.name == name; });
}

bool is_local(const FunctionDecl& fn, const std::string& name) {
    bool found = false;
    frontend::for_each_stmt(fn.body, [&](const Stmt& s) {
        if (s.kind == StmtKind::VarDecl && s.name == name) found = true;
        if (s.kind == StmtKind::Assign && s.lhs().kind == ExprKind::Var && s.lhs().text == name) found = true;
    });
    return found;
}

FunctionDecl& scope_function(SourceUnit& u, const Edit& e, const std::string& scope) {
    std::string name = e.function.empty() ? scope : e.function;
    auto* fn = u.find_function(name);
    if (!fn) throw EditConflict(e.str() + ": unknown function '" + name + "'");
    return *fn;
}

types::SolType checked_type(const Edit& e) {
    if (!types::is_known_type_spelling(e.type)) throw EditConflict(e.str() + ": unknown type '" + e.type + "'");
    return types::parse_type(e.type);
}

bool declare_first_assignment(std::vector<Stmt>& body, const std::string& name, const types::SolType& t) {
    for (auto& s : body) {
        if (s.kind == StmtKind::Assign && s.op == "=" && s.lhs().kind == ExprKind::Var && s.lhs().text == name) {
            Expr init = s.rhs();
            s.kind = StmtKind::VarDecl;
            s.decl_type = t;
            s.name = name;
            s.has_init = true;
            s.op.clear();
            s.exprs = {std::move(init)};
            return true;
        }
        if (declare_first_assignment(s.body, name, t) || declare_first_assignment(s.else_body, name, t)) return true;
    }
    return false;
}

void apply_retype(SourceUnit& u, const Edit& e, const std::string& scope) {
    auto t = checked_type(e);
    std::string fname = e.function.empty() ? scope : e.function;
    if (auto* fn = fname.empty() ? nullptr : u.find_function(fname); fn && (is_param(*fn, e.name) || is_local(*fn, e.name))) {
        for (auto& p : fn->params)
            if (p.name == e.name) {
                p.type = t;
                return;
            }
        bool declared = false;
        frontend::for_each_stmt(fn->body, [&](Stmt& s) {
            if (s.kind == StmtKind::VarDecl && s.name == e.name) {
                s.decl_type = t;
                declared = true;
            }
        });
        if (declared || declare_first_assignment(fn->body, e.name, t)) return;
        throw EditConflict(e.str() + ": no assignment to declare");
    }
    if (auto* decl = u.find_storage(e.name)) {
        decl->type = t;
        return;
    }
    if (frontend::is_synthetic_storage_name(e.name) && frontend::is_storage_name(u, e.name)) {
        frontend::StorageDecl d;
        d.type = t;
        d.name = e.name;
        u.storage.push_back(d);
        return;
    }
    throw EditConflict(e.str() + ": unknown variable '" + e.name + "'");
}

void apply_attribute(SourceUnit& u, const Edit& e) {
    if (!types::is_attribute_label(e.label)) throw EditConflict(e.str() + ": '" + e.label + "' is not an attribute label");
    auto* decl = u.find_storage(e.name);
    if (!decl) throw EditConflict(e.str() + ": no declared state variable '" + e.name + "'");
    decl->attribute = e.label;
}

void rename_in(std::vector<Stmt>& body, const std::string& from, const std::string& to) {
    frontend::for_each_stmt(body, [&](Stmt& s) {
        if (s.kind == StmtKind::VarDecl && s.name == from) s.name = to;
        for (auto& x : s.exprs)
            frontend::for_each_expr(x, [&](Expr& v) {
                if (v.kind == ExprKind::Var && v.text == from) v.text = to;
            });
    });
}

void apply_rename(SourceUnit& u, const Edit& e, const std::string& scope) {
    static const std::regex ident("[A-Za-z_$][A-Za-z0-9_$]*");
    if (!std::regex_match(e.new_name, ident)) throw EditConflict(e.str() + ": bad identifier");
    if (u.find_function(e.new_name) || u.find_storage(e.new_name) || is_env(e.new_name))
        throw EditConflict(e.str() + ": '" + e.new_name + "' already names something");
    std::string fname = e.function.empty() ? scope : e.function;
    if (auto* fn = fname.empty() ? nullptr : u.find_function(fname);
        fn && (is_param(*fn, e.old_name) || is_local(*fn, e.old_name))) {
        if (is_param(*fn, e.new_name) || mentions(fn->body, e.new_name))
            throw EditConflict(e.str() + ": '" + e.new_name + "' already used in " + fn->name);
        for (auto& p : fn->params)
            if (p.name == e.old_name) p.name = e.new_name;
        rename_in(fn->body, e.old_name, e.new_name);
        return;
    }
    if (auto* decl = u.find_storage(e.old_name)) {
        for (const auto& f : u.functions)
            if (is_param(f, e.new_name) || mentions(f.body, e.new_name))
                throw EditConflict(e.str() + ": '" + e.new_name + "' already used in " + f.name);
        decl->name = e.new_name;
        for (auto& f : u.functions) rename_in(f.body, e.old_name, e.new_name);
        return;
    }
    throw EditConflict(e.str() + ": unknown variable '" + e.old_name + "'");
}

// Variables read in `stmts`, in first-use order, skipping callees, members and env roots.
void collect_reads(const Expr& e, std::vector<std::string>& out) {
    switch (e.kind) {
    case ExprKind::Var:
        if (!is_env(e.text) && std::find(out.begin(), out.end(), e.text) == out.end()) out.push_back(e.text);
        return;
    case ExprKind::Call:
        if (e.args[0].kind != ExprKind::Var) collect_reads(e.args[0], out);
        for (std::size_t i = 1; i < e.args.size(); ++i) collect_reads(e.args[i], out);
        return;
    default:
        for (const auto& a : e.args) collect_reads(a, out);
    }
}

std::set<std::string> defined_in(const std::vector<Stmt>& body) {
    std::set<std::string> out;
    frontend::for_each_stmt(body, [&](const Stmt& s) {
        if (s.kind == StmtKind::VarDecl) out.insert(s.name);
        if (s.kind == StmtKind::Assign && s.lhs().kind == ExprKind::Var) out.insert(s.lhs().text);
    });
    return out;
}

struct PlannedSplit {
    Edit edit;
    std::size_t first = 0;
    std::size_t last = 0;
};

void apply_splits(SourceUnit& u, const std::vector<Edit>& splits) {
    std::map<std::string, std::vector<PlannedSplit>> by_host;
    std::set<std::string> new_names;
    for (const auto& e : splits) {
        auto* host = u.find_function(e.host);
        if (!host) throw EditConflict(e.str() + ": unknown host function");
        if (u.find_function(e.new_name) || u.find_storage(e.new_name) || !new_names.insert(e.new_name).second)
            throw EditConflict(e.str() + ": '" + e.new_name + "' already exists");
        if (e.start_line > e.end_line) throw EditConflict(e.str() + ": empty range");
        if (e.start_line <= host->span.start_line || e.end_line >= host->span.end_line)
            throw EditConflict(e.str() + ": range outside the body of " + e.host);
        auto lines = statement_lines(*host);
        std::size_t first = lines.size(), last = lines.size();
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].first == e.start_line) first = i;
            if (lines[i].last == e.end_line) last = i;
        }
        if (first == lines.size() || last == lines.size() || first > last)
            throw EditConflict(e.str() + ": range does not cover whole statements");
        for (const auto& p : by_host[e.host])
            if (!(last < p.first || first > p.last)) throw EditConflict(e.str() + ": overlaps " + p.edit.str());
        by_host[e.host].push_back({e, first, last});
    }
    for (auto& [host_name, plans] : by_host) {
        std::sort(plans.begin(), plans.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (const auto& plan : plans) {
            auto* host = u.find_function(host_name);
            std::vector<Stmt> moved(host->body.begin() + static_cast<long>(plan.first),
                                    host->body.begin() + static_cast<long>(plan.last) + 1);
            std::vector<Stmt> before(host->body.begin(), host->body.begin() + static_cast<long>(plan.first));
            std::vector<Stmt> after(host->body.begin() + static_cast<long>(plan.last) + 1, host->body.end());

            bool returns = false;
            frontend::for_each_stmt(moved, [&](const Stmt& s) { returns |= s.kind == StmtKind::Return; });
            if (returns && (!after.empty() || moved.back().kind != StmtKind::Return))
                throw EditConflict(plan.edit.str() + ": a return inside the range must end the function");

            auto local_defs = defined_in(moved);
            std::set<std::string> used_after;
            for (const auto& s : after)
                frontend::for_each_stmt(std::vector<Stmt>{s}, [&](const Stmt& x) {
                    for (const auto& ex : x.exprs) {
                        std::vector<std::string> r;
                        collect_reads(ex, r);
                        used_after.insert(r.begin(), r.end());
                    }
                });
            auto before_defs = defined_in(before);
            for (const auto& d : local_defs)
                if (used_after.count(d) && !frontend::is_storage_name(u, d))
                    throw EditConflict(plan.edit.str() + ": '" + d + "' is assigned in the range and used after it");

            std::vector<std::string> reads;
            frontend::for_each_stmt(moved, [&](const Stmt& s) {
                std::size_t from = (s.kind == StmtKind::Assign && s.op == "=" && s.lhs().kind == ExprKind::Var) ? 1 : 0;
                for (std::size_t k = from; k < s.exprs.size(); ++k) collect_reads(s.exprs[k], reads);
                if (from == 1 && s.lhs().kind != ExprKind::Var) collect_reads(s.lhs(), reads);
            });
            FunctionDecl fresh;
            fresh.name = plan.edit.new_name;
            fresh.modifiers = {"private"};
            std::vector<Expr> args;
            auto add_param = [&](const std::string& name, std::optional<types::SolType> type) {
                frontend::Param p;
                p.name = name;
                p.type = std::move(type);
                fresh.params.push_back(p);
                args.push_back(Expr::var(name));
            };
            for (const auto& p : host->params)
                if (std::find(reads.begin(), reads.end(), p.name) != reads.end()) add_param(p.name, p.type);
            for (const auto& r : reads) {
                if (is_param(*host, r) || frontend::is_storage_name(u, r) || u.find_function(r)) continue;
                if (!before_defs.count(r)) continue;
                std::optional<types::SolType> t;
                frontend::for_each_stmt(before, [&](const Stmt& s) {
                    if (s.kind == StmtKind::VarDecl && s.name == r) t = s.decl_type;
                });
                add_param(r, t);
            }
            if (returns) {
                fresh.returns = host->returns;
                fresh.has_returns = host->has_returns;
            }
            fresh.body = std::move(moved);

            Stmt call;
            Expr c = Expr::call(Expr::var(fresh.name), std::move(args));
            if (returns) {
                call.kind = StmtKind::Return;
                call.exprs = {std::move(c)};
            } else {
                call.kind = StmtKind::ExprStmt;
                call.exprs = {std::move(c)};
            }
            host->body = std::move(before);
            host->body.push_back(std::move(call));
            host->body.insert(host->body.end(), after.begin(), after.end());

            auto at = std::find_if(u.functions.begin(), u.functions.end(), [&](const auto& f) { return f.name == host_name; });
            u.functions.insert(at, std::move(fresh));
        }
    }
}

} // namespace

SourceUnit apply_edits(const SourceUnit& unit, const EditSet& set) {
    SourceUnit u = frontend::canonicalize(unit);
    std::vector<Edit> splits;
    for (const auto& e : set.edits) {
        switch (e.kind) {
        case EditKind::Retype: apply_retype(u, e, set.scope); break;
        case EditKind::Attribute: apply_attribute(u, e); break;
        case EditKind::Rename: apply_rename(u, e, set.scope); break;
        case EditKind::Split: splits.push_back(e); break;
        }
    }
    // Split lines refer to the input rendering; the edits above keep every
    // statement position, so splits run last against the same coordinates.
    apply_splits(u, splits);
    try {
        frontend::ParseOptions opts;
        opts.strict = true;
        opts.file_id = unit.file_id;
        return frontend::parse_source(frontend::render_unit(u), opts);
    } catch (const std::exception& ex) {
        throw EditConflict(std::string("edited unit does not re-parse: ") + ex.what());
    }
}

// ---------------------------------------------------------------- diff

namespace {

std::string stmt_text(const Stmt& s) {
    FunctionDecl one;
    one.name = "f";
    one.body = {s};
    auto text = frontend::render_function(one);
    auto a = text.find('\n') + 1;
    auto b = text.rfind("}\n");
    return text.substr(a, b - a);
}

std::string strip_line_numbers(const std::string& text) {
    static const std::regex numbered(R"(^\s*\d+ \| ?)");
    std::istringstream in(text);
    std::string out;
    for (std::string line; std::getline(in, line);) out += std::regex_replace(line, numbered, "") + "\n";
    return out;
}

bool calls(const std::vector<Stmt>& body, const std::string& fn) {
    bool found = false;
    frontend::for_each_stmt(body, [&](const Stmt& s) {
        for (const auto& e : s.exprs)
            frontend::for_each_expr(e, [&](const Expr& x) {
                if (x.kind == ExprKind::Call && x.args[0].kind == ExprKind::Var && x.args[0].text == fn) found = true;
            });
    });
    return found;
}

} // namespace

EditSet diff_edits(const SourceUnit& unit, const std::string& rewritten, const std::string& scope) {
    EditSet out;
    out.scope = scope;
    SourceUnit canon = frontend::canonicalize(unit);
    SourceUnit next;
    try {
        next = frontend::parse_source(strip_line_numbers(rewritten));
    } catch (const std::exception&) {
        return out;
    }
    auto push = [&](Edit e) {
        if (std::find(out.edits.begin(), out.edits.end(), e) == out.edits.end()) out.edits.push_back(std::move(e));
    };
    for (const auto& d : next.storage) {
        const auto* old = canon.find_storage(d.name);
        if (old ? old->type.str() != d.type.str() : frontend::is_storage_name(canon, d.name))
            push(Edit::retype(d.name, d.type.str()));
        if (old && d.attribute && d.attribute != old->attribute && types::is_attribute_label(*d.attribute))
            push(Edit::attribute(d.name, *d.attribute));
    }
    for (const auto& f : next.functions) {
        const auto* old = canon.find_function(f.name);
        if (!old) continue;
        if (f.params.size() == old->params.size()) {
            for (std::size_t i = 0; i < f.params.size(); ++i) {
                const auto& np = f.params[i];
                const auto& op = old->params[i];
                if (np.name != op.name) push(Edit::rename(op.name, np.name, f.name));
                if (np.type && (!op.type || op.type->str() != np.type->str()))
                    push(Edit::retype(np.name, np.type->str(), f.name));
            }
        }
        frontend::for_each_stmt(f.body, [&](const Stmt& s) {
            if (s.kind != StmtKind::VarDecl) return;
            std::optional<std::string> before;
            frontend::for_each_stmt(old->body, [&](const Stmt& o) {
                if (o.kind == StmtKind::VarDecl && o.name == s.name && !before) before = o.decl_type.str();
            });
            if (before ? *before != s.decl_type.str() : is_local(*old, s.name))
                push(Edit::retype(s.name, s.decl_type.str(), f.name));
        });
    }
    for (const auto& f : next.functions) {
        if (canon.find_function(f.name) || f.body.empty()) continue;
        std::vector<std::string> want;
        for (const auto& s : f.body) want.push_back(stmt_text(s));
        for (const auto& host : canon.functions) {
            const auto* rewritten_host = next.find_function(host.name);
            if (rewritten_host && !calls(rewritten_host->body, f.name)) continue;
            auto lines = statement_lines(host);
            bool done = false;
            for (std::size_t i = 0; i + want.size() <= host.body.size() && !done; ++i) {
                bool match = true;
                for (std::size_t k = 0; k < want.size() && match; ++k) match = stmt_text(host.body[i + k]) == want[k];
                if (match) {
                    push(Edit::split(host.name, f.name, lines[i].first, lines[i + want.size() - 1].last));
                    done = true;
                }
            }
            if (done) break;
        }
    }
    return out;
}

} // namespace dsol::edits
