#include "dsol/eval/eval.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dsol/frontend/ir.hpp"
#include "dsol/frontend/parser.hpp"
#include "dsol/prompt/prompt.hpp"

namespace dsol::eval {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw SchemaError(path + "." + key, "missing");
    return j.at(key);
}

std::string string_field(const json& j, const char* key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_string()) throw SchemaError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

int line_field(const json& j, const char* key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number_integer() || v.get<long long>() < 1) throw SchemaError(path + "." + key, "expected a line number");
    return v.get<int>();
}

const json& array_field(const json& j, const char* key, const std::string& path) {
    static const json empty = json::array();
    if (!j.contains(key)) return empty;
    const json& v = j.at(key);
    if (!v.is_array()) throw SchemaError(path + "." + key, "expected an array");
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

using VarKey = std::pair<std::string, std::string>;

// Keyed matching: equal value is a TP, a different value one FP and one FN.
template <class Key, class Value, class Eq>
Counts match_keyed(const std::vector<std::pair<Key, Value>>& predicted, const std::vector<std::pair<Key, Value>>& truth,
                   Eq eq) {
    std::map<Key, const Value*> want;
    for (const auto& [k, v] : truth) want[k] = &v;
    Counts c;
    std::set<Key> seen;
    for (const auto& [k, v] : predicted) {
        if (!seen.insert(k).second) {
            ++c.fp;
            continue;
        }
        auto it = want.find(k);
        if (it == want.end())
            ++c.fp;
        else if (eq(v, *it->second))
            ++c.tp;
        else
            ++c.fp;
    }
    for (const auto& [k, v] : want) {
        if (!seen.count(k)) {
            ++c.fn;
            continue;
        }
        bool hit = false;
        for (const auto& [pk, pv] : predicted)
            if (pk == k) {
                hit = eq(pv, *v);
                break;
            }
        if (!hit) ++c.fn;
    }
    return c;
}

} // namespace

GroundTruth parse_ground_truth(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError("$", std::string("not JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("$", "expected an object");
    static const std::set<std::string> known = {"unit", "functions", "variables", "attributes", "recompiles"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw SchemaError("$." + k, "unknown field");

    GroundTruth t;
    t.unit = string_field(j, "unit", "$");
    const json& fns = array_field(j, "functions", "$");
    for (std::size_t i = 0; i < fns.size(); ++i) {
        std::string path = "$.functions[" + std::to_string(i) + "]";
        BoundaryEntry b{string_field(fns[i], "name", path), line_field(fns[i], "start", path),
                        line_field(fns[i], "end", path)};
        if (b.start > b.end) throw SchemaError(path, "start " + std::to_string(b.start) + " is after end " +
                                                         std::to_string(b.end));
        t.functions.push_back(std::move(b));
    }
    const json& vars = array_field(j, "variables", "$");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        std::string path = "$.variables[" + std::to_string(i) + "]";
        std::string fn = vars[i].contains("fn") ? string_field(vars[i], "fn", path) : std::string();
        std::string name = string_field(vars[i], "name", path);
        std::string type = string_field(vars[i], "type", path);
        if (!types::is_known_type_spelling(type)) throw SchemaError(path + ".type", "not a type: " + type);
        t.variables.push_back({fn, name, types::parse_type(type)});
    }
    const auto labels = prompt::candidates_for(prompt::TargetKind::ContractAttribute);
    const json& attrs = array_field(j, "attributes", "$");
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        std::string path = "$.attributes[" + std::to_string(i) + "]";
        AttributeEntry a{string_field(attrs[i], "slot", path), string_field(attrs[i], "label", path)};
        if (std::find(labels.begin(), labels.end(), a.label) == labels.end())
            throw SchemaError(path + ".label", "unknown attribute label " + a.label);
        t.attributes.push_back(std::move(a));
    }
    if (j.contains("recompiles")) {
        if (!j["recompiles"].is_boolean()) throw SchemaError("$.recompiles", "expected a boolean");
        t.recompiles = j["recompiles"].get<bool>();
    }
    return t;
}

GroundTruth load_ground_truth(const std::string& path) { return parse_ground_truth(read_file(path)); }

Predictions predictions_from_unit(const frontend::SourceUnit& source, const std::string& unit_id) {
    const frontend::SourceUnit unit = frontend::canonicalize(source);
    Predictions p;
    p.unit = unit_id;
    for (const auto& fn : unit.functions) p.functions.push_back({fn.name, fn.span.start_line, fn.span.end_line});
    for (const auto& s : unit.storage) {
        if (s.type.is_concrete()) p.variables.push_back({{}, s.name, s.type});
        if (s.attribute) p.attributes.push_back({s.name, *s.attribute});
    }
    const frontend::IRModule module = frontend::lower_ir(unit);
    for (const auto& fn : module.functions) {
        for (std::size_t i = 0; i < fn.params.size(); ++i)
            if (i < fn.param_types.size() && fn.param_types[i] && fn.param_types[i]->is_concrete())
                p.variables.push_back({fn.name, fn.params[i], *fn.param_types[i]});
        for (const auto& [name, type] : fn.local_types)
            if (type.is_concrete()) p.variables.push_back({fn.name, name, type});
    }
    return p;
}

Predictions predictions_from_text(const std::string& text, const std::string& unit_id) {
    frontend::ParseOptions po;
    po.file_id = unit_id;
    return predictions_from_unit(frontend::parse_source(text, po), unit_id);
}

Predictions predictions_from_report(const pipeline::RunReport& report) {
    return predictions_from_text(report.optimized_text, report.unit);
}

std::optional<double> Counts::precision() const {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> Counts::recall() const {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

Counts& Counts::operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
}

const char* recompile_status_name(RecompileStatus s) {
    switch (s) {
    case RecompileStatus::Pass: return "pass";
    case RecompileStatus::Fail: return "fail";
    case RecompileStatus::Skipped: return "skipped";
    }
    return "?";
}

std::optional<double> MetricsTable::recompile_failure_rate() const {
    if (recompile_checked == 0) return std::nullopt;
    return static_cast<double>(recompile_failed) / static_cast<double>(recompile_checked);
}

MetricsTable& MetricsTable::operator+=(const MetricsTable& o) {
    boundary += o.boundary;
    type += o.type;
    attribute += o.attribute;
    recompile_checked += o.recompile_checked;
    recompile_failed += o.recompile_failed;
    return *this;
}

void MetricsTable::add(const RecompileResult& r) {
    if (r.status == RecompileStatus::Skipped) return;
    ++recompile_checked;
    if (r.status == RecompileStatus::Fail) ++recompile_failed;
}

std::string percent(std::optional<double> ratio) {
    if (!ratio) return "undefined";
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << *ratio * 100.0 << "%";
    return out.str();
}

std::string MetricsTable::text() const {
    std::ostringstream out;
    auto row = [&](const std::string& name, const Counts& c) {
        out << std::left << std::setw(12) << name << std::right << std::setw(8) << c.tp << std::setw(8) << c.fp
            << std::setw(8) << c.fn << std::setw(12) << percent(c.precision()) << std::setw(12) << percent(c.recall())
            << "\n";
    };
    out << std::left << std::setw(12) << "category" << std::right << std::setw(8) << "TP" << std::setw(8) << "FP"
        << std::setw(8) << "FN" << std::setw(12) << "precision" << std::setw(12) << "recall" << "\n";
    row("boundary", boundary);
    row("type", type);
    row("attribute", attribute);
    out << "recompilation failure rate: " << percent(recompile_failure_rate()) << " (" << recompile_failed << " of "
        << recompile_checked << " checked)\n";
    return out.str();
}

std::string MetricsTable::to_json() const {
    auto counts = [](const Counts& c) {
        ojson j;
        j["tp"] = c.tp;
        j["fp"] = c.fp;
        j["fn"] = c.fn;
        j["precision"] = c.precision() ? ojson(*c.precision()) : ojson(nullptr);
        j["recall"] = c.recall() ? ojson(*c.recall()) : ojson(nullptr);
        return j;
    };
    ojson j;
    j["boundary"] = counts(boundary);
    j["type"] = counts(type);
    j["attribute"] = counts(attribute);
    j["recompilation"] = {{"checked", recompile_checked},
                          {"failed", recompile_failed},
                          {"failure_rate", recompile_failure_rate() ? ojson(*recompile_failure_rate()) : ojson(nullptr)}};
    return j.dump(2);
}

MetricsTable score(const Predictions& predictions, const GroundTruth& truth) {
    if (predictions.unit != truth.unit)
        throw SchemaMismatch("predictions for " + predictions.unit + " scored against truth for " + truth.unit);
    MetricsTable m;

    // boundaries: multiset match on spans
    std::map<std::pair<int, int>, std::size_t> spans;
    for (const auto& b : truth.functions) ++spans[{b.start, b.end}];
    for (const auto& b : predictions.functions) {
        auto it = spans.find({b.start, b.end});
        if (it != spans.end() && it->second > 0) {
            --it->second;
            ++m.boundary.tp;
        } else {
            ++m.boundary.fp;
        }
    }
    m.boundary.fn = truth.functions.size() - m.boundary.tp;

    std::vector<std::pair<VarKey, types::SolType>> pt, tt;
    for (const auto& v : predictions.variables) pt.push_back({{v.function, v.name}, v.type});
    for (const auto& v : truth.variables) tt.push_back({{v.function, v.name}, v.type});
    m.type = match_keyed(pt, tt, [](const types::SolType& a, const types::SolType& b) { return a == b; });

    std::vector<std::pair<std::string, std::string>> pa, ta;
    for (const auto& a : predictions.attributes) pa.push_back({a.slot, a.label});
    for (const auto& a : truth.attributes) ta.push_back({a.slot, a.label});
    m.attribute = match_keyed(pa, ta, [](const std::string& a, const std::string& b) { return a == b; });
    return m;
}

MetricsTable score(const pipeline::RunReport& report, const GroundTruth& truth) {
    return score(predictions_from_report(report), truth);
}

MetricsTable score_all(const std::vector<pipeline::RunReport>& reports, const std::vector<GroundTruth>& truth) {
    std::map<std::string, const GroundTruth*> by_unit;
    for (const auto& t : truth) by_unit[t.unit] = &t;
    MetricsTable total;
    for (const auto& r : reports) {
        auto it = by_unit.find(r.unit);
        if (it == by_unit.end()) throw SchemaMismatch("no ground truth for unit " + r.unit);
        total += score(r, *it->second);
    }
    return total;
}

RecompileResult recompile_check(const std::string& text, const std::string& command) {
    RecompileResult r;
    if (command.empty()) {
        r.reason = "no compiler command configured";
        return r;
    }
    char src[] = "/tmp/dsol_recompile_XXXXXX.sol";
    int fd = mkstemps(src, 4);
    if (fd < 0) throw std::runtime_error("cannot create a temporary file");
    std::string err = std::string(src) + ".err";
    {
        std::ofstream out(src, std::ios::binary);
        out << text;
    }
    close(fd);
    std::string cmd = command;
    auto at = cmd.find("{file}");
    if (at != std::string::npos)
        cmd.replace(at, 6, src);
    else
        cmd += std::string(" ") + src;
    int status = std::system(("(" + cmd + ") >/dev/null 2>" + err).c_str());
    r.exit_code = status == -1 ? -1 : WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    r.status = r.exit_code == 0 ? RecompileStatus::Pass : RecompileStatus::Fail;
    if (r.status == RecompileStatus::Fail) r.reason = read_file(err);
    std::remove(src);
    std::remove(err.c_str());
    return r;
}

} // namespace dsol::eval
