#include "dsol/verify/verify.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dsol/frontend/ir.hpp"
#include "dsol/frontend/parser.hpp"

namespace dsol::verify {

bool VerifyReport::equivalent() const {
    return std::all_of(functions.begin(), functions.end(), [](const FunctionCheck& c) {
        return c.verdict && c.verdict->outcome == equiv::Outcome::Equivalent;
    });
}

std::string VerifyReport::text() const {
    std::ostringstream out;
    out << "Type check: " << (violations.empty() ? "no new violations" : std::to_string(violations.violations.size()) +
                                                                              " new violation(s)")
        << "\n";
    for (const auto& v : violations.violations) out << "  - " << v.str() << "\n";
    for (const auto& c : functions) {
        out << c.function << ": ";
        if (c.verdict)
            out << c.verdict->str();
        else
            out << "error: " << c.error;
        out << "\n";
    }
    for (const auto& f : added) out << f << ": added\n";
    for (const auto& f : removed) out << f << ": removed\n";
    return out.str();
}

std::string VerifyReport::to_json() const {
    nlohmann::ordered_json j;
    j["violations"] = nlohmann::json::parse(violations.to_json());
    nlohmann::ordered_json fs = nlohmann::ordered_json::array();
    for (const auto& c : functions) {
        nlohmann::ordered_json f;
        f["function"] = c.function;
        if (c.verdict)
            f["verdict"] = nlohmann::ordered_json::parse(c.verdict->to_json());
        else
            f["error"] = c.error;
        fs.push_back(f);
    }
    j["functions"] = fs;
    j["added"] = added;
    j["removed"] = removed;
    j["ok"] = ok();
    return j.dump(2);
}

VerifyReport verify_units(const frontend::SourceUnit& original, const frontend::SourceUnit& optimized,
                          const VerifyOptions& options) {
    VerifyReport report;
    auto m = frontend::lower_ir(original);
    auto m2 = frontend::lower_ir(optimized);
    report.all_violations = typecheck::check_unit(m2);
    report.violations = typecheck::new_violations(typecheck::check_unit(m), report.all_violations);

    for (const auto& fn : m.functions) {
        if (!m2.has_function(fn.name)) {
            report.removed.push_back(fn.name);
            continue;
        }
        if (!options.functions.empty() &&
            std::find(options.functions.begin(), options.functions.end(), fn.name) == options.functions.end())
            continue;
        FunctionCheck check{fn.name, std::nullopt, {}};
        try {
            check.verdict = equiv::check_equivalence(m, fn.name, m2, fn.name, options.edits, options.bounds,
                                                     options.solver);
        } catch (const equiv::ArityMismatch& e) {
            check.error = e.what();
        }
        report.functions.push_back(std::move(check));
    }
    for (const auto& fn : m2.functions)
        if (!m.has_function(fn.name)) report.added.push_back(fn.name);
    return report;
}

VerifyReport verify_files(const std::string& original_path, const std::string& optimized_path,
                          const VerifyOptions& options) {
    auto read = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    frontend::ParseOptions po;
    po.file_id = original_path;
    auto a = frontend::parse_source(read(original_path), po);
    po.file_id = optimized_path;
    auto b = frontend::parse_source(read(optimized_path), po);
    return verify_units(a, b, options);
}

} // namespace dsol::verify
