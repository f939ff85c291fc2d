#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsol/dg/graph.hpp"
#include "dsol/eval/eval.hpp"
#include "dsol/flow/cfg.hpp"
#include "dsol/flow/dfg.hpp"
#include "dsol/frontend/ir.hpp"
#include "dsol/frontend/parser.hpp"
#include "dsol/pipeline/pipeline.hpp"
#include "dsol/verify/verify.hpp"

using namespace dsol;
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Usage errors found after parsing map to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Level { Error, Warn, Info, Debug };

Level g_level = Level::Warn;

void log(Level level, const std::string& event, ojson fields = ojson::object()) {
    if (level > g_level) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    ojson j;
    j["level"] = names[static_cast<int>(level)];
    j["event"] = event;
    for (auto& [k, v] : fields.items()) j[k] = v;
    std::cerr << j.dump() << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct Overrides {
    std::string config_path;
    std::string solver;
    int iterations = 0;
    int unroll = -1;
    double solver_timeout = 0;
};

pipeline::RunConfig load_config(const Overrides& o) {
    pipeline::RunConfig c = o.config_path.empty() ? pipeline::RunConfig{}
                                                  : pipeline::RunConfig::from_json(read_file(o.config_path));
    if (o.iterations) c.iteration_limit = o.iterations;
    if (!o.solver.empty()) c.solver.path = o.solver;
    if (o.unroll >= 0) c.bounds.loop_unroll = o.unroll;
    if (o.solver_timeout > 0) c.solver.timeout_s = o.solver_timeout;
    c.validate();
    return c;
}

int cmd_analyze(const std::vector<std::string>& inputs, const std::string& out_dir) {
    if (!out_dir.empty()) fs::create_directories(out_dir);
    for (const auto& path : inputs) {
        frontend::ParseOptions po;
        po.file_id = path;
        auto unit = frontend::canonicalize(read_file(path), po);
        auto module = frontend::lower_ir(unit);
        auto analysis = dg::analyze(module);
        for (const auto& s : unit.skips) log(Level::Warn, "function_skipped", {{"function", s.function}, {"message", s.message}});
        for (const auto& e : module.errors) log(Level::Warn, "function_not_lowered", {{"function", e.function()}, {"message", e.what()}});

        std::cout << fs::path(path).filename().string() << ": " << module.functions.size() << " functions, "
                  << analysis.dg.nodes().size() << " DG nodes, " << analysis.dg.count(dg::DepLabel::DFD) << " DFD / "
                  << analysis.dg.count(dg::DepLabel::SD) << " SD / " << analysis.dg.count(dg::DepLabel::TD)
                  << " TD edges\n";
        if (out_dir.empty()) continue;
        std::string stem = fs::path(path).stem().string();
        std::string ir, cfg, dfg, calls;
        for (std::size_t i = 0; i < module.functions.size(); ++i) {
            ir += module.functions[i].str() + "\n";
            cfg += "# " + module.functions[i].name + "\n" + flow::export_cfg(analysis.cfgs[i]) + "\n";
            dfg += "# " + module.functions[i].name + "\n" + flow::export_dfg(analysis.dfgs[i]) + "\n";
        }
        for (const auto& e : analysis.calls.edges) calls += e.caller + " -> " + e.callee + "\n";
        for (const auto& x : analysis.calls.externals) calls += "external " + x + "\n";
        fs::path dir(out_dir);
        write_file(dir / (stem + ".ir.txt"), ir);
        write_file(dir / (stem + ".cfg.txt"), cfg);
        write_file(dir / (stem + ".dfg.txt"), dfg);
        write_file(dir / (stem + ".calls.txt"), calls);
        write_file(dir / (stem + ".dg.txt"), analysis.dg.serialize());
        write_file(dir / (stem + ".dg.json"), analysis.dg.to_json());
        log(Level::Info, "analyzed", {{"unit", path}, {"out", out_dir}});
    }
    return 0;
}

struct OptimizeArgs {
    std::vector<std::string> inputs;
    std::string provider = "mock";
    std::string scenario;
    std::string out_dir = "out";
    std::size_t jobs = 0;
    bool strict = false;
};

int cmd_optimize(const OptimizeArgs& a, const Overrides& o) {
    pipeline::RunConfig config = load_config(o);
    if (a.jobs) config.units_in_flight = a.jobs;
    if (a.strict) config.strict_replies = true;

    std::unique_ptr<llm::Provider> provider;
    if (a.provider == "mock") {
        if (a.scenario.empty()) throw UsageError("--provider mock needs --scenario");
        provider = std::make_unique<llm::MockProvider>(llm::MockProvider::from_file(a.scenario));
    } else {
        config.provider.validate();
        provider = std::make_unique<llm::HttpProvider>(config.provider);
    }
    log(Level::Debug, "config", ojson::parse(config.to_json()));

    auto reports = pipeline::run_batch(a.inputs, *provider, config, a.out_dir);
    int rc = 0;
    for (const auto& r : reports) {
        if (r.revisions.empty()) {
            log(Level::Error, "unit_failed", {{"unit", r.input_path}, {"errors", r.errors}});
            rc = 1;
            continue;
        }
        for (const auto& e : r.errors) log(Level::Warn, "function_error", {{"unit", r.unit}, {"message", e}});
        if (g_level >= Level::Debug)
            for (const auto& out : r.outcomes) log(Level::Debug, "outcome", ojson::parse(out.to_json()));
        std::cout << r.unit << ": " << r.outcomes.size() << " targets, "
                  << r.count(pipeline::Status::Accepted) << " accepted, "
                  << r.count(pipeline::Status::RejectedViolations) + r.count(pipeline::Status::RejectedNonEquivalent)
                  << " rejected, " << r.count(pipeline::Status::Inconclusive) << " inconclusive, "
                  << r.count(pipeline::Status::MalformedReply) << " malformed, "
                  << r.count(pipeline::Status::ProviderFailure) << " provider failures -> " << r.output_path << "\n";
        log(Level::Info, "unit_done",
            {{"unit", r.unit}, {"output", r.output_path}, {"revisions", r.revisions.size()}, {"seconds", r.seconds}});
    }
    return rc;
}

int cmd_verify(const std::string& original, const std::string& optimized, const std::vector<std::string>& functions,
               bool json, const Overrides& o) {
    pipeline::RunConfig config = load_config(o);
    verify::VerifyOptions options;
    options.bounds = config.bounds;
    options.solver = config.solver;
    options.functions = functions;
    auto report = verify::verify_files(original, optimized, options);
    std::cout << (json ? report.to_json() + "\n" : report.text());
    return 0;
}

// A report JSON names its unit and optimized file; a .dsol file stands for
// itself with ".opt" dropped from the unit id.
pipeline::RunReport load_prediction(const std::string& path) {
    pipeline::RunReport r;
    fs::path p(path);
    if (p.extension() == ".json") {
        auto j = nlohmann::json::parse(read_file(path));
        r.unit = j.at("unit").get<std::string>();
        fs::path out = j.at("output").get<std::string>();
        if (out.is_relative() && !fs::exists(out)) out = p.parent_path() / out.filename();
        r.optimized_text = read_file(out.string());
        return r;
    }
    std::string name = p.filename().string();
    auto at = name.find(".opt.");
    if (at != std::string::npos) name.erase(at, 4);
    r.unit = name;
    r.optimized_text = read_file(path);
    return r;
}

int cmd_score(const std::vector<std::string>& inputs, const std::vector<std::string>& truth_paths,
              const std::string& recompile, bool json) {
    std::vector<eval::GroundTruth> truth;
    for (const auto& t : truth_paths) {
        if (fs::is_directory(t)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(t))
                if (e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) truth.push_back(eval::load_ground_truth(f.string()));
        } else {
            truth.push_back(eval::load_ground_truth(t));
        }
    }
    std::vector<pipeline::RunReport> reports;
    for (const auto& in : inputs) reports.push_back(load_prediction(in));
    eval::MetricsTable table = eval::score_all(reports, truth);
    for (const auto& r : reports) {
        auto result = eval::recompile_check(r.optimized_text, recompile);
        table.add(result);
        if (result.status == eval::RecompileStatus::Fail)
            log(Level::Info, "recompile_failed", {{"unit", r.unit}, {"exit_code", result.exit_code}});
    }
    std::cout << (json ? table.to_json() + "\n" : table.text());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Augments decompiled smart-contract pseudocode with recovered types, attributes and boundaries.",
                 "dsolopt"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string level = "warn";
    app.add_option("--log-level", level, "error, warn, info or debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
    Overrides overrides;

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", overrides.config_path, "RunConfig JSON")->check(CLI::ExistingFile);
        sub->add_option("--solver", overrides.solver, "SMT solver executable");
        sub->add_option("--unroll", overrides.unroll, "loop unroll bound")->check(CLI::NonNegativeNumber);
        sub->add_option("--solver-timeout", overrides.solver_timeout, "solver timeout in seconds")
            ->check(CLI::PositiveNumber);
    };

    std::vector<std::string> analyze_inputs;
    std::string analyze_out;
    auto* analyze = app.add_subcommand("analyze", "export IR, CFG, DFG, call graph and DG");
    analyze->add_option("inputs", analyze_inputs, ".dsol files")->required()->check(CLI::ExistingFile);
    analyze->add_option("-o,--out", analyze_out, "output directory");

    OptimizeArgs opt;
    auto* optimize = app.add_subcommand("optimize", "run the repair loop over every target of each unit");
    optimize->add_option("inputs", opt.inputs, ".dsol files")->required();
    optimize->add_option("--provider", opt.provider, "mock or http")->check(CLI::IsMember({"mock", "http"}));
    optimize->add_option("--scenario", opt.scenario, "mock replies by target id")->check(CLI::ExistingFile);
    optimize->add_option("--iterations", overrides.iterations, "iteration limit")->check(CLI::PositiveNumber);
    optimize->add_option("-o,--out", opt.out_dir, "output directory");
    optimize->add_option("-j,--jobs", opt.jobs, "units in flight")->check(CLI::PositiveNumber);
    optimize->add_flag("--strict", opt.strict, "reject replies without a JSON edit list");
    add_config(optimize);

    std::string original, optimized;
    std::vector<std::string> functions;
    bool verify_json = false;
    auto* verify = app.add_subcommand("verify", "type check and equivalence of an optimized unit, no LLM");
    verify->add_option("original", original)->required()->check(CLI::ExistingFile);
    verify->add_option("optimized", optimized)->required()->check(CLI::ExistingFile);
    verify->add_option("-f,--function", functions, "restrict to these functions");
    verify->add_flag("--json", verify_json);
    add_config(verify);

    std::vector<std::string> score_inputs, truth;
    std::string recompile;
    bool score_json = false;
    auto* score = app.add_subcommand("score", "precision and recall against ground truth");
    score->add_option("inputs", score_inputs, "report JSON or optimized .dsol files")->required()->check(CLI::ExistingFile);
    score->add_option("-t,--truth", truth, "ground-truth files or directories")->required()->check(CLI::ExistingPath);
    score->add_option("--recompile", recompile, "compiler command, {file} is the unit");
    score->add_flag("--json", score_json);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 2;
    }
    g_level = level == "error" ? Level::Error : level == "info" ? Level::Info : level == "debug" ? Level::Debug : Level::Warn;

    try {
        if (*analyze) return cmd_analyze(analyze_inputs, analyze_out);
        if (*optimize) return cmd_optimize(opt, overrides);
        if (*verify) return cmd_verify(original, optimized, functions, verify_json, overrides);
        if (*score) return cmd_score(score_inputs, truth, recompile, score_json);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const std::exception& e) {
        log(Level::Error, "failed", {{"message", e.what()}});
        return 1;
    }
    return 2;
}
