#include "dsol/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dsol/dg/graph.hpp"
#include "dsol/frontend/ir.hpp"
#include "dsol/frontend/parser.hpp"
#include "dsol/frontend/render.hpp"

namespace dsol::pipeline {

using ojson = nlohmann::ordered_json;

namespace {

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// Worst verdict over the touched functions: NonEquivalent, then Inconclusive.
int severity(const equiv::EquivalenceVerdict& v) {
    switch (v.outcome) {
    case equiv::Outcome::NonEquivalent: return 2;
    case equiv::Outcome::Inconclusive: return 1;
    case equiv::Outcome::Equivalent: return 0;
    }
    return 0;
}

struct Budget {
    std::size_t limit = 0;
    std::size_t used = 0;
};

TargetResult run_target(const frontend::SourceUnit& unit, const prompt::OptimizationTarget& target,
                        llm::Provider& provider, const RunConfig& config, Budget& budget) {
    TargetResult result{{target, Status::MalformedReply, {}, {}}, unit};
    OptimizationOutcome& outcome = result.outcome;

    const frontend::IRModule module = frontend::lower_ir(unit);
    const dg::Analysis analysis = dg::analyze(module);
    const typecheck::ViolationReport baseline = typecheck::check_unit(module);

    std::string feedback;
    for (int i = 0; i < config.iteration_limit; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        prompt::PromptOptions options;
        options.token_budget = config.prompt_budget;
        options.feedback = feedback;
        prompt::PromptBundle bundle = prompt::build_prompt(unit, module, analysis, target, options);

        Iteration it;
        it.prompt_hash = prompt::hash_hex(bundle.hash());
        auto finish = [&](Status s) {
            it.seconds = since(t0);
            outcome.status = s;
            outcome.iterations.push_back(std::move(it));
        };

        if (budget.limit && budget.used + bundle.token_estimate() > budget.limit) {
            it.note = "token budget exhausted (" + std::to_string(budget.used) + " of " +
                      std::to_string(budget.limit) + " used)";
            finish(Status::ProviderFailure);
            break;
        }
        llm::RawResponse raw;
        try {
            raw = provider.complete(bundle);
        } catch (const std::exception& e) {
            it.note = std::string("provider failure: ") + e.what();
            finish(Status::ProviderFailure);
            break;
        }
        it.prompt_tokens = raw.prompt_tokens ? raw.prompt_tokens : bundle.token_estimate();
        it.completion_tokens = raw.completion_tokens ? raw.completion_tokens : prompt::estimate_tokens(raw.text);
        budget.used += it.prompt_tokens + it.completion_tokens;

        llm::ParsedReply parsed = llm::parse_edits(raw, target, unit);
        it.mode = parsed.mode;
        if (parsed.malformed() || (config.strict_replies && parsed.mode == llm::ReplyMode::Lenient)) {
            it.note = parsed.malformed() ? parsed.note : "reply carries no JSON edit list";
            finish(Status::MalformedReply);
            break;
        }
        it.edits = parsed.edits;
        if (it.edits.empty()) {
            it.note = "no edits proposed";
            finish(Status::Accepted);
            break;
        }

        frontend::SourceUnit next;
        try {
            next = edits::apply_edits(unit, it.edits);
        } catch (const std::exception& e) {
            // the whole edit set is discarded
            it.note = std::string("edits discarded: ") + e.what();
            feedback = "The proposed edits could not be applied: " + std::string(e.what()) + "\n";
            finish(Status::RejectedViolations);
            continue;
        }

        frontend::IRModule m2 = frontend::lower_ir(next);
        it.violations = typecheck::new_violations(baseline, typecheck::check_unit(m2));
        if (!it.violations.empty()) {
            feedback = it.violations.text();
            finish(Status::RejectedViolations);
            continue;
        }

        // annotations are not executable, so attribute-only edits skip this
        if (it.edits.touches_code()) {
            std::string failure;
            for (const auto& fn : it.edits.touched_functions(unit)) {
                if (!module.has_function(fn)) continue;
                if (!m2.has_function(fn)) {
                    failure = "function " + fn + " disappeared";
                    break;
                }
                try {
                    auto v = equiv::check_equivalence(module, fn, m2, fn, it.edits, config.bounds, config.solver);
                    if (!it.verdict || severity(v) > severity(*it.verdict)) {
                        it.verdict = std::move(v);
                        it.note = fn;
                    }
                } catch (const equiv::SolverUnavailable& e) {
                    it.note = std::string("solver unavailable: ") + e.what();
                    it.verdict.reset();
                    finish(Status::Inconclusive);
                    return result;
                } catch (const std::exception& e) {
                    failure = fn + ": " + e.what();
                    break;
                }
            }
            if (!failure.empty()) {
                it.note = failure;
                feedback = "The edits change the interface of the code: " + failure + "\n";
                finish(Status::RejectedNonEquivalent);
                continue;
            }
            if (it.verdict && it.verdict->outcome == equiv::Outcome::NonEquivalent) {
                feedback = "The edits change the behaviour of " + it.note + ": " + it.verdict->str() + "\n";
                finish(Status::RejectedNonEquivalent);
                continue;
            }
            if (it.verdict && it.verdict->outcome == equiv::Outcome::Inconclusive) {
                finish(Status::Inconclusive);
                break;
            }
        }
        finish(Status::Accepted);
        result.unit = frontend::canonicalize(next);
        break;
    }
    if (outcome.iterations.size() > static_cast<std::size_t>(config.iteration_limit))
        throw std::logic_error("iteration ceiling exceeded");
    outcome.revision = revision_id(result.unit);
    return result;
}

ojson provider_json(const llm::ProviderConfig& p) {
    ojson j;
    j["endpoint"] = p.endpoint;
    j["model"] = p.model;
    j["token_env"] = p.token_env;
    j["timeout_s"] = p.timeout_s;
    j["max_retries"] = p.max_retries;
    j["backoff_ms"] = p.backoff_ms;
    j["context_limit"] = p.context_limit;
    return j;
}

void check_keys(const nlohmann::json& j, const std::string& where, const std::set<std::string>& known) {
    if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw std::invalid_argument("unknown config field " + where + "." + k);
}

template <class T>
void take(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("config field " + where + "." + key + " has the wrong type");
    }
}

} // namespace

const char* status_name(Status s) {
    switch (s) {
    case Status::Accepted: return "Accepted";
    case Status::RejectedViolations: return "RejectedViolations";
    case Status::RejectedNonEquivalent: return "RejectedNonEquivalent";
    case Status::Inconclusive: return "Inconclusive";
    case Status::MalformedReply: return "MalformedReply";
    case Status::ProviderFailure: return "ProviderFailure";
    }
    return "?";
}

void RunConfig::validate() const {
    if (iteration_limit < 1) throw std::invalid_argument("iteration_limit must be at least 1");
    if (bounds.loop_unroll < 0) throw std::invalid_argument("bounds.loop_unroll must be non-negative");
    if (bounds.max_paths < 1 || bounds.max_depth < 1 || bounds.max_steps < 1)
        throw std::invalid_argument("bounds must be positive");
    if (prompt_budget == 0) throw std::invalid_argument("prompt_budget must be positive");
    if (solver.path.empty()) throw std::invalid_argument("solver.path must not be empty");
    if (!(solver.timeout_s > 0)) throw std::invalid_argument("solver.timeout_s must be positive");
}

RunConfig RunConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config is not JSON: ") + e.what());
    }
    RunConfig c;
    check_keys(j, "config",
               {"provider", "iteration_limit", "bounds", "solver", "prompt_budget", "token_budget", "strict_replies",
                "units_in_flight"});
    if (j.contains("provider")) {
        const auto& p = j["provider"];
        check_keys(p, "provider",
                   {"endpoint", "model", "token_env", "timeout_s", "max_retries", "backoff_ms", "context_limit"});
        take(p, "endpoint", c.provider.endpoint, "provider");
        take(p, "model", c.provider.model, "provider");
        take(p, "token_env", c.provider.token_env, "provider");
        take(p, "timeout_s", c.provider.timeout_s, "provider");
        take(p, "max_retries", c.provider.max_retries, "provider");
        take(p, "backoff_ms", c.provider.backoff_ms, "provider");
        take(p, "context_limit", c.provider.context_limit, "provider");
    }
    take(j, "iteration_limit", c.iteration_limit, "config");
    if (j.contains("bounds")) {
        const auto& b = j["bounds"];
        check_keys(b, "bounds", {"loop_unroll", "max_paths", "max_depth", "max_steps"});
        take(b, "loop_unroll", c.bounds.loop_unroll, "bounds");
        take(b, "max_paths", c.bounds.max_paths, "bounds");
        take(b, "max_depth", c.bounds.max_depth, "bounds");
        take(b, "max_steps", c.bounds.max_steps, "bounds");
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        check_keys(s, "solver", {"path", "args", "timeout_s"});
        take(s, "path", c.solver.path, "solver");
        take(s, "args", c.solver.args, "solver");
        take(s, "timeout_s", c.solver.timeout_s, "solver");
    }
    take(j, "prompt_budget", c.prompt_budget, "config");
    take(j, "token_budget", c.token_budget, "config");
    take(j, "strict_replies", c.strict_replies, "config");
    take(j, "units_in_flight", c.units_in_flight, "config");
    c.validate();
    return c;
}

std::string RunConfig::to_json() const {
    ojson j;
    j["provider"] = provider_json(provider);
    j["iteration_limit"] = iteration_limit;
    j["bounds"] = {{"loop_unroll", bounds.loop_unroll},
                   {"max_paths", bounds.max_paths},
                   {"max_depth", bounds.max_depth},
                   {"max_steps", bounds.max_steps}};
    j["solver"] = {{"path", solver.path}, {"args", solver.args}, {"timeout_s", solver.timeout_s}};
    j["prompt_budget"] = prompt_budget;
    j["token_budget"] = token_budget;
    j["strict_replies"] = strict_replies;
    j["units_in_flight"] = units_in_flight;
    return j.dump(2);
}

std::string revision_id(const frontend::SourceUnit& unit) {
    return prompt::hash_hex(prompt::fnv1a(frontend::render_unit(unit)));
}

std::vector<prompt::OptimizationTarget> enumerate_targets(const frontend::SourceUnit& unit) {
    using prompt::OptimizationTarget;
    const frontend::IRModule module = frontend::lower_ir(unit);
    std::vector<OptimizationTarget> types, attributes, boundaries;
    for (const auto& slot : module.storage_order) {
        types.push_back(OptimizationTarget::storage(slot));
        attributes.push_back(OptimizationTarget::attribute(slot));
    }
    for (const auto& fn : module.functions) {
        std::vector<std::string> seen;
        auto add = [&](const std::string& name) {
            if (module.is_storage(name) || frontend::is_env_name(name)) return;
            if (std::find(seen.begin(), seen.end(), name) != seen.end()) return;
            seen.push_back(name);
            types.push_back(OptimizationTarget::variable(fn.name, name));
        };
        for (const auto& p : fn.params) add(p);
        for (const auto& in : fn.instrs)
            if (in.dest && in.dest->kind == frontend::ValueKind::Var) add(in.dest->name);
        for (const auto& [name, type] : fn.local_types) add(name);
        boundaries.push_back(OptimizationTarget::boundary(fn.name));
    }
    std::vector<OptimizationTarget> all = std::move(types);
    all.insert(all.end(), attributes.begin(), attributes.end());
    all.insert(all.end(), boundaries.begin(), boundaries.end());
    return all;
}

TargetResult optimize_target(const frontend::SourceUnit& unit, const prompt::OptimizationTarget& target,
                             llm::Provider& provider, const RunConfig& config) {
    config.validate();
    Budget budget{config.token_budget, 0};
    return run_target(unit, target, provider, config, budget);
}

std::string OptimizationOutcome::to_json() const {
    ojson j;
    j["target"] = target.id();
    j["kind"] = prompt::target_kind_name(target.kind);
    j["status"] = status_name(status);
    j["revision"] = revision;
    ojson its = ojson::array();
    for (const auto& it : iterations) {
        ojson x;
        x["prompt_hash"] = it.prompt_hash;
        x["reply"] = llm::reply_mode_name(it.mode);
        x["edits"] = ojson::parse(edits::edits_to_json(it.edits.edits));
        x["violations"] = ojson::parse(it.violations.to_json());
        x["verdict"] = it.verdict ? ojson::parse(it.verdict->to_json()) : ojson(nullptr);
        x["note"] = it.note;
        x["prompt_tokens"] = it.prompt_tokens;
        x["completion_tokens"] = it.completion_tokens;
        x["seconds"] = it.seconds;
        its.push_back(x);
    }
    j["iterations"] = its;
    return j.dump(2);
}

std::size_t RunReport::count(Status s) const {
    return static_cast<std::size_t>(
        std::count_if(outcomes.begin(), outcomes.end(), [&](const OptimizationOutcome& o) { return o.status == s; }));
}

std::string RunReport::to_json() const {
    ojson j;
    j["unit"] = unit;
    j["input"] = input_path;
    j["output"] = output_path;
    j["revisions"] = revisions;
    ojson outs = ojson::array();
    for (const auto& o : outcomes) outs.push_back(ojson::parse(o.to_json()));
    j["outcomes"] = outs;
    ojson skips = ojson::array();
    for (const auto& s : skipped) skips.push_back({{"target", s.target}, {"reason", s.reason}});
    j["skipped"] = skips;
    j["errors"] = errors;
    ojson status = ojson::object();
    for (Status s : {Status::Accepted, Status::RejectedViolations, Status::RejectedNonEquivalent, Status::Inconclusive,
                     Status::MalformedReply, Status::ProviderFailure})
        status[status_name(s)] = count(s);
    j["status_counts"] = status;
    std::size_t n = outcomes.size();
    ojson totals;
    totals["targets"] = n;
    totals["prompt_tokens"] = prompt_tokens;
    totals["completion_tokens"] = completion_tokens;
    totals["seconds"] = seconds;
    totals["avg_tokens"] = n ? static_cast<double>(prompt_tokens + completion_tokens) / static_cast<double>(n) : 0.0;
    totals["avg_seconds"] = n ? seconds / static_cast<double>(n) : 0.0;
    j["totals"] = totals;
    return j.dump(2);
}

RunReport run_text(const std::string& text, const std::string& unit_id, llm::Provider& provider,
                   const RunConfig& config) {
    config.validate();
    auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.unit = unit_id;
    report.optimized_text = text;

    frontend::SourceUnit unit;
    try {
        frontend::ParseOptions po;
        po.file_id = unit_id;
        unit = frontend::canonicalize(text, po);
    } catch (const std::exception& e) {
        report.errors.push_back(e.what());
        report.seconds = since(t0);
        return report;
    }
    for (const auto& s : unit.skips) report.errors.push_back(s.function + ": " + s.message);
    for (const auto& e : frontend::lower_ir(unit).errors) report.errors.push_back(e.function() + ": " + e.what());
    report.revisions.push_back(revision_id(unit));

    Budget budget{config.token_budget, 0};
    bool changed = false;
    for (const auto& target : enumerate_targets(unit)) {
        TargetResult r;
        try {
            r = run_target(unit, target, provider, config, budget);
        } catch (const prompt::EmptySlice& e) {
            report.skipped.push_back({target.id(), std::string("empty slice: ") + e.what()});
            continue;
        } catch (const prompt::InvalidTarget& e) {
            report.skipped.push_back({target.id(), std::string("invalid target: ") + e.what()});
            continue;
        }
        for (const auto& it : r.outcome.iterations) {
            report.prompt_tokens += it.prompt_tokens;
            report.completion_tokens += it.completion_tokens;
        }
        if (r.outcome.status == Status::Accepted && r.outcome.revision != report.revisions.back()) {
            unit = std::move(r.unit);
            report.revisions.push_back(r.outcome.revision);
            changed = true;
        }
        report.outcomes.push_back(std::move(r.outcome));
    }
    if (changed) report.optimized_text = frontend::render_unit(unit);
    report.seconds = since(t0);
    return report;
}

RunReport run_unit(const std::string& path, llm::Provider& provider, const RunConfig& config,
                   const std::string& out_dir) {
    std::filesystem::path p(path);
    RunReport report = run_text(read_file(path), p.filename().string(), provider, config);
    report.input_path = path;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        auto out = std::filesystem::path(out_dir) / (p.stem().string() + ".opt.dsol");
        report.output_path = out.string();
        write_file(out, report.optimized_text);
        write_file(std::filesystem::path(out_dir) / (p.stem().string() + ".report.json"), report.to_json());
    }
    return report;
}

std::vector<RunReport> run_batch(const std::vector<std::string>& paths, llm::Provider& provider,
                                 const RunConfig& config, const std::string& out_dir) {
    config.validate();
    std::vector<RunReport> reports(paths.size());
    std::size_t workers = config.units_in_flight ? config.units_in_flight : std::thread::hardware_concurrency();
    workers = std::max<std::size_t>(1, std::min(workers, paths.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < paths.size(); i = next++) {
            try {
                reports[i] = run_unit(paths[i], provider, config, out_dir);
            } catch (const std::exception& e) {
                reports[i].unit = std::filesystem::path(paths[i]).filename().string();
                reports[i].input_path = paths[i];
                reports[i].errors.push_back(e.what());
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return reports;
}

} // namespace dsol::pipeline
