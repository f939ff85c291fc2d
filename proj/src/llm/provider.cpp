#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "dsol/llm/llm.hpp"

namespace dsol::llm {

using json = nlohmann::json;

void ProviderConfig::validate() const {
    if (!(timeout_s > 0)) throw ConfigError("timeout must be positive");
    if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
    if (backoff_ms < 0) throw ConfigError("backoff must be non-negative");
}

// ---------------------------------------------------------------- mock

MockProvider::MockProvider(std::map<std::string, std::vector<std::string>> script) : script_(std::move(script)) {}

MockProvider MockProvider::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("scenario must map target ids to replies");
    std::map<std::string, std::vector<std::string>> script;
    for (const auto& [key, value] : j.items()) {
        if (value.is_string()) {
            script[key] = {value.get<std::string>()};
        } else if (value.is_array()) {
            for (const auto& r : value) {
                if (!r.is_string()) throw ConfigError("scenario reply for '" + key + "' is not a string");
                script[key].push_back(r.get<std::string>());
            }
        } else {
            throw ConfigError("scenario entry '" + key + "' must be a string or a list of strings");
        }
    }
    return MockProvider(std::move(script));
}

MockProvider MockProvider::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scenario " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

RawResponse MockProvider::complete(const prompt::PromptBundle& bundle) {
    auto id = bundle.target.id();
    RawResponse r;
    r.model = "mock";
    {
        std::lock_guard lock(mu_);
        auto n = calls_[id]++;
        auto it = script_.find(id);
        if (it == script_.end()) it = script_.find("*");
        if (it != script_.end() && !it->second.empty()) r.text = it->second[std::min(n, it->second.size() - 1)];
    }
    r.prompt_tokens = bundle.token_estimate();
    r.completion_tokens = prompt::estimate_tokens(r.text);
    return r;
}

std::size_t MockProvider::calls(const std::string& target_id) const {
    std::lock_guard lock(mu_);
    auto it = calls_.find(target_id);
    return it == calls_.end() ? 0 : it->second;
}

void MockProvider::reset() {
    std::lock_guard lock(mu_);
    calls_.clear();
}

// ---------------------------------------------------------------- http

Transport default_transport() {
    return [](const HttpRequest& req) {
        static const std::regex url(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
        std::smatch m;
        if (!std::regex_match(req.url, m, url)) return HttpResult{false, 0, "bad endpoint"};
        std::string base = m[1].str() + "://" + m[2].str() + (m[3].matched ? ":" + m[3].str() : "");
        std::string path = m[4].matched ? m[4].str() : "/";
        httplib::Client cli(base);
        auto secs = static_cast<time_t>(req.timeout_s);
        auto usecs = static_cast<time_t>((req.timeout_s - static_cast<double>(secs)) * 1e6);
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        for (const auto& [k, v] : req.headers)
            if (k != "Content-Type") headers.emplace(k, v);
        auto res = cli.Post(path, headers, req.body, "application/json");
        if (!res) return HttpResult{false, 0, httplib::to_string(res.error())};
        return HttpResult{true, res->status, res->body};
    };
}

HttpProvider::HttpProvider(ProviderConfig config, Transport transport, Sleeper sleep)
    : config_(std::move(config)), transport_(std::move(transport)), sleep_(std::move(sleep)) {
    config_.validate();
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string HttpProvider::request_body(const ProviderConfig& config, const prompt::PromptBundle& bundle) {
    nlohmann::ordered_json j;
    j["model"] = config.model;
    j["temperature"] = 0;
    j["messages"] = nlohmann::ordered_json::array({
        {{"role", "system"}, {"content", "You improve decompiled Solidity code. Answer in the requested output format."}},
        {{"role", "user"}, {"content", bundle.text()}},
    });
    return j.dump();
}

RawResponse HttpProvider::complete(const prompt::PromptBundle& bundle) {
    auto tokens = bundle.token_estimate();
    if (config_.context_limit && tokens > config_.context_limit)
        throw BudgetExceeded("prompt needs ~" + std::to_string(tokens) + " tokens, limit is " +
                             std::to_string(config_.context_limit));
    HttpRequest req;
    req.url = config_.endpoint;
    req.body = request_body(config_, bundle);
    req.timeout_s = config_.timeout_s;
    req.headers["Content-Type"] = "application/json";
    if (!config_.token_env.empty()) {
        const char* token = std::getenv(config_.token_env.c_str());
        if (!token || !*token) throw AuthError("environment variable " + config_.token_env + " is not set");
        req.headers["Authorization"] = std::string("Bearer ") + token;
    }

    auto start = std::chrono::steady_clock::now();
    std::string last;
    for (int attempt = 0;; ++attempt) {
        ++attempts_;
        HttpResult res = transport_(req);
        bool retry = !res.transport_ok || res.status == 429 || res.status >= 500;
        if (retry) {
            last = res.transport_ok ? "HTTP " + std::to_string(res.status) : "transport failure: " + res.body;
            if (attempt >= config_.max_retries)
                throw ProviderUnavailable("provider unavailable after " + std::to_string(attempt + 1) +
                                          " attempts (" + last + ")");
            sleep_(std::chrono::milliseconds(static_cast<long>(config_.backoff_ms) << attempt));
            continue;
        }
        if (res.status == 401 || res.status == 403) throw AuthError("provider rejected credentials (HTTP " + std::to_string(res.status) + ")");
        if (res.status < 200 || res.status >= 300) throw ProviderUnavailable("provider returned HTTP " + std::to_string(res.status));
        RawResponse out;
        try {
            auto j = json::parse(res.body);
            out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
            out.model = j.value("model", config_.model);
            if (j.contains("usage")) {
                const auto& u = j.at("usage");
                out.prompt_tokens = u.value("prompt_tokens", std::size_t{0});
                out.completion_tokens = u.value("completion_tokens", std::size_t{0});
            }
        } catch (const json::exception& e) {
            throw ProviderUnavailable(std::string("unreadable provider response: ") + e.what());
        }
        out.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return out;
    }
}

// ---------------------------------------------------------------- submit

RawResponse submit(const prompt::PromptBundle& bundle, Provider& provider) { return provider.complete(bundle); }

std::vector<SubmitResult> submit_batch(const std::vector<prompt::PromptBundle>& bundles, Provider& provider,
                                       std::size_t max_in_flight, std::chrono::milliseconds min_interval) {
    std::vector<SubmitResult> out(bundles.size());
    std::mutex mu;
    std::size_t next = 0;
    auto next_start = std::chrono::steady_clock::now();
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            std::chrono::steady_clock::time_point start;
            {
                std::lock_guard lock(mu);
                if (next >= bundles.size()) return;
                i = next++;
                start = std::max(next_start, std::chrono::steady_clock::now());
                next_start = start + min_interval;
            }
            std::this_thread::sleep_until(start);
            try {
                out[i].response = provider.complete(bundles[i]);
            } catch (const std::exception& e) {
                out[i].error = e.what();
            }
        }
    };
    std::size_t n = std::max<std::size_t>(1, std::min(max_in_flight, bundles.size()));
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k < n; ++k) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return out;
}

} // namespace dsol::llm
