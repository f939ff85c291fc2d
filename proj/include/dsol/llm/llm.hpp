#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsol/edits/edits.hpp"
#include "dsol/prompt/prompt.hpp"

namespace dsol::llm {

class ProviderUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AuthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProviderConfig {
    std::string endpoint; // http(s)://host[:port]/path
    std::string model;
    std::string token_env; // environment variable holding the bearer token; empty for none
    double timeout_s = 60;
    int max_retries = 3;
    int backoff_ms = 250; // first retry delay, doubled per attempt
    std::size_t context_limit = 0; // prompt token ceiling, 0 for none

    void validate() const; // ConfigError
};

struct RawResponse {
    std::string text;
    std::string model;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double latency_ms = 0;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string name() const = 0;
    virtual RawResponse complete(const prompt::PromptBundle& bundle) = 0;
};

/// Scripted replies keyed by target id. The n-th request for a target gets the
/// n-th reply; the last reply repeats. "*" is the fallback key. A target with
/// no script gets an empty reply.
class MockProvider : public Provider {
public:
    explicit MockProvider(std::map<std::string, std::vector<std::string>> script);
    MockProvider(MockProvider&& o) noexcept : script_(std::move(o.script_)), calls_(std::move(o.calls_)) {}
    static MockProvider from_json(const std::string& text);
    static MockProvider from_file(const std::string& path);

    std::string name() const override { return "mock"; }
    RawResponse complete(const prompt::PromptBundle& bundle) override;

    std::size_t calls(const std::string& target_id) const;
    void reset();

private:
    std::map<std::string, std::vector<std::string>> script_;
    std::map<std::string, std::size_t> calls_;
    mutable std::mutex mu_;
};

struct HttpRequest {
    std::string url;
    std::string body;
    std::map<std::string, std::string> headers;
    double timeout_s = 60;
};

struct HttpResult {
    bool transport_ok = true; // false when the connection failed or timed out
    int status = 0;
    std::string body;
};

using Transport = std::function<HttpResult(const HttpRequest&)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

Transport default_transport();

/// Chat-completion JSON POST with retries on transport failures, 429 and 5xx.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderConfig config, Transport transport = default_transport(), Sleeper sleep = {});

    std::string name() const override { return "http"; }
    RawResponse complete(const prompt::PromptBundle& bundle) override;

    static std::string request_body(const ProviderConfig& config, const prompt::PromptBundle& bundle);
    std::size_t attempts() const { return attempts_; }

private:
    ProviderConfig config_;
    Transport transport_;
    Sleeper sleep_;
    std::size_t attempts_ = 0;
};

RawResponse submit(const prompt::PromptBundle& bundle, Provider& provider);

struct SubmitResult {
    std::optional<RawResponse> response;
    std::string error;
};

/// Submits bundles with at most `max_in_flight` concurrent requests, spacing
/// request starts by at least `min_interval`. Results keep the input order.
std::vector<SubmitResult> submit_batch(const std::vector<prompt::PromptBundle>& bundles, Provider& provider,
                                       std::size_t max_in_flight = 4,
                                       std::chrono::milliseconds min_interval = std::chrono::milliseconds(0));

enum class ReplyMode { Strict, Lenient, Malformed };

const char* reply_mode_name(ReplyMode mode);

struct ParsedReply {
    edits::EditSet edits;
    ReplyMode mode = ReplyMode::Malformed;
    std::string note; // reason when malformed
    bool malformed() const { return mode == ReplyMode::Malformed; }
};

struct FencedBlock {
    std::string lang;
    std::string body;
};

std::vector<FencedBlock> fenced_blocks(const std::string& text);

/// A fenced JSON edit list is authoritative; otherwise the first fenced code
/// block that diffs to a non-empty edit set against `unit` is used.
ParsedReply parse_edits(const RawResponse& raw, const prompt::OptimizationTarget& target,
                        const frontend::SourceUnit& unit);

} // namespace dsol::llm
