#include <sstream>

#include "dsol/llm/llm.hpp"

namespace dsol::llm {

const char* reply_mode_name(ReplyMode mode) {
    switch (mode) {
    case ReplyMode::Strict: return "strict";
    case ReplyMode::Lenient: return "lenient";
    case ReplyMode::Malformed: return "malformed";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool looks_like_json(const FencedBlock& b) {
    if (b.lang == "json") return true;
    auto t = trim(b.body);
    return b.lang.empty() && !t.empty() && (t[0] == '[' || t[0] == '{');
}

} // namespace

std::vector<FencedBlock> fenced_blocks(const std::string& text) {
    std::vector<FencedBlock> out;
    std::istringstream in(text);
    std::optional<FencedBlock> open;
    for (std::string line; std::getline(in, line);) {
        auto t = trim(line);
        if (t.rfind("```", 0) == 0) {
            if (open) {
                out.push_back(*open);
                open.reset();
            } else {
                open = FencedBlock{trim(t.substr(3)), {}};
            }
            continue;
        }
        if (open) open->body += line + "\n";
    }
    return out;
}

ParsedReply parse_edits(const RawResponse& raw, const prompt::OptimizationTarget& target,
                        const frontend::SourceUnit& unit) {
    ParsedReply out;
    out.edits.scope = target.function;
    auto blocks = fenced_blocks(raw.text);
    if (blocks.empty()) {
        out.note = "reply has no fenced block";
        return out;
    }
    std::string json_error;
    for (const auto& b : blocks) {
        if (!looks_like_json(b)) continue;
        try {
            out.edits.edits = edits::edits_from_json(b.body);
            out.mode = ReplyMode::Strict;
            return out;
        } catch (const edits::InvalidEdit& e) {
            if (json_error.empty()) json_error = e.what();
        }
    }
    for (const auto& b : blocks) {
        if (looks_like_json(b)) continue;
        auto diff = edits::diff_edits(unit, b.body, target.function);
        if (!diff.empty()) {
            out.edits = std::move(diff);
            out.mode = ReplyMode::Lenient;
            return out;
        }
    }
    out.note = json_error.empty() ? "no fenced block yields an edit" : json_error;
    return out;
}

} // namespace dsol::llm
