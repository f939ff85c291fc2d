#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dsol/frontend/ast.hpp"
#include "dsol/frontend/lexer.hpp"

namespace dsol::frontend {

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(SourcePos pos, std::vector<std::string> expected, std::string found);

    SourcePos pos() const { return pos_; }
    const std::vector<std::string>& expected() const { return expected_; }
    const std::string& found() const { return found_; }

private:
    SourcePos pos_;
    std::vector<std::string> expected_;
    std::string found_;
};

struct ParseOptions {
    /// Escalates per-function skip reports to a SyntaxError.
    bool strict = false;
    std::string file_id;
};

/// Parses a token stream into a SourceUnit. Functions whose header or body does
/// not parse are skipped and listed in SourceUnit::skips (or rethrown in strict
/// mode). Errors outside functions and duplicate function names always throw.
SourceUnit parse_unit(const std::vector<Token>& tokens, const ParseOptions& options = {});

/// tokenize + parse_unit, keeping the original text on the unit.
SourceUnit parse_source(std::string_view text, const ParseOptions& options = {});

/// Parses and re-parses the canonical rendering so that every position refers
/// to a line of the canonical text.
SourceUnit canonicalize(std::string_view text, const ParseOptions& options = {});
SourceUnit canonicalize(const SourceUnit& unit);

} // namespace dsol::frontend
