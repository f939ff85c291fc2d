#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsol/frontend/ast.hpp"

namespace dsol::edits {

class EditConflict : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidEdit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EditKind : std::uint8_t { Retype, Attribute, Split, Rename };

const char* edit_kind_name(EditKind kind); // retype, attribute, split, rename

struct Edit {
    EditKind kind = EditKind::Retype;
    std::string name;     // retype / attribute
    std::string type;     // retype: type spelling
    std::string label;    // attribute
    std::string host;     // split
    std::string new_name; // split: new function; rename: new variable name
    int start_line = 0;   // split, canonical lines
    int end_line = 0;
    std::string old_name; // rename
    std::string function; // optional scope for retype / rename

    static Edit retype(std::string name, std::string type, std::string function = {});
    static Edit attribute(std::string name, std::string label);
    static Edit split(std::string host, std::string new_name, int start_line, int end_line);
    static Edit rename(std::string old_name, std::string new_name, std::string function = {});

    std::string str() const;
    friend bool operator==(const Edit&, const Edit&) = default;
};

struct EditSet {
    std::vector<Edit> edits;
    std::string scope; // function the edits default to, empty for unit-level targets

    bool empty() const { return edits.empty(); }
    bool touches_code() const; // anything but attribute edits
    std::vector<std::string> touched_functions(const frontend::SourceUnit& unit) const;
};

/// JSON edit list per the reply schema. InvalidEdit on schema violations.
std::vector<Edit> edits_from_json(const std::string& json_text);
std::string edits_to_json(const std::vector<Edit>& edits);

/// Applies every edit to the canonical form of `unit` or throws EditConflict;
/// never returns a partially edited unit. Split lines refer to the canonical
/// rendering of the input.
frontend::SourceUnit apply_edits(const frontend::SourceUnit& unit, const EditSet& edits);

/// First and last canonical line of each top-level statement of a function.
struct StmtLines {
    int first = 0;
    int last = 0;
};
std::vector<StmtLines> statement_lines(const frontend::FunctionDecl& fn);

/// Recovers retype, rename and split edits by comparing a rewritten snippet
/// with the unit. The snippet may hold whole functions or statement subsets.
EditSet diff_edits(const frontend::SourceUnit& unit, const std::string& rewritten, const std::string& scope = {});

} // namespace dsol::edits
