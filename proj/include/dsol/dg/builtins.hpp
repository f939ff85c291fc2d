#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsol/frontend/ir.hpp"
#include "dsol/types/soltype.hpp"

namespace dsol::dg {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BuiltinSignature {
    std::vector<types::SolType> params;
    bool variadic = false;
    std::optional<types::SolType> ret;

    /// Callable type of the builtin; Unknown parameters when variadic.
    types::SolType callable() const;
};

/// Predefined functions, environment values and members, loaded from the
/// versioned builtins data file.
class BuiltinTable {
public:
    static BuiltinTable load(const std::string& path);
    static BuiltinTable parse(const std::string& json_text);
    /// Loaded once from data_dir()/builtins.json.
    static const BuiltinTable& defaults();

    int version() const { return version_; }
    const BuiltinSignature* function(const std::string& name) const;
    const BuiltinSignature* method(const std::string& name) const;
    std::optional<types::SolType> environment(const std::string& name) const;
    std::optional<types::SolType> member(const std::string& name) const;

private:
    int version_ = 0;
    std::map<std::string, BuiltinSignature> functions_;
    std::map<std::string, BuiltinSignature> methods_;
    std::map<std::string, types::SolType> environment_;
    std::map<std::string, types::SolType> members_;
};

/// Directory holding builtins.json and templates.json: $DSOL_DATA_DIR when set,
/// otherwise the path fixed at build time.
std::string data_dir();

/// Target type of an explicit conversion call such as uint256(x), if the callee
/// names an elementary type.
std::optional<types::SolType> conversion_type(const std::string& callee);

/// Type of a literal by its shape: smallest fitting uint for decimals, bytesN
/// for hex literals with 2N digits, bool, string.
types::SolType literal_type(const frontend::IRValue& v);

} // namespace dsol::dg
