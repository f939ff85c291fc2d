#include "dsol/dg/builtins.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

namespace dsol::dg {

using types::SolType;
using json = nlohmann::json;

#ifndef DSOL_DATA_DIR
#define DSOL_DATA_DIR "data"
#endif

types::SolType BuiltinSignature::callable() const {
    return SolType::callable(variadic ? std::vector<SolType>{} : params, ret.value_or(SolType::tuple({})));
}

namespace {

SolType checked_type(const std::string& spelling, const std::string& where) {
    SolType t = types::parse_type(spelling);
    if (!types::is_known_type_spelling(spelling)) throw DataError("builtins: bad type '" + spelling + "' at " + where);
    return t;
}

BuiltinSignature signature(const json& j, const std::string& where) {
    BuiltinSignature s;
    s.variadic = j.value("variadic", false);
    if (j.contains("params"))
        for (const auto& p : j.at("params")) s.params.push_back(checked_type(p.get<std::string>(), where));
    if (j.contains("returns")) s.ret = checked_type(j.at("returns").get<std::string>(), where);
    return s;
}

} // namespace

BuiltinTable BuiltinTable::parse(const std::string& text) {
    BuiltinTable t;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("builtins: ") + e.what());
    }
    if (!j.is_object()) throw DataError("builtins: top level must be an object");
    t.version_ = j.value("version", 0);
    try {
    const json functions = j.value("functions", json::object());
    for (const auto& [name, sig] : functions.items())
        t.functions_[name] = signature(sig, "functions." + name);
    const json methods = j.value("methods", json::object());
    for (const auto& [name, sig] : methods.items())
        t.methods_[name] = signature(sig, "methods." + name);
    const json environment = j.value("environment", json::object());
    for (const auto& [name, ty] : environment.items())
        t.environment_[name] = checked_type(ty.get<std::string>(), "environment." + name);
    const json members = j.value("members", json::object());
    for (const auto& [name, ty] : members.items())
        t.members_[name] = checked_type(ty.get<std::string>(), "members." + name);
    } catch (const json::exception& e) {
        throw DataError(std::string("builtins: ") + e.what());
    }
    return t;
}

BuiltinTable BuiltinTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const BuiltinTable& BuiltinTable::defaults() {
    static const BuiltinTable table = load(data_dir() + "/builtins.json");
    return table;
}

const BuiltinSignature* BuiltinTable::function(const std::string& name) const {
    auto it = functions_.find(name);
    return it == functions_.end() ? nullptr : &it->second;
}

const BuiltinSignature* BuiltinTable::method(const std::string& name) const {
    auto it = methods_.find(name);
    return it == methods_.end() ? nullptr : &it->second;
}

std::optional<SolType> BuiltinTable::environment(const std::string& name) const {
    auto it = environment_.find(name);
    if (it == environment_.end()) return std::nullopt;
    return it->second;
}

std::optional<SolType> BuiltinTable::member(const std::string& name) const {
    auto it = members_.find(name);
    if (it == members_.end()) return std::nullopt;
    return it->second;
}

std::string data_dir() {
    if (const char* env = std::getenv("DSOL_DATA_DIR"); env && *env) return env;
    return DSOL_DATA_DIR;
}

std::optional<SolType> conversion_type(const std::string& callee) {
    if (!types::is_known_type_spelling(callee)) return std::nullopt;
    SolType t = types::parse_type(callee);
    if (!t.is_elementary()) return std::nullopt;
    return t;
}

SolType literal_type(const frontend::IRValue& v) {
    using frontend::ValueKind;
    switch (v.kind) {
    case ValueKind::Bool: return SolType::boolean();
    case ValueKind::Str: return SolType::string();
    case ValueKind::Const: {
        if (v.hex) {
            std::size_t digits = v.name.size() - 2;
            if (digits % 2 == 0 && digits >= 2 && digits <= 64) return SolType::fixed_bytes(static_cast<unsigned>(digits / 2));
        }
        unsigned bits = 8;
        while (bits < 256 && v.value > word_mask(bits)) bits += 8;
        return SolType::uint(bits);
    }
    default: return SolType::unknown();
    }
}

} // namespace dsol::dg
