#include "dsol/types/soltype.hpp"

#include <cctype>
#include <stdexcept>

namespace dsol::types {

std::string family_set_str(FamilySet set) {
    static const std::pair<FamilySet, const char*> names[] = {
        {family::Bool, "bool"},       {family::Int, "int"},       {family::Address, "address"},
        {family::Byte, "byte"},       {family::Bytes, "bytes"},   {family::String, "str"},
        {family::Array, "Array"},     {family::Mapping, "Mapping"}, {family::Tuple, "Tuple"},
        {family::Callable, "Callable"},
    };
    std::string out = "{";
    bool first = true;
    for (const auto& [bit, name] : names) {
        if (set & bit) {
            if (!first) out += ",";
            out += name;
            first = false;
        }
    }
    return out + "}";
}

SolType SolType::boolean() {
    SolType t;
    t.kind_ = Kind::Bool;
    return t;
}

SolType SolType::uint(unsigned bits) {
    if (bits == 0 || bits > 256 || bits % 8 != 0) throw std::invalid_argument("bad uint width");
    SolType t;
    t.kind_ = Kind::Int;
    t.bits_ = bits;
    return t;
}

SolType SolType::sint(unsigned bits) {
    SolType t = uint(bits);
    t.flag_ = true;
    return t;
}

SolType SolType::address(bool payable) {
    SolType t;
    t.kind_ = Kind::Address;
    t.flag_ = payable;
    return t;
}

SolType SolType::fixed_bytes(unsigned length) {
    if (length == 0 || length > 32) throw std::invalid_argument("bad bytesN length");
    SolType t;
    t.kind_ = Kind::FixedBytes;
    t.bits_ = length;
    return t;
}

SolType SolType::dyn_bytes() {
    SolType t;
    t.kind_ = Kind::DynBytes;
    return t;
}

SolType SolType::string() {
    SolType t;
    t.kind_ = Kind::String;
    return t;
}

SolType SolType::array(SolType element, std::optional<std::uint64_t> length) {
    SolType t;
    t.kind_ = Kind::Array;
    t.array_length_ = length;
    t.children_.push_back(std::move(element));
    return t;
}

SolType SolType::mapping(SolType key, SolType value) {
    SolType t;
    t.kind_ = Kind::Mapping;
    t.children_.push_back(std::move(key));
    t.children_.push_back(std::move(value));
    return t;
}

SolType SolType::tuple(std::vector<SolType> members) {
    SolType t;
    t.kind_ = Kind::Tuple;
    t.children_ = std::move(members);
    return t;
}

SolType SolType::callable(std::vector<SolType> params, SolType ret) {
    SolType t;
    t.kind_ = Kind::Callable;
    t.children_ = std::move(params);
    t.children_.push_back(std::move(ret));
    return t;
}

SolType SolType::unknown(std::string spelling) {
    SolType t;
    t.spelling_ = std::move(spelling);
    return t;
}

SolType SolType::unknown_in(FamilySet constraint) {
    if (constraint == 0) return bottom();
    SolType t;
    t.constraint_ = constraint & family::All;
    return t;
}

SolType SolType::bottom() {
    SolType t;
    t.kind_ = Kind::Bottom;
    t.constraint_ = 0;
    return t;
}

std::vector<SolType> SolType::params() const {
    if (kind_ != Kind::Callable) return {};
    return {children_.begin(), children_.end() - 1};
}

FamilySet SolType::family() const {
    switch (kind_) {
    case Kind::Bool: return family::Bool;
    case Kind::Int: return family::Int;
    case Kind::Address: return family::Address;
    case Kind::FixedBytes: return family::Byte;
    case Kind::DynBytes: return family::Bytes;
    case Kind::String: return family::String;
    case Kind::Array: return family::Array;
    case Kind::Mapping: return family::Mapping;
    case Kind::Tuple: return family::Tuple;
    case Kind::Callable: return family::Callable;
    case Kind::Unknown: return constraint_;
    case Kind::Bottom: return 0;
    }
    return 0;
}

bool SolType::is_elementary() const {
    switch (kind_) {
    case Kind::Bool:
    case Kind::Int:
    case Kind::Address:
    case Kind::FixedBytes:
    case Kind::DynBytes:
    case Kind::String: return true;
    default: return false;
    }
}

std::string SolType::str() const {
    switch (kind_) {
    case Kind::Bool: return "bool";
    case Kind::Int: return (flag_ ? "int" : "uint") + std::to_string(bits_);
    case Kind::Address: return flag_ ? "address payable" : "address";
    case Kind::FixedBytes: return "bytes" + std::to_string(bits_);
    case Kind::DynBytes: return "bytes";
    case Kind::String: return "string";
    case Kind::Array:
        return element().str() + "[" + (array_length_ ? std::to_string(*array_length_) : "") + "]";
    case Kind::Mapping: return "mapping(" + key().str() + "=>" + value().str() + ")";
    case Kind::Tuple: {
        std::string out = "tuple(";
        for (std::size_t i = 0; i < children_.size(); ++i) {
            if (i) out += ",";
            out += children_[i].str();
        }
        return out + ")";
    }
    case Kind::Callable: {
        std::string out = "function(";
        for (std::size_t i = 0; i + 1 < children_.size(); ++i) {
            if (i) out += ",";
            out += children_[i].str();
        }
        return out + ") returns (" + ret().str() + ")";
    }
    case Kind::Unknown:
        if (!spelling_.empty()) return spelling_;
        if (constraint_ != family::All) return "unknown" + family_set_str(constraint_);
        return "unknown";
    case Kind::Bottom: return "bottom";
    }
    return "unknown";
}

bool operator==(const SolType& a, const SolType& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
    case Kind::Int: return a.bits_ == b.bits_ && a.flag_ == b.flag_;
    case Kind::Address: return a.flag_ == b.flag_;
    case Kind::FixedBytes: return a.bits_ == b.bits_;
    case Kind::Array: return a.array_length_ == b.array_length_ && a.children_ == b.children_;
    case Kind::Mapping:
    case Kind::Tuple:
    case Kind::Callable: return a.children_ == b.children_;
    case Kind::Unknown: return a.constraint_ == b.constraint_;
    default: return true;
    }
}

namespace {

class TypeParser {
public:
    explicit TypeParser(std::string_view text) : text_(text) {}

    std::optional<SolType> parse_full() {
        auto t = parse_type_expr();
        if (!t) return std::nullopt;
        skip_ws();
        // data location suffixes
        for (;;) {
            auto save = pos_;
            auto word = ident();
            if (word == "memory" || word == "storage" || word == "calldata") {
                skip_ws();
                continue;
            }
            pos_ = save;
            break;
        }
        skip_ws();
        if (pos_ != text_.size()) return std::nullopt;
        return t;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(std::string_view s) {
        skip_ws();
        if (text_.substr(pos_, s.size()) == s) {
            pos_ += s.size();
            return true;
        }
        return false;
    }

    std::string_view ident() {
        skip_ws();
        auto start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return text_.substr(start, pos_ - start);
    }

    static std::optional<unsigned> number_suffix(std::string_view word, std::string_view prefix) {
        if (word.substr(0, prefix.size()) != prefix) return std::nullopt;
        auto digits = word.substr(prefix.size());
        if (digits.empty() || digits.size() > 3) return std::nullopt;
        unsigned n = 0;
        for (char c : digits) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            n = n * 10 + static_cast<unsigned>(c - '0');
        }
        if (digits[0] == '0') return std::nullopt;
        return n;
    }

    std::optional<SolType> elementary(std::string_view word) {
        if (word == "bool") return SolType::boolean();
        if (word == "string") return SolType::string();
        if (word == "bytes") return SolType::dyn_bytes();
        if (word == "byte") return SolType::fixed_bytes(1);
        if (word == "uint") return SolType::uint(256);
        if (word == "int") return SolType::sint(256);
        if (word == "address") {
            auto save = pos_;
            if (ident() == "payable") return SolType::address(true);
            pos_ = save;
            return SolType::address(false);
        }
        if (auto n = number_suffix(word, "uint"); n && *n % 8 == 0 && *n <= 256) return SolType::uint(*n);
        if (auto n = number_suffix(word, "int"); n && *n % 8 == 0 && *n <= 256) return SolType::sint(*n);
        if (auto n = number_suffix(word, "bytes"); n && *n >= 1 && *n <= 32) return SolType::fixed_bytes(*n);
        return std::nullopt;
    }

    std::optional<std::vector<SolType>> type_list() {
        std::vector<SolType> out;
        if (eat(")")) return out;
        for (;;) {
            auto t = parse_type_expr();
            if (!t) return std::nullopt;
            out.push_back(std::move(*t));
            if (eat(")")) return out;
            if (!eat(",")) return std::nullopt;
        }
    }

    std::optional<SolType> parse_base() {
        auto word = ident();
        if (word.empty()) return std::nullopt;
        if (word == "mapping") {
            if (!eat("(")) return std::nullopt;
            auto key = parse_type_expr();
            if (!key || !key->is_elementary()) return std::nullopt;
            if (!eat("=>")) return std::nullopt;
            auto value = parse_type_expr();
            if (!value || !eat(")")) return std::nullopt;
            return SolType::mapping(std::move(*key), std::move(*value));
        }
        if (word == "tuple") {
            if (!eat("(")) return std::nullopt;
            auto members = type_list();
            if (!members) return std::nullopt;
            return SolType::tuple(std::move(*members));
        }
        if (word == "function") {
            if (!eat("(")) return std::nullopt;
            auto params = type_list();
            if (!params) return std::nullopt;
            SolType ret = SolType::tuple({});
            auto save = pos_;
            if (ident() == "returns") {
                if (!eat("(")) return std::nullopt;
                auto r = parse_type_expr();
                if (!r || !eat(")")) return std::nullopt;
                ret = std::move(*r);
            } else {
                pos_ = save;
            }
            return SolType::callable(std::move(*params), std::move(ret));
        }
        return elementary(word);
    }

    std::optional<SolType> parse_type_expr() {
        auto base = parse_base();
        if (!base) return std::nullopt;
        while (eat("[")) {
            skip_ws();
            if (eat("]")) {
                base = SolType::array(std::move(*base));
                continue;
            }
            std::uint64_t n = 0;
            bool any = false;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                n = n * 10 + static_cast<std::uint64_t>(text_[pos_] - '0');
                ++pos_;
                any = true;
            }
            if (!any || !eat("]")) return std::nullopt;
            base = SolType::array(std::move(*base), n);
        }
        return base;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

SolType parse_type(std::string_view text) {
    TypeParser p(text);
    if (auto t = p.parse_full()) return *t;
    auto spelled = trim(text);
    return SolType::unknown(spelled);
}

bool is_known_type_spelling(std::string_view text) {
    TypeParser p(text);
    return p.parse_full().has_value();
}

const std::vector<std::string>& elementary_type_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out{"bool"};
        for (unsigned w = 8; w <= 256; w += 8) out.push_back("uint" + std::to_string(w));
        for (unsigned w = 8; w <= 256; w += 8) out.push_back("int" + std::to_string(w));
        out.push_back("address");
        out.push_back("address payable");
        for (unsigned n = 1; n <= 32; ++n) out.push_back("bytes" + std::to_string(n));
        out.push_back("bytes");
        out.push_back("string");
        return out;
    }();
    return names;
}

} // namespace dsol::types
