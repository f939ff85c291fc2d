#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsol::types {

enum class Kind : std::uint8_t {
    Bool,
    Int,
    Address,
    FixedBytes,
    DynBytes,
    String,
    Array,
    Mapping,
    Tuple,
    Callable,
    Unknown,
    Bottom,
};

// One bit per type family; a FamilySet is the $\widetilde{\theta}$ of a typing premise.
using FamilySet = std::uint16_t;
namespace family {
inline constexpr FamilySet Bool = 1u << 0;
inline constexpr FamilySet Int = 1u << 1;
inline constexpr FamilySet Address = 1u << 2;
inline constexpr FamilySet Byte = 1u << 3;  // bytes1..bytes32
inline constexpr FamilySet Bytes = 1u << 4; // dynamic bytes
inline constexpr FamilySet String = 1u << 5;
inline constexpr FamilySet Array = 1u << 6;
inline constexpr FamilySet Mapping = 1u << 7;
inline constexpr FamilySet Tuple = 1u << 8;
inline constexpr FamilySet Callable = 1u << 9;
inline constexpr FamilySet All = (1u << 10) - 1;
} // namespace family

std::string family_set_str(FamilySet set);

/// Structural Solidity type. Unknown is the top of the lattice and may carry a
/// family constraint; Bottom marks a failed meet.
class SolType {
public:
    SolType() = default; // Unknown

    static SolType boolean();
    static SolType uint(unsigned bits = 256);
    static SolType sint(unsigned bits = 256);
    static SolType address(bool payable = false);
    static SolType fixed_bytes(unsigned length);
    static SolType dyn_bytes();
    static SolType string();
    static SolType array(SolType element, std::optional<std::uint64_t> length = std::nullopt);
    static SolType mapping(SolType key, SolType value);
    static SolType tuple(std::vector<SolType> members);
    static SolType callable(std::vector<SolType> params, SolType ret);
    static SolType unknown(std::string spelling = {});
    static SolType unknown_in(FamilySet constraint);
    static SolType bottom();

    Kind kind() const { return kind_; }
    bool is_unknown() const { return kind_ == Kind::Unknown; }
    bool is_bottom() const { return kind_ == Kind::Bottom; }
    bool is_concrete() const { return kind_ != Kind::Unknown && kind_ != Kind::Bottom; }

    unsigned width() const { return bits_; }  // Int
    bool is_signed() const { return flag_; }  // Int
    bool payable() const { return flag_; }    // Address
    unsigned length() const { return bits_; } // FixedBytes
    std::optional<std::uint64_t> array_length() const { return array_length_; }

    const SolType& element() const { return children_.at(0); } // Array
    const SolType& key() const { return children_.at(0); }     // Mapping
    const SolType& value() const { return children_.at(1); }   // Mapping
    const std::vector<SolType>& members() const { return children_; } // Tuple
    std::vector<SolType> params() const;                              // Callable
    const SolType& ret() const { return children_.back(); }           // Callable

    FamilySet constraint() const { return constraint_; } // Unknown only
    const std::string& spelling() const { return spelling_; }

    /// Family bit of a concrete type; the constraint set for Unknown; 0 for Bottom.
    FamilySet family() const;
    bool is_elementary() const;

    std::string str() const;

    friend bool operator==(const SolType& a, const SolType& b);

private:
    Kind kind_ = Kind::Unknown;
    unsigned bits_ = 0;
    bool flag_ = false;
    std::optional<std::uint64_t> array_length_;
    FamilySet constraint_ = family::All;
    std::vector<SolType> children_;
    std::string spelling_;
};

/// Parses a Solidity type spelling. Never fails: anything unrecognised becomes
/// Unknown carrying the original spelling so it renders back unchanged.
/// Aliases are canonicalised (uint -> uint256, int -> int256, byte -> bytes1)
/// and trailing data locations (memory/storage/calldata) are dropped.
SolType parse_type(std::string_view text);

/// True when the spelling names a recognised type (no Unknown anywhere inside).
bool is_known_type_spelling(std::string_view text);

/// Every elementary type name accepted by the parser, in canonical order.
const std::vector<std::string>& elementary_type_names();

} // namespace dsol::types
