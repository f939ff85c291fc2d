#pragma once

#include <iterator>
#include <ostream>
#include <vector>

#include "dsol/typecheck/typecheck.hpp"
#include "dsol/types/lattice.hpp"
#include "dsol/types/soltype.hpp"

namespace testsupport {

using dsol::typecheck::Rule;
using dsol::types::SolType;

struct RuleCase {
    const char* name;
    Rule rule;
    bool accept;
    const char* src;
};

inline const RuleCase kCases[] = {
    {"ConstantFits", Rule::Constant, true, "function f() public { uint8 x = 255; }"},
    {"ConstantTooWide", Rule::Constant, false, "function f() public { uint8 x = 256; }"},
    {"ConstantReturnBool", Rule::Constant, false, "function f() public returns (bool) { return 2; }"},
    {"ShiftInt", Rule::Shift, true, "function f(uint256 a) public returns (uint256) { return a << 2; }"},
    {"ShiftString", Rule::Shift, false, "function f(string a) public { x = a << 2; }"},
    {"NumericWidens", Rule::Numeric, true, "function f(uint8 a, uint256 b) public returns (uint256) { uint256 c = a + b; return c; }"},
    {"NumericSignMismatch", Rule::Numeric, false, "function f(uint8 a, int8 b) public { x = a + b; }"},
    {"NumericAddress", Rule::Numeric, false, "function f(address a) public { x = a + 1; }"},
    {"NumericNarrowDest", Rule::Numeric, false, "function f(uint256 a) public { uint8 c = a * 2; }"},
    {"CompareInts", Rule::Compare, true, "function f(uint256 a, uint8 b) public returns (bool) { bool c = a < b; return c; }"},
    {"CompareBool", Rule::Compare, false, "function f(uint256 a, bool b) public { x = a < b; }"},
    {"CompareMixed", Rule::Compare, false, "function f(uint256 a, bytes32 b) public { x = a >= b; }"},
    {"ArrayHomogeneous", Rule::TupleArray, true, "function f(uint256 a, uint8 b) public { x = [a, b]; }"},
    {"ArrayMixed", Rule::TupleArray, false, "function f(uint256 a, bool b) public { x = [a, b]; }"},
    {"TupleArity", Rule::TupleArray, false, "function f(uint256 a) public returns (uint256, uint256) { return (a); }"},
    {"ComprehensionBytes", Rule::Comprehension, true,
     "function f(bytes a) public { i = 0; while (i < a.length) { x = a[i]; i = i + 1; } }"},
    {"ComprehensionInt", Rule::Comprehension, false,
     "function f(uint256 a) public { i = 0; while (i < a.length) { x = a[i]; i = i + 1; } }"},
    {"BooleanBools", Rule::Boolean, true, "function f(bool a, bool b) public returns (bool) { bool c = a && b; return c; }"},
    {"BooleanInts", Rule::Boolean, false, "function f(uint256 a, bool b) public { c = a || b; }"},
    {"BooleanNot", Rule::Boolean, false, "function f(uint256 a) public { c = !a; }"},
    {"BitAndMask", Rule::Bitwise, true, "function f(uint256 a) public returns (uint256) { return a & 0xff; }"},
    {"BitAndString", Rule::Bitwise, false, "function f(string s, uint256 t) public { z = s & t; }"},
    {"BitXorMixed", Rule::Bitwise, false, "function f(uint256 a, bytes32 b) public { z = a ^ b; }"},
    {"EqAddresses", Rule::Equality, true, "function f(address a) public { require(a == msg.sender); }"},
    {"EqAddressBytes", Rule::Equality, false, "function f(address a, bytes32 b) public { require(a != b); }"},
    {"CallKeccakBytes32", Rule::Call, true, "function f(bytes a) public { bytes32 x = keccak256(a); }"},
    {"CallKeccakUint", Rule::Call, false, "function f(bytes a) public { uint256 x = keccak256(a); }"},
    {"CallArgument", Rule::Call, false, "function f(bytes32 h, address v) public { x = ecrecover(h, v, h, h); }"},
    {"CallReceiver", Rule::Call, false, "function f(uint256 a) public { a.transfer(1); }"},
    {"CallInternal", Rule::Call, false,
     "function g(address a) private returns (address) { return a; }\nfunction f(bool b) public { x = g(b); }"},
    {"SliceMappingKey", Rule::Slice, true,
     "mapping(bytes32 => uint256) m;\nfunction f(bytes32 k) public returns (uint256) { return m[k]; }"},
    {"SliceMappingWrongKey", Rule::Slice, false, "mapping(bytes32 => uint256) m;\nfunction f(bool k) public { m[k] = 1; }"},
    {"SliceNotIndexable", Rule::Slice, false, "function f(uint256 a, uint256 i) public { x = a[i]; }"},
    {"SliceRangeBytes", Rule::Slice, true, "function f(bytes a) public { x = a[1:2]; }"},
    {"SliceRangeInt", Rule::Slice, false, "function f(uint256 a) public { x = a[1:2]; }"},
};


inline std::vector<SolType> variants() {
    return {SolType::boolean(),
            SolType::uint(8),
            SolType::uint(256),
            SolType::sint(128),
            SolType::address(),
            SolType::address(true),
            SolType::fixed_bytes(1),
            SolType::fixed_bytes(32),
            SolType::dyn_bytes(),
            SolType::string(),
            SolType::array(SolType::uint(256)),
            SolType::array(SolType::boolean(), 3),
            SolType::mapping(SolType::fixed_bytes(32), SolType::uint(256)),
            SolType::tuple({SolType::uint(256), SolType::boolean()}),
            SolType::callable({SolType::dyn_bytes()}, SolType::fixed_bytes(32)),
            SolType::unknown(),
            SolType::unknown_in(dsol::types::family::Int | dsol::types::family::Bool),
            SolType::bottom()};
}

inline std::vector<dsol::types::FamilySet> rule_families() {
    namespace f = dsol::types::family;
    return {f::Bool | f::Int,
            f::Int | f::Address | f::Byte | f::Array | f::Tuple,
            f::String | f::Bytes,
            f::Bool | f::Int | f::Byte,
            f::Int | f::Bool,
            f::Callable,
            f::Bool,
            f::All};
}

inline void PrintTo(const RuleCase& c, std::ostream* os) { *os << c.name; }

} // namespace testsupport
