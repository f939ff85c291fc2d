#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace dsol {

/// EVM word: unsigned 256-bit integer with wrap-around arithmetic.
using Word = boost::multiprecision::uint256_t;

/// Parses a decimal or 0x-prefixed hex literal, reducing it modulo 2^256.
std::optional<Word> parse_word(std::string_view text);

std::string word_hex(const Word& w);   // 0x-prefixed, minimal digits
std::string word_smt(const Word& w);   // #x followed by 64 hex digits
std::string word_dec(const Word& w);

Word word_mask(unsigned bits);         // low `bits` bits set
Word sign_extend(const Word& w, unsigned bits);
bool word_negative(const Word& w);     // top bit set

} // namespace dsol
