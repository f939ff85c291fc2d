#include "dsol/util/word.hpp"

#include <cctype>

namespace dsol {

std::optional<Word> parse_word(std::string_view text) {
    using boost::multiprecision::cpp_int;
    if (text.empty()) return std::nullopt;
    cpp_int value = 0;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        for (char c : text.substr(2)) {
            if (!std::isxdigit(static_cast<unsigned char>(c))) return std::nullopt;
            int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(c) - 'a' + 10;
            value = value * 16 + d;
        }
    } else {
        for (char c : text) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            value = value * 10 + (c - '0');
        }
    }
    cpp_int modulus = cpp_int(1) << 256;
    value %= modulus;
    return static_cast<Word>(value);
}

std::string word_hex(const Word& w) {
    if (w == 0) return "0x0";
    std::string digits;
    Word v = w;
    static const char* hex = "0123456789abcdef";
    while (v != 0) {
        digits.insert(digits.begin(), hex[static_cast<unsigned>(v & 0xf)]);
        v >>= 4;
    }
    return "0x" + digits;
}

std::string word_smt(const Word& w) {
    std::string digits(64, '0');
    Word v = w;
    static const char* hex = "0123456789abcdef";
    for (int i = 63; i >= 0; --i) {
        digits[static_cast<std::size_t>(i)] = hex[static_cast<unsigned>(v & 0xf)];
        v >>= 4;
    }
    return "#x" + digits;
}

std::string word_dec(const Word& w) { return w.str(); }

Word word_mask(unsigned bits) {
    if (bits >= 256) return ~Word(0);
    return (Word(1) << bits) - 1;
}

Word sign_extend(const Word& w, unsigned bits) {
    if (bits >= 256) return w;
    Word low = w & word_mask(bits);
    Word sign = Word(1) << (bits - 1);
    return (low ^ sign) - sign;
}

bool word_negative(const Word& w) { return bit_test(w, 255); }

} // namespace dsol
