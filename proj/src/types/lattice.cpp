#include "dsol/types/lattice.hpp"

namespace dsol::types {

SolType meet(const SolType& t, FamilySet families) {
    if (t.is_bottom()) return t;
    if (t.is_unknown()) return SolType::unknown_in(t.constraint() & families);
    return (t.family() & families) ? t : SolType::bottom();
}

SolType meet(const SolType& a, const SolType& b) {
    if (a.is_bottom() || b.is_bottom()) return SolType::bottom();
    if (a.is_unknown() && b.is_unknown()) return SolType::unknown_in(a.constraint() & b.constraint());
    if (a.is_unknown()) return meet(b, a.constraint());
    if (b.is_unknown()) return meet(a, b.constraint());
    if (a.kind() != b.kind()) return SolType::bottom();
    switch (a.kind()) {
    case Kind::Array: {
        if (a.array_length() != b.array_length()) return SolType::bottom();
        auto e = meet(a.element(), b.element());
        if (e.is_bottom()) return e;
        return SolType::array(std::move(e), a.array_length());
    }
    case Kind::Mapping: {
        auto k = meet(a.key(), b.key());
        auto v = meet(a.value(), b.value());
        if (k.is_bottom() || v.is_bottom()) return SolType::bottom();
        return SolType::mapping(std::move(k), std::move(v));
    }
    case Kind::Tuple:
    case Kind::Callable: {
        const auto& am = a.members();
        const auto& bm = b.members();
        if (am.size() != bm.size()) return SolType::bottom();
        std::vector<SolType> parts;
        for (std::size_t i = 0; i < am.size(); ++i) {
            auto m = meet(am[i], bm[i]);
            if (m.is_bottom()) return m;
            parts.push_back(std::move(m));
        }
        if (a.kind() == Kind::Tuple) return SolType::tuple(std::move(parts));
        auto ret = std::move(parts.back());
        parts.pop_back();
        return SolType::callable(std::move(parts), std::move(ret));
    }
    default: return a == b ? a : SolType::bottom();
    }
}

SolType more_precise(const SolType& a, const SolType& b) {
    if (a.is_bottom() || b.is_bottom()) return SolType::bottom();
    if (a.is_unknown() && b.is_unknown()) return meet(a, b);
    if (a.is_unknown()) return (a.constraint() & family::Int) && b.kind() == Kind::Int ? b : SolType::bottom();
    if (b.is_unknown()) return (b.constraint() & family::Int) && a.kind() == Kind::Int ? a : SolType::bottom();
    if (a.kind() != Kind::Int || b.kind() != Kind::Int) return SolType::bottom();
    if (a.is_signed() != b.is_signed()) return SolType::bottom();
    return a.width() >= b.width() ? a : b;
}

SolType element_type(const SolType& t) {
    switch (t.kind()) {
    case Kind::Array: return t.element();
    case Kind::DynBytes:
    case Kind::FixedBytes:
    case Kind::String: return SolType::fixed_bytes(1);
    case Kind::Mapping: return t.value();
    default: throw NotIndexable(t);
    }
}

SolType return_type(const SolType& t) {
    if (t.is_unknown()) return SolType::unknown();
    if (t.kind() != Kind::Callable) throw NotCallable(t);
    return t.ret();
}

bool implicitly_convertible(const SolType& from, const SolType& to) {
    if (from.is_bottom() || to.is_bottom()) return false;
    if (from.is_unknown()) return (from.constraint() & to.family()) != 0 || to.is_unknown();
    if (to.is_unknown()) return (to.constraint() & from.family()) != 0;
    if (from == to) return true;
    switch (from.kind()) {
    case Kind::Int:
        return to.kind() == Kind::Int && to.is_signed() == from.is_signed() && to.width() >= from.width();
    case Kind::Address: return to.kind() == Kind::Address && !to.payable();
    case Kind::FixedBytes: return to.kind() == Kind::FixedBytes && to.length() >= from.length();
    case Kind::Array:
        return to.kind() == Kind::Array && to.array_length() == from.array_length() &&
               !meet(from.element(), to.element()).is_bottom();
    case Kind::Mapping:
    case Kind::Tuple:
    case Kind::Callable: return !meet(from, to).is_bottom();
    default: return false;
    }
}

} // namespace dsol::types
