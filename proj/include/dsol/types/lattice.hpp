#pragma once

#include <stdexcept>

#include "dsol/types/soltype.hpp"

namespace dsol::types {

class NotIndexable : public std::runtime_error {
public:
    explicit NotIndexable(const SolType& t) : std::runtime_error("type is not indexable: " + t.str()) {}
};

class NotCallable : public std::runtime_error {
public:
    explicit NotCallable(const SolType& t) : std::runtime_error("type is not callable: " + t.str()) {}
};

/// $\theta \wedge \widetilde{\theta}$: t when t belongs to the family set, Bottom otherwise.
/// Unknown narrows to an Unknown constrained to the intersection.
SolType meet(const SolType& t, FamilySet families);

/// Type-with-type meet. Unknown is the identity, equal types meet to themselves,
/// structured types meet component-wise, everything else is Bottom.
SolType meet(const SolType& a, const SolType& b);

/// Common arithmetic type of two numeric operands. Widths widen, signedness must
/// agree. A single Unknown operand yields the other operand.
SolType more_precise(const SolType& a, const SolType& b);

/// Element type of an indexable type; throws NotIndexable.
SolType element_type(const SolType& t);

/// Return type of a callable (Unknown passes through); throws NotCallable.
SolType return_type(const SolType& t);

/// Solidity implicit conversion (assignment compatibility). Unknown on either
/// side is always compatible.
bool implicitly_convertible(const SolType& from, const SolType& to);

} // namespace dsol::types
