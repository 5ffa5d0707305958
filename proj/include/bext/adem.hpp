// Admissible (Adem) basis of the mod-2 Steenrod algebra, the rewriting of
// arbitrary Sq-words into that basis, and the change of basis to/from the
// Milnor basis.
//
// This side of the algebra is implemented independently of the Milnor-matrix
// product so the two can be checked against each other.
#pragma once

#include <string>
#include <vector>

#include "bext/f2.hpp"

namespace bext::steenrod {

struct AdmissibleSq {
    // Word (a1,...,ak) with a_i >= 2*a_{i+1} and a_k >= 1; empty is the unit.
    std::vector<unsigned> a;

    AdmissibleSq() = default;
    explicit AdmissibleSq(std::vector<unsigned> w) : a(std::move(w)) {}

    int degree() const;
    bool is_unit() const { return a.empty(); }
    std::string to_string() const;  // "Sq^3 Sq^1", "1"

    bool operator==(const AdmissibleSq& o) const { return a == o.a; }
    bool operator<(const AdmissibleSq& o) const { return a < o.a; }
};

// All admissible words of degree d, lexicographically ordered. Stable ref.
const std::vector<AdmissibleSq>& admissible_basis(int d);
int admissible_dim(int d);
int admissible_index(const AdmissibleSq& w);

// Expand an arbitrary word Sq^{w1}...Sq^{wk} (entries >= 0; zeros act as the
// identity) in the admissible basis of its degree, by Adem rewriting.
f2::BitVector adem_expand_word(const std::vector<unsigned>& word);

// Product of two admissible basis elements, in the admissible basis.
f2::BitVector adem_product(const AdmissibleSq& x, const AdmissibleSq& y);

// Change of basis between the admissible and Milnor bases, cached per degree.
class BasisBridge {
public:
    static BasisBridge& instance();

    // Row i is the Milnor-coordinate expansion of admissible element i of
    // degree d. Square and invertible; unitriangular under the pairing
    // (a1,...,ak) <-> (a1-2a2, ..., ak).
    const f2::BitMatrix& admissible_to_milnor(int d);

    // Convert a coefficient vector between the two bases of degree d.
    f2::BitVector to_admissible(int d, const f2::BitVector& milnor_coeffs);
    f2::BitVector to_milnor(int d, const f2::BitVector& admissible_coeffs);

private:
    BasisBridge() = default;
    struct Entry;
    Entry& entry(int d);
};

}  // namespace bext::steenrod
