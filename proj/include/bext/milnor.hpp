// Mod-2 Steenrod algebra in the Milnor basis.
//
// A Milnor basis element Sq(r1,...,rk) is stored with trailing zeros
// stripped; the empty tuple is the unit. Degree is sum r_i * (2^i - 1).
// Products are computed by enumerating Milnor matrices and are returned as
// coefficient vectors over the lex-ordered basis of the product degree.
#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "bext/f2.hpp"

namespace bext::steenrod {

struct MilnorSq {
    std::vector<unsigned> r;  // exponents, trailing zeros stripped

    MilnorSq() = default;
    explicit MilnorSq(std::vector<unsigned> rr);

    int degree() const;
    bool is_unit() const { return r.empty(); }
    std::string to_string() const;  // "Sq(3)", "Sq(0,1)", "1"

    bool operator==(const MilnorSq& o) const { return r == o.r; }
    bool operator<(const MilnorSq& o) const { return r < o.r; }
};

// All Milnor basis elements of degree d, lexicographically ordered.
// The reference is stable for the lifetime of the process.
const std::vector<MilnorSq>& milnor_basis(int d);

// Dimension of the algebra in degree d.
int milnor_dim(int d);

// Position of m inside milnor_basis(m.degree()).
int milnor_index(const MilnorSq& m);

// Product of two basis elements, as a coefficient vector over
// milnor_basis(a.degree() + b.degree()).
f2::BitVector milnor_product(const MilnorSq& a, const MilnorSq& b);

// Memoizing product table. Thread safe; products are filled lazily but the
// basis tables can be warmed eagerly up to a degree bound.
class AlgebraTable {
public:
    static AlgebraTable& instance();

    // Ensure basis tables exist for all degrees <= d_max.
    void precompute(int d_max);

    // Product of basis elements (da, ia) * (db, ib) over basis(da+db).
    f2::BitVector product(int da, int ia, int db, int ib);

    // Same lookup, but returns a reference into the table. Entries are never
    // erased, and the map's node addresses are stable, so the reference stays
    // valid for the table's lifetime; callers may cache the pointer.
    const f2::BitVector& product_ref(int da, int ia, int db, int ib);

private:
    AlgebraTable() = default;
    std::mutex mu_;
    std::unordered_map<std::uint64_t, f2::BitVector> cache_;
};

}  // namespace bext::steenrod
