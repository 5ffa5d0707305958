// Independent low-filtration Ext oracle via the reduced cobar complex of the
// dual Hopf algebra.
//
// The dual is polynomial on generators xi_1, xi_2, ... with deg xi_i =
// 2^i - 1; the degree-d monomial basis is indexed exactly like the Milnor
// basis of the algebra itself (the exponent tuple of a monomial is the
// r-tuple of the dual basis element). The coproduct is defined from scratch
// by psi(xi_k) = sum_i xi_{k-i}^{2^i} (x) xi_i extended multiplicatively, so
// this path shares no product code with the resolution engine.
//
// Cell modules are dualized by transposing the action: the coaction of the
// dual cell y_n lists xi^r (x) y_m whenever Sq(r) x_m has coefficient 1 on
// x_n. Cotor of the result computes the same Ext groups as a minimal
// resolution, giving an independent cross-check in low filtration.
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bext/milnor.hpp"
#include "bext/module.hpp"

namespace bext::cobar {

// Monomials of the dual algebra in degree d, indexed like milnor_basis(d);
// entry i has exponent tuple milnor_basis(d)[i].r.
std::string dual_to_string(const steenrod::MilnorSq& exponents);

// One term xi^a (x) xi^b of a coproduct, identified by (degree, index) on
// each side; unit factors have degree 0.
struct TensorPair {
    int dl, il, dr, ir;
    auto operator<=>(const TensorPair&) const = default;
};

// Full coproduct of the degree-d dual basis element with index i, as a
// sorted list of tensor terms (all coefficients are 1 over F2). Memoized;
// counit and coassociativity are verified on first use of each degree.
const std::vector<TensorPair>& coproduct(int d, int i);

// One term xi^r (x) y_cell of a dual-cell coaction.
struct CoactionTerm {
    int da, ia;  // degree and index of the algebra factor (0,0 = unit term)
    int cell;
    auto operator<=>(const CoactionTerm&) const = default;
};

// Left coaction of the dual basis element y_n of the dual comodule of m,
// including the unit term 1 (x) y_n, sorted.
std::vector<CoactionTerm> coaction(const mod::GradedModule& m, int n);

struct CobarExt {
    int s_cap = 0, t_cap = 0;
    std::map<std::pair<int, int>, int> dims;  // zero entries omitted
    // Cocycle representatives for filtrations 0 and 1, printed as
    // "xi1^2 [y3]"-style cobar words (one sum of words per homology basis
    // vector). Higher filtrations omit representatives: only the dimensions
    // are contractual there.
    std::map<std::pair<int, int>, std::vector<std::string>> reps;
    int dim(int s, int t) const;
};

// Ext^{s,t} dimensions for s <= s_cap, t <= t_cap from the reduced cobar
// complex. Hard caps: s_cap <= 3 and t_cap <= 14; calls beyond the caps are
// refused with std::invalid_argument (the complex grows too fast for more,
// and the caps are part of this oracle's contract). The differential is
// verified to square to zero on every run.
CobarExt cobar_ext(const mod::ModulePtr& m, int s_cap, int t_cap);

}  // namespace bext::cobar
