// Graded modules over the Steenrod algebra for the stunted projective family.
//
// Every module in this engine is a span of cells x^n (at most one per integer
// degree n) with the universal binomial action Sq^c x^n = C(n,c) x^{n+c},
// restricted to the cell set. Stunted projective models, sphere models,
// column models, dictionary models and all their interval subquotients are
// such spans, so a single representation covers them all.
//
// Maps between such modules ("cellwise" maps) send x^n to a 0/1 multiple of
// the same-degree cell of the target; inclusions of upward-closed cell spans
// and quotients by them are of this form.
#pragma once

#include <memory>
#include <mutex>
#include <map>
#include <string>
#include <vector>

#include "bext/f2.hpp"

namespace bext::mod {

// C(n,k) mod 2 for any integer n and k >= 0. Nonnegative n uses Lucas;
// negative n uses C(n,k) = (-1)^k C(k-n-1,k) and mod 2 drops the sign.
bool binom2(long long n, long long k);

class GradedModule;
using ModulePtr = std::shared_ptr<const GradedModule>;

class GradedModule {
public:
    // Cell span with the binomial action. Cells need not be contiguous.
    static ModulePtr from_cells(std::string name, std::vector<int> cells);
    static ModulePtr sphere(int n);               // "S:n"
    static ModulePtr stunted(int a, int b);       // "P:a:b", cells a..b

    const std::string& name() const { return name_; }
    const std::vector<int>& cells() const { return cells_; }  // ascending
    bool empty() const { return cells_.empty(); }
    int bottom() const { return cells_.front(); }
    int top() const { return cells_.back(); }
    bool has_cell(int n) const;
    int cell_index(int n) const;  // -1 when absent

    // Coefficient of x^{n+c} in Sq^c x^n within the cell set (c >= 1).
    bool sq(int n, int c) const;

    // Coefficient of x^{n+d} in theta * x^n for theta = milnor_basis(d)[idx],
    // via the admissible expansion of theta. Cached per (d, n).
    bool act(int d, int idx, int n) const;

    // All Milnor coefficients at once: bit idx of the result is act(d,idx,n).
    f2::BitVector act_row(int d, int n) const;

    // Subspan on the cells in [lo, hi] (intersected with this cell set).
    ModulePtr interval(int lo, int hi) const;

private:
    GradedModule(std::string name, std::vector<int> cells);
    std::string name_;
    std::vector<int> cells_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<int, int>, f2::BitVector> act_cache_;  // (d,n)
};

// A degree-preserving map of cell spans: x^n |-> coeff[n] * y^n whenever the
// target has cell n. A-linearity over the window is checked on construction.
struct ModuleMap {
    ModulePtr src;
    ModulePtr tgt;
    std::vector<bool> coeff;  // indexed by src cell index

    // The canonical map with coefficient 1 on every cell present in both
    // modules (inclusion, quotient, or overlap composite, depending on the
    // cell sets). Throws if that assignment is not A-linear.
    static ModuleMap cellwise(ModulePtr src, ModulePtr tgt);

    bool maps_cell(int n) const;  // coefficient of x^n -> y^n
};

// Composite g(f(x)) of two cellwise maps.
ModuleMap compose(const ModuleMap& g, const ModuleMap& f);

// Split m at a cutoff: cells >= n form the submodule (upward-closed spans are
// closed under the action), cells < n the quotient.
struct ShortExactSeq {
    ModulePtr sub, mid, quot;
    ModuleMap inclusion;   // sub -> mid
    ModuleMap projection;  // mid -> quot
};
ShortExactSeq cell_sub(ModulePtr m, int cutoff);

// Model families used by the column assembly and the dictionaries.

// Column model for one coweight column: a list of (module, s_shift) whose
// shifted Ext charts assemble the column. For w > 0 a single model (cells
// >= -w with -1 deleted); for w <= 0 the P^infty_{-w} model plus a separate
// S^{-1} summand.
struct ColumnEntry {
    ModulePtr model;
    int s_shift;
};
std::vector<ColumnEntry> column_model(int w, int t_max);

// Dictionary models: variant A = cells {-K..T} minus {-1}; variant B = cells
// {-K..T}.
ModulePtr dictionary_model(char variant, int K, int T);

// CLI mini-grammar: "S:n", "P:a:b", "M:w", "DA:K:T", "DB:K:T".
// Throws std::invalid_argument with a position diagnostic on bad input.
std::vector<ColumnEntry> parse_module_spec(const std::string& spec, int t_max);

}  // namespace bext::mod
