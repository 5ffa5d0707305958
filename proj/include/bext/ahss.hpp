// Algebraic Atiyah-Hirzebruch spectral sequence of the cell filtration of a
// stunted module, over the Ext charts of its cells.
//
// For a cell-span module m with cells ... < n-1 < n < ... the degree
// filtration induces a spectral sequence with
//
//   E_1^{n,s,t} = Ext^{s,t}(S^n)   (one column per cell),
//   d_r : E_r^{n,s,t} -> E_r^{n-r, s+1, t}.
//
// Pages are represented by the image formula: writing W(i,j) for the
// subquotient of m on the cells in [i,j],
//
//   E_r^{n,s,t} = im( Ext^{s,t}(W(n-r+1, n)) -> Ext^{s,t}(W(n, n+r-1)) ),
//
// the map induced by the overlap composite W(n,n+r-1) ->> S^n >-> W(n-r+1,n).
// The page basis is the greedy pivot-column basis of that matrix, so each
// basis class carries a distinguished preimage (a single generator of the
// lower window's chart). The differential is the zig-zag: apply the
// connecting map of
//
//   0 -> W(n-r+1, n) -> W(n-r, n) -> S^{n-r} -> 0
//
// to the preimage, then include the resulting class of the (n-r)-cell into
// the target window W(n-r, n-1) and express it in the target page basis.
// Failure to land in the target page is an internal error, never patched.
//
// All choices reduce to canonical F2 elimination, so pages, differentials,
// names and pair lists are deterministic.
//
// Every d_r with r > top-bottom vanishes (the target cell is below the
// module), so E_{settle} with settle = top-bottom+1 is the E_infinity page;
// its column at cell n is im(Ext(cells<=n part) -> Ext(cells>=n part)), the
// associated graded of the detection filtration below.
#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bext/f2.hpp"
#include "bext/module.hpp"
#include "bext/resolution.hpp"

namespace bext::sseq {

// Minimal-cell detection name of a class x of Ext^{s,t}(m): the smallest
// cell n such that x is hit by Ext of the quotient of m onto its cells <= n,
// decorated with the catalog name of the witness's top-cell image in
// Ext^{s,t}(S^n) (adjusted within the witness's coset so that the image is
// nonzero, which the minimality of n guarantees is possible).
struct Detection {
    int cell = 0;
    std::string name;  // e.g. "h0h2[0]", "1[-1]" (with U+2212 in the suffix)
};

// Detection-naming context for one module: caches the prefix-quotient
// resolutions and induced maps shared by every query against m.
class Detector {
public:
    // Resolutions are fetched at exactly (s_res, t_res); queries must stay
    // at s <= s_res - 1, t <= t_res.
    Detector(mod::ModulePtr m, int s_res, int t_res);

    const mod::ModulePtr& module() const { return m_; }

    // cls: coordinates in the generator basis of Ext^{s,t}(m).
    Detection name_class(int s, int t, const f2::BitVector& cls);

    // The module's own chart dimension (callers size query vectors with it).
    int ext_dim(int s, int t);

private:
    struct Prefix {
        mod::ModulePtr quot;
        std::shared_ptr<const res::Resolution> r_quot;
        std::shared_ptr<const res::Resolution> r_sphere;
        res::ExtMap into_full;  // Ext(prefix) -> Ext(m)
        res::ExtMap top_cell;   // Ext(prefix) -> Ext(S^n)
    };
    Prefix& prefix(int n);

    mod::ModulePtr m_;
    int s_res_, t_res_;
    std::shared_ptr<const res::Resolution> r_m_;
    std::map<int, Prefix> prefixes_;
};

// One differential pair (source class killed by mapping onto target class).
struct PairRecord {
    int r = 0;
    int n_src = 0, n_tgt = 0;  // cells; n_tgt = n_src - r
    int s = 0, t = 0;          // source bidegree; target sits at (s+1, t)
    std::string source;        // e.g. "h0h2[0]"
    std::string target;        // e.g. "c0[-6]" (U+2212 in the actual suffix)
};

class Ahss {
public:
    // Query caps: pages and differentials may be asked for s <= s_max
    // (page dimensions additionally at s_max + 1, the differential targets)
    // and t <= t_max. Resolutions are fetched at (s_max + 2, t_max).
    Ahss(mod::ModulePtr m, int s_max, int t_max);

    const mod::ModulePtr& module() const { return m_; }
    int s_max() const { return s_max_; }
    int t_max() const { return t_max_; }

    // First page index at which all differentials are identically zero.
    int settle_page() const { return settle_; }

    // dim E_r^{n,s,t}; r >= settle_page() reports the stable value.
    int dim(int r, int n, int s, int t);
    int einf_dim(int n, int s, int t) { return dim(settle_, n, s, t); }

    // Differential matrix d_r : E_r^{n,s,t} -> E_r^{n-r,s+1,t} in the
    // canonical page bases.
    const f2::BitMatrix& differential(int r, int n, int s, int t);

    // E_1-level data of page basis element j at (r,n,s,t): the class it
    // restricts to on its own cell, and the raw image of its differential on
    // the target cell (coordinates in the sphere charts of cells n, n-r).
    f2::BitVector e1_class(int r, int n, int s, int t, int j);
    f2::BitVector d_image_e1(int r, int n, int s, int t, int j);

    // Catalog-decorated name of a sphere-chart vector on cell n.
    std::string e1_name(int n, int s, int t, const f2::BitVector& v);

    // All differential pairs with r <= r_max, source cell in
    // [src_lo, src_hi], target cell >= tgt_lo, s <= s_hi and module stem
    // t - s <= stem_hi. Sources are paired greedily page by page: on each
    // page the pivot columns of each differential matrix pair off with their
    // images. Sorted by (stem, s, r, cell).
    std::vector<PairRecord> pairs(int r_max, int src_lo, int src_hi, int tgt_lo,
                                  int s_hi, int stem_hi);

    // Convergence bookkeeping: for every (s,t) with s <= s_max,
    // bottom <= t <= t_max, compare sum_n dim E_inf^{n,s,t} with
    // dim Ext^{s,t}(m). Returns one report line per mismatch.
    std::vector<std::string> convergence_report();

private:
    struct WindowCtx {
        mod::ModulePtr lower, upper;  // W(n-r+1, n), W(n, n+r-1)
        std::shared_ptr<const res::Resolution> r_lower, r_upper;
        std::shared_ptr<const res::Resolution> r_sphere;  // S^n
        res::ExtMap overlap;   // Ext(lower) -> Ext(upper)
        res::ExtMap top_cell;  // Ext(lower) -> Ext(S^n)
        res::ExtMap include;   // Ext(S^n) -> Ext(upper)
        // Connecting data of 0 -> lower -> W(n-r, n) -> S^{n-r} -> 0;
        // absent when cell n-r is not in the module.
        bool has_delta = false;
        res::ExtMap delta;  // Ext^{s,t}(lower) -> Ext^{s+1,t}(S^{n-r})
    };

    struct PageData {
        int dim = 0;
        std::vector<int> pivot_cols;       // preimage generators
        std::optional<f2::AugSpan> coords;  // ambient -> page-basis solver
    };

    WindowCtx& window(int n, int r);
    WindowCtx& window_with_delta(int n, int r);
    PageData& page(int r, int n, int s, int t);

    mod::ModulePtr m_;
    int s_max_, t_max_, s_res_, t_res_, settle_;
    std::map<std::pair<int, int>, WindowCtx> windows_;       // (n, r)
    std::map<std::array<int, 4>, PageData> pages_;           // (r, n, s, t)
    std::map<std::array<int, 4>, f2::BitMatrix> diffs_;      // (r, n, s, t)
};

// Convenience wrapper for single naming queries (tests, small callers).
Detection detection_name(const mod::ModulePtr& m, int s, int t,
                         const f2::BitVector& cls, int s_res, int t_res);

}  // namespace bext::sseq
