// Minimal free resolutions over the Steenrod algebra, Ext charts, induced
// maps (chain lifts), connecting maps of short exact sequences (horseshoe
// perturbation), and Yoneda multiplication operators.
//
// Conventions:
//  * F_s is free on generators named "g{s}_{t}_{i}" (t = internal degree,
//    i = ordinal within the bidegree); generator counts equal dim Ext^{s,t}.
//  * The degree-t slice of F_s has the canonical basis (gen, Milnor element)
//    ordered by generator then Milnor index; all matrices use that layout.
//  * A module map f: M -> N induces Ext(N) -> Ext(M) (contravariant); the
//    ExtMap matrix at (s,t) has rows indexed by R_M generators and columns by
//    R_N generators.
//  * All kernel/solve choices are canonical, so resolutions, lifts and
//    connecting maps are bit-for-bit deterministic.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bext/f2.hpp"
#include "bext/module.hpp"

namespace bext::res {

struct Generator {
    int t;        // internal degree
    int ordinal;  // index within (s,t)
};

// Element of a free level: sparse sum of (generator index at that level,
// Milnor coefficient vector in degree t_elt - t_gen).
struct FreeElement {
    struct Term {
        int gen;               // index into gens(s)
        f2::BitVector coeffs;  // over milnor_basis(deg)
    };
    std::vector<Term> terms;
};

// Canonical basis layout of the degree-t slice of F_s.
struct SliceLayout {
    std::vector<int> gen;     // generator indices with t_gen <= t
    std::vector<int> offset;  // starting column of each generator block
    std::vector<int> block;   // block width = dim A_{t - t_gen}
    int dim = 0;
    int block_of(int gen_index) const;  // position in `gen`, or -1
};

class Resolution {
public:
    Resolution(mod::ModulePtr m, int s_max, int t_max);

    const mod::ModulePtr& module() const { return module_; }
    int s_max() const { return s_max_; }
    int t_max() const { return t_max_; }

    const std::vector<Generator>& gens(int s) const { return gens_[static_cast<std::size_t>(s)]; }
    int gen_count(int s, int t) const;  // dim Ext^{s,t}
    // Generators at (s,t) occupy a contiguous index range; returns its start.
    int gen_start(int s, int t) const;
    std::string gen_name(int s, int gen_index) const;

    SliceLayout layout(int s, int t) const;

    // Differential entry list of generator `gen` of F_s (s >= 1), expressed in
    // level s-1.
    const FreeElement& diff(int s, int gen) const;
    // Augmentation target cell of an F_0 generator.
    int aug_cell(int gen) const;

    // Matrix of d_s on the degree-t slice (rows: layout(s-1,t)); for s = 0,
    // the augmentation matrix into the module's degree-t part (0 or 1 row).
    f2::BitMatrix slice_matrix(int s, int t) const;

    // Apply the differential to an arbitrary element of F_s at degree t.
    FreeElement apply_diff(int s, int t, const FreeElement& x) const;

    // Serialization used by the disk cache.
    void serialize(std::vector<std::uint8_t>& out) const;
    static std::unique_ptr<Resolution> deserialize(mod::ModulePtr m, int s_max, int t_max,
                                                   const std::vector<std::uint8_t>& in);

private:
    Resolution(mod::ModulePtr m, int s_max, int t_max, bool build);
    void build();

    mod::ModulePtr module_;
    int s_max_, t_max_;
    std::vector<std::vector<Generator>> gens_;          // per s
    std::vector<std::vector<FreeElement>> diffs_;       // per s >= 1, per gen
    std::vector<int> aug_cells_;                        // per F_0 gen
};

struct ExtChart {
    int s_max = 0, t_max = 0;
    std::map<std::pair<int, int>, int> dims;  // keyed (s,t), zero omitted
    int dim(int s, int t) const;
};
ExtChart chart(const Resolution& r);

// Family of matrices sending classes at a source bidegree (s,t) (columns,
// generators of col_res) to classes at (s+ds, t+dt) (rows, generators of
// row_res). Keys are source bidegrees; `get` synthesizes a correctly sized
// zero matrix for absent keys.
class ExtMap {
public:
    ExtMap() = default;
    ExtMap(const Resolution* row_res, const Resolution* col_res, int ds = 0, int dt = 0)
        : rows_(row_res), cols_(col_res), ds_(ds), dt_(dt) {}
    const Resolution* row_res() const { return rows_; }
    const Resolution* col_res() const { return cols_; }
    int ds() const { return ds_; }
    int dt() const { return dt_; }
    void set(int s, int t, f2::BitMatrix m);
    f2::BitMatrix get(int s, int t) const;
    const std::map<std::pair<int, int>, f2::BitMatrix>& raw() const { return mats_; }

private:
    const Resolution* rows_ = nullptr;
    const Resolution* cols_ = nullptr;
    int ds_ = 0, dt_ = 0;
    std::map<std::pair<int, int>, f2::BitMatrix> mats_;
};

// Ext(N) -> Ext(M) induced by f: M -> N, via a chain lift F(M) -> F(N).
// Matrix rows index r_m generators, columns r_n generators; ds = dt = 0.
ExtMap induced_map(const mod::ModuleMap& f, const Resolution& r_m, const Resolution& r_n);

// Connecting map family delta: Ext^{s,t}(sub) -> Ext^{s+1,t}(quot) of a cell
// split, built from the horseshoe perturbation of the two outer resolutions
// (ds = 1, dt = 0). Requires r_quot resolved one homological degree beyond
// the largest s the caller will query.
ExtMap connecting(const mod::ShortExactSeq& ses, const Resolution& r_sub,
                  const Resolution& r_quot);

// Yoneda (composition-product) action of the dual-basis class of generator
// (s0, t0, ordinal) of a sphere resolution on its own Ext chart:
// Ext^{s,t} -> Ext^{s+s0, t+t0-b} where b is the sphere's cell degree.
ExtMap yoneda_operator(const Resolution& r_sphere, int s0, int t0, int ordinal);

// Composite g . f per source bidegree (shifts add).
ExtMap compose_ext(const ExtMap& g, const ExtMap& f);

}  // namespace bext::res
