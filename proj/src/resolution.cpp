#include "bext/resolution.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "bext/milnor.hpp"

namespace bext::res {

using steenrod::AlgebraTable;
using steenrod::milnor_dim;

namespace {

template <class F>
void for_bits(const f2::BitVector& v, F&& f) {
    const std::uint64_t* w = v.words();
    for (std::size_t wi = 0; wi < v.word_count(); ++wi) {
        std::uint64_t x = w[wi];
        while (x) {
            f(wi * 64 + static_cast<unsigned>(__builtin_ctzll(x)));
            x &= x - 1;
        }
    }
}

// Lock-free fast path for Milnor products: a per-thread pointer cache into
// the global table. Table entries are never erased, so the pointers stay
// valid for the program's lifetime.
const f2::BitVector& cached_product(int da, int ia, int db, int ib) {
    thread_local std::unordered_map<std::uint64_t, const f2::BitVector*> tl;
    std::uint64_t key = (static_cast<std::uint64_t>(da) << 48) |
                        (static_cast<std::uint64_t>(db) << 32) |
                        (static_cast<std::uint64_t>(ia) << 16) |
                        static_cast<std::uint64_t>(ib);
    auto it = tl.find(key);
    if (it != tl.end()) return *it->second;
    const f2::BitVector& r = AlgebraTable::instance().product_ref(da, ia, db, ib);
    tl.emplace(key, &r);
    return r;
}

// y += theta * e, where theta is the Milnor basis element `itheta` of degree
// `dtheta`, e lives in the degree-`te` slice whose level has generator list
// `tgt_gens`, and y is in the coordinates of `lay` (the degree te+dtheta
// slice of the same level).
void add_scaled(const SliceLayout& lay, const std::vector<Generator>& tgt_gens, int dtheta,
                int itheta, const FreeElement& e, int te, f2::BitVector& y) {
    for (const auto& term : e.terms) {
        if (term.gen < 0 || static_cast<std::size_t>(term.gen) >= lay.gen.size())
            throw std::logic_error("free element term outside slice layout");
        int db = te - tgt_gens[static_cast<std::size_t>(term.gen)].t;
        int off = lay.offset[static_cast<std::size_t>(term.gen)];
        if (dtheta == 0) {
            for_bits(term.coeffs, [&](std::size_t b) { y.xor_bit(off + b); });
        } else {
            for_bits(term.coeffs, [&](std::size_t b) {
                const f2::BitVector& p =
                    cached_product(dtheta, itheta, db, static_cast<int>(b));
                for_bits(p, [&](std::size_t q) { y.xor_bit(off + q); });
            });
        }
    }
}

FreeElement slice_to_free(const SliceLayout& lay, const f2::BitVector& v) {
    FreeElement e;
    for (std::size_t p = 0; p < lay.gen.size(); ++p) {
        f2::BitVector c(static_cast<std::size_t>(lay.block[p]));
        bool nz = false;
        for (int i = 0; i < lay.block[p]; ++i) {
            if (v.get(static_cast<std::size_t>(lay.offset[p] + i))) {
                c.xor_bit(static_cast<std::size_t>(i));
                nz = true;
            }
        }
        if (nz) e.terms.push_back({lay.gen[p], std::move(c)});
    }
    return e;
}

// Transposed matrix of d_s (augmentation for s = 0) on the degree-t slice:
// rows are (generator, Milnor element) pairs of F_s restricted to the first
// `gen_limit` generators, columns the degree-t slice of F_{s-1} (resp. the
// module's degree-t part).
f2::BitMatrix assemble_transposed(const Resolution& r, int s, int t, std::size_t gen_limit) {
    const auto& g = r.gens(s);
    std::size_t jmax = 0, nrows = 0;
    while (jmax < g.size() && jmax < gen_limit && g[jmax].t <= t) {
        nrows += static_cast<std::size_t>(milnor_dim(t - g[jmax].t));
        ++jmax;
    }
    if (s == 0) {
        std::size_t cols = r.module()->has_cell(t) ? 1u : 0u;
        f2::BitMatrix m(nrows, cols);
        if (cols) {
            std::size_t row = 0;
            for (std::size_t j = 0; j < jmax; ++j) {
                int d = t - g[j].t;
                f2::BitVector ar = r.module()->act_row(d, r.aug_cell(static_cast<int>(j)));
                for_bits(ar, [&](std::size_t i) { m.set(row + i, 0, true); });
                row += static_cast<std::size_t>(milnor_dim(d));
            }
        }
        return m;
    }
    SliceLayout tgt = r.layout(s - 1, t);
    f2::BitMatrix m(nrows, static_cast<std::size_t>(tgt.dim));
    std::size_t row = 0;
    for (std::size_t j = 0; j < jmax; ++j) {
        int dtheta = t - g[j].t;
        const FreeElement& e = r.diff(s, static_cast<int>(j));
        int nth = milnor_dim(dtheta);
        for (int ith = 0; ith < nth; ++ith) {
            f2::BitVector rowv(static_cast<std::size_t>(tgt.dim));
            add_scaled(tgt, r.gens(s - 1), dtheta, ith, e, g[j].t, rowv);
            m.set_row(row, rowv);
            ++row;
        }
    }
    return m;
}

constexpr std::size_t kAllGens = std::numeric_limits<std::size_t>::max();

void put_u32(std::vector<std::uint8_t>& o, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) o.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& o, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) o.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
bool get_u32(const std::vector<std::uint8_t>& in, std::size_t& p, std::uint32_t& v) {
    if (p + 4 > in.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[p + i]) << (8 * i);
    p += 4;
    return true;
}
bool get_u64(const std::vector<std::uint8_t>& in, std::size_t& p, std::uint64_t& v) {
    if (p + 8 > in.size()) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[p + i]) << (8 * i);
    p += 8;
    return true;
}

}  // namespace

int SliceLayout::block_of(int gen_index) const {
    // Generators are created in ascending internal degree, so a slice layout
    // is always an index prefix of the level's generator list.
    if (gen_index < 0 || static_cast<std::size_t>(gen_index) >= gen.size()) return -1;
    return gen_index;
}

Resolution::Resolution(mod::ModulePtr m, int s_max, int t_max)
    : Resolution(std::move(m), s_max, t_max, true) {}

Resolution::Resolution(mod::ModulePtr m, int s_max, int t_max, bool do_build)
    : module_(std::move(m)), s_max_(s_max), t_max_(t_max) {
    if (!module_) throw std::invalid_argument("resolution: null module");
    if (s_max_ < 0) throw std::invalid_argument("resolution: negative homological bound");
    gens_.assign(static_cast<std::size_t>(s_max_) + 1, {});
    diffs_.assign(static_cast<std::size_t>(s_max_) + 1, {});
    if (do_build) build();
}

void Resolution::build() {
    if (module_->empty()) return;
    for (int t = module_->bottom(); t <= t_max_; ++t) {
        std::vector<f2::BitVector> ker_prev;
        for (int s = 0; s <= s_max_; ++s) {
            auto& level = gens_[static_cast<std::size_t>(s)];
            f2::BitMatrix dt = assemble_transposed(*this, s, t, level.size());
            const std::size_t tgt_dim = dt.cols();
            const std::size_t nass = dt.rows();
            const std::size_t ncand =
                s == 0 ? (module_->has_cell(t) ? 1u : 0u) : ker_prev.size();
            // One elimination pass: the f parts span the image of the slice
            // differential, the a parts certify dependencies. Certificates of
            // the assembled rows are exactly the slice kernel (new generators
            // added below are independent by construction, so no kernel
            // element can involve them).
            f2::AugSpan span(tgt_dim, nass + ncand);
            std::vector<f2::BitVector> kernel;
            for (std::size_t rr = 0; rr < nass; ++rr) {
                f2::BitVector a(nass + ncand);
                a.xor_bit(rr);
                if (auto k = span.add(dt.row_copy(rr), std::move(a)))
                    kernel.push_back(std::move(*k));
            }
            std::size_t accepted = 0;
            if (s == 0) {
                if (ncand) {
                    f2::BitVector unit(1);
                    unit.xor_bit(0);
                    f2::BitVector a(nass + ncand);
                    a.xor_bit(nass);
                    if (!span.add(std::move(unit), std::move(a))) {
                        level.push_back({t, gen_count(0, t)});
                        aug_cells_.push_back(t);
                        ++accepted;
                    }
                }
            } else {
                SliceLayout tgt = layout(s - 1, t);
                for (std::size_t ci = 0; ci < ker_prev.size(); ++ci) {
                    f2::BitVector a(nass + ncand);
                    a.xor_bit(nass + ci);
                    if (!span.add(ker_prev[ci], std::move(a))) {
                        level.push_back({t, gen_count(s, t)});
                        diffs_[static_cast<std::size_t>(s)].push_back(
                            slice_to_free(tgt, ker_prev[ci]));
                        ++accepted;
                    }
                }
            }
            if (s == s_max_) break;
            // Resize certificates onto the final domain: assembled rows
            // followed by the generators just accepted. Certificate support
            // never reaches the candidate columns (candidates are inserted
            // after all certificates are collected).
            std::vector<f2::BitVector> next;
            next.reserve(kernel.size());
            for (const auto& k : kernel) {
                f2::BitVector v(nass + accepted);
                for_bits(k, [&](std::size_t b) {
                    if (b >= nass)
                        throw std::logic_error("kernel certificate touches a candidate column");
                    v.xor_bit(b);
                });
                next.push_back(std::move(v));
            }
            ker_prev = std::move(next);
        }
    }
}

int Resolution::gen_count(int s, int t) const {
    if (s < 0 || s > s_max_) return 0;
    const auto& g = gens_[static_cast<std::size_t>(s)];
    auto lo = std::lower_bound(g.begin(), g.end(), t,
                               [](const Generator& a, int v) { return a.t < v; });
    auto hi = std::upper_bound(g.begin(), g.end(), t,
                               [](int v, const Generator& a) { return v < a.t; });
    return static_cast<int>(hi - lo);
}

int Resolution::gen_start(int s, int t) const {
    if (s < 0 || s > s_max_) return 0;
    const auto& g = gens_[static_cast<std::size_t>(s)];
    auto lo = std::lower_bound(g.begin(), g.end(), t,
                               [](const Generator& a, int v) { return a.t < v; });
    return static_cast<int>(lo - g.begin());
}

std::string Resolution::gen_name(int s, int gen_index) const {
    const Generator& g = gens_.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(gen_index));
    return "g" + std::to_string(s) + "_" + std::to_string(g.t) + "_" + std::to_string(g.ordinal);
}

SliceLayout Resolution::layout(int s, int t) const {
    SliceLayout l;
    const auto& g = gens_.at(static_cast<std::size_t>(s));
    for (std::size_t j = 0; j < g.size() && g[j].t <= t; ++j) {
        int width = milnor_dim(t - g[j].t);
        l.gen.push_back(static_cast<int>(j));
        l.offset.push_back(l.dim);
        l.block.push_back(width);
        l.dim += width;
    }
    return l;
}

const FreeElement& Resolution::diff(int s, int gen) const {
    if (s < 1 || s > s_max_) throw std::invalid_argument("diff: level out of range");
    return diffs_.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(gen));
}

int Resolution::aug_cell(int gen) const {
    return aug_cells_.at(static_cast<std::size_t>(gen));
}

f2::BitMatrix Resolution::slice_matrix(int s, int t) const {
    return f2::transpose(assemble_transposed(*this, s, t, kAllGens));
}

FreeElement Resolution::apply_diff(int s, int t, const FreeElement& x) const {
    if (s < 1 || s > s_max_) throw std::invalid_argument("apply_diff: level out of range");
    SliceLayout tgt = layout(s - 1, t);
    f2::BitVector y(static_cast<std::size_t>(tgt.dim));
    const auto& g = gens_[static_cast<std::size_t>(s)];
    for (const auto& term : x.terms) {
        int tj = g.at(static_cast<std::size_t>(term.gen)).t;
        const FreeElement& e = diff(s, term.gen);
        for_bits(term.coeffs, [&](std::size_t ith) {
            add_scaled(tgt, gens_[static_cast<std::size_t>(s - 1)], t - tj,
                       static_cast<int>(ith), e, tj, y);
        });
    }
    return slice_to_free(tgt, y);
}

void Resolution::serialize(std::vector<std::uint8_t>& out) const {
    put_u32(out, static_cast<std::uint32_t>(s_max_) + 1);
    for (int s = 0; s <= s_max_; ++s) {
        const auto& g = gens_[static_cast<std::size_t>(s)];
        put_u32(out, static_cast<std::uint32_t>(g.size()));
        for (const auto& gen : g) put_u32(out, static_cast<std::uint32_t>(gen.t));
    }
    put_u32(out, static_cast<std::uint32_t>(aug_cells_.size()));
    for (int c : aug_cells_) put_u32(out, static_cast<std::uint32_t>(c));
    for (int s = 1; s <= s_max_; ++s) {
        for (const auto& e : diffs_[static_cast<std::size_t>(s)]) {
            put_u32(out, static_cast<std::uint32_t>(e.terms.size()));
            for (const auto& term : e.terms) {
                put_u32(out, static_cast<std::uint32_t>(term.gen));
                put_u32(out, static_cast<std::uint32_t>(term.coeffs.size()));
                for (std::size_t wi = 0; wi < term.coeffs.word_count(); ++wi)
                    put_u64(out, term.coeffs.words()[wi]);
            }
        }
    }
}

std::unique_ptr<Resolution> Resolution::deserialize(mod::ModulePtr m, int s_max, int t_max,
                                                    const std::vector<std::uint8_t>& in) {
    auto r = std::unique_ptr<Resolution>(new Resolution(std::move(m), s_max, t_max, false));
    std::size_t p = 0;
    std::uint32_t levels = 0;
    if (!get_u32(in, p, levels) || levels != static_cast<std::uint32_t>(s_max) + 1) return nullptr;
    for (int s = 0; s <= s_max; ++s) {
        std::uint32_t n = 0;
        if (!get_u32(in, p, n)) return nullptr;
        auto& level = r->gens_[static_cast<std::size_t>(s)];
        level.reserve(n);
        int prev_t = std::numeric_limits<int>::min(), ordinal = 0;
        for (std::uint32_t i = 0; i < n; ++i) {
            std::uint32_t tv = 0;
            if (!get_u32(in, p, tv)) return nullptr;
            int t = static_cast<int>(tv);
            if (t < prev_t || t > t_max) return nullptr;
            ordinal = (t == prev_t) ? ordinal + 1 : 0;
            prev_t = t;
            level.push_back({t, ordinal});
        }
    }
    std::uint32_t naug = 0;
    if (!get_u32(in, p, naug) || naug != r->gens_[0].size()) return nullptr;
    for (std::uint32_t i = 0; i < naug; ++i) {
        std::uint32_t c = 0;
        if (!get_u32(in, p, c)) return nullptr;
        int cell = static_cast<int>(c);
        if (!r->module_->has_cell(cell) || cell != r->gens_[0][i].t) return nullptr;
        r->aug_cells_.push_back(cell);
    }
    for (int s = 1; s <= s_max; ++s) {
        const auto& level = r->gens_[static_cast<std::size_t>(s)];
        const auto& below = r->gens_[static_cast<std::size_t>(s - 1)];
        auto& diffs = r->diffs_[static_cast<std::size_t>(s)];
        diffs.reserve(level.size());
        for (const auto& gen : level) {
            std::uint32_t nterms = 0;
            if (!get_u32(in, p, nterms)) return nullptr;
            FreeElement e;
            e.terms.reserve(nterms);
            for (std::uint32_t i = 0; i < nterms; ++i) {
                std::uint32_t gi = 0, nbits = 0;
                if (!get_u32(in, p, gi) || !get_u32(in, p, nbits)) return nullptr;
                if (gi >= below.size()) return nullptr;
                int d = gen.t - below[gi].t;
                if (d < 0 || static_cast<std::uint32_t>(milnor_dim(d)) != nbits) return nullptr;
                f2::BitVector c(nbits);
                for (std::size_t wi = 0; wi < c.word_count(); ++wi) {
                    std::uint64_t w = 0;
                    if (!get_u64(in, p, w)) return nullptr;
                    c.words()[wi] = w;
                }
                // Trailing pad bits must be zero (format invariant).
                if (nbits % 64 != 0 &&
                    (c.words()[c.word_count() - 1] >> (nbits % 64)) != 0)
                    return nullptr;
                e.terms.push_back({static_cast<int>(gi), std::move(c)});
            }
            diffs.push_back(std::move(e));
        }
    }
    if (p != in.size()) return nullptr;
    return r;
}

ExtChart chart(const Resolution& r) {
    ExtChart c;
    c.s_max = r.s_max();
    c.t_max = r.t_max();
    for (int s = 0; s <= r.s_max(); ++s)
        for (const auto& g : r.gens(s)) ++c.dims[{s, g.t}];
    return c;
}

int ExtChart::dim(int s, int t) const {
    auto it = dims.find({s, t});
    return it == dims.end() ? 0 : it->second;
}

void ExtMap::set(int s, int t, f2::BitMatrix m) {
    if (rows_ && m.rows() != static_cast<std::size_t>(rows_->gen_count(s + ds_, t + dt_)))
        throw std::logic_error("ext map block has wrong row count");
    if (cols_ && m.cols() != static_cast<std::size_t>(cols_->gen_count(s, t)))
        throw std::logic_error("ext map block has wrong column count");
    mats_[{s, t}] = std::move(m);
}

f2::BitMatrix ExtMap::get(int s, int t) const {
    auto it = mats_.find({s, t});
    if (it != mats_.end()) return it->second;
    return f2::BitMatrix(rows_ ? static_cast<std::size_t>(rows_->gen_count(s + ds_, t + dt_)) : 0,
                         cols_ ? static_cast<std::size_t>(cols_->gen_count(s, t)) : 0);
}

namespace {

// Solves d x = rhs on one degree slice. The input rows are the columns of
// the slice matrix (as produced by assemble_transposed), inserted into an
// augmented echelon span tagged with their column index; the augmentation of
// a fully reduced right-hand side is then a preimage. Insertion order fixes
// the echelon basis, so solutions are deterministic.
class SliceSolver {
public:
    explicit SliceSolver(const f2::BitMatrix& mt) : rows_(mt.cols()), span_(mt.cols(), mt.rows()) {
        for (std::size_t i = 0; i < mt.rows(); ++i) {
            f2::BitVector a(mt.rows());
            a.set(i, true);
            span_.add(mt.row_copy(i), std::move(a));
        }
    }
    std::size_t rows() const { return rows_; }
    std::optional<f2::BitVector> solve(f2::BitVector rhs) const {
        return span_.reduce_complete(std::move(rhs), f2::BitVector(span_.a_width()));
    }

private:
    std::size_t rows_;
    f2::AugSpan span_;
};

// Shared driver for chain lifts: walks the generators of `driver` grouped by
// (level, degree) in construction order and hands each group one pre-factored
// linear system for the target slice.
template <class Rhs>
std::vector<std::vector<FreeElement>> lift_chain(const Resolution& driver, const Resolution& target,
                                                 int level_shift, int degree_shift, Rhs&& rhs_of) {
    std::vector<std::vector<FreeElement>> phi(
        static_cast<std::size_t>(driver.s_max()) + 1);
    for (int s = level_shift; s <= driver.s_max(); ++s) {
        int k = s - level_shift;  // target level
        if (k > target.s_max()) break;
        const auto& g = driver.gens(s);
        phi[static_cast<std::size_t>(s)].resize(g.size());
        for (std::size_t j0 = 0; j0 < g.size();) {
            int t = g[j0].t;
            std::size_t j1 = j0;
            while (j1 < g.size() && g[j1].t == t) ++j1;
            int tt = t - degree_shift;  // target degree
            SliceLayout lay = target.layout(k, tt);
            SliceSolver sys(assemble_transposed(target, k, tt, kAllGens));
            for (std::size_t j = j0; j < j1; ++j) {
                f2::BitVector rhs = rhs_of(s, static_cast<int>(j), phi);
                if (rhs.size() != sys.rows())
                    throw std::logic_error("chain lift: right-hand side has wrong dimension");
                auto x = sys.solve(rhs);
                if (!x) throw std::logic_error("chain lift: right-hand side not in image");
                phi[static_cast<std::size_t>(s)][j] = slice_to_free(lay, *x);
            }
            j0 = j1;
        }
    }
    return phi;
}

}  // namespace

ExtMap induced_map(const mod::ModuleMap& f, const Resolution& r_m, const Resolution& r_n) {
    if (f.src->cells() != r_m.module()->cells())
        throw std::invalid_argument("induced_map: source resolution does not match the map");
    if (f.tgt->cells() != r_n.module()->cells())
        throw std::invalid_argument("induced_map: target resolution does not match the map");

    auto rhs_of = [&](int s, int j, const std::vector<std::vector<FreeElement>>& phi) {
        int t = r_m.gens(s)[static_cast<std::size_t>(j)].t;
        if (s == 0) {
            f2::BitVector rhs(r_n.module()->has_cell(t) ? 1u : 0u);
            if (f.maps_cell(r_m.aug_cell(j))) {
                if (rhs.size() != 1)
                    throw std::logic_error("induced_map: image cell missing from target");
                rhs.xor_bit(0);
            }
            return rhs;
        }
        SliceLayout lay = r_n.layout(s - 1, t);
        f2::BitVector rhs(static_cast<std::size_t>(lay.dim));
        for (const auto& term : r_m.diff(s, j).terms) {
            int tj = r_m.gens(s - 1)[static_cast<std::size_t>(term.gen)].t;
            const FreeElement& prev = phi[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(term.gen)];
            for_bits(term.coeffs, [&](std::size_t ith) {
                add_scaled(lay, r_n.gens(s - 1), t - tj, static_cast<int>(ith), prev, tj, rhs);
            });
        }
        return rhs;
    };

    auto phi = lift_chain(r_m, r_n, 0, 0, rhs_of);

    ExtMap out(&r_m, &r_n, 0, 0);
    for (int s = 0; s <= std::min(r_m.s_max(), r_n.s_max()); ++s) {
        const auto& g = r_m.gens(s);
        for (std::size_t j0 = 0; j0 < g.size();) {
            int t = g[j0].t;
            std::size_t j1 = j0;
            while (j1 < g.size() && g[j1].t == t) ++j1;
            int ncols = r_n.gen_count(s, t);
            int col0 = r_n.gen_start(s, t);
            if (ncols > 0) {
                f2::BitMatrix m(j1 - j0, static_cast<std::size_t>(ncols));
                for (std::size_t j = j0; j < j1; ++j)
                    for (const auto& term : phi[static_cast<std::size_t>(s)][j].terms)
                        if (r_n.gens(s)[static_cast<std::size_t>(term.gen)].t == t &&
                            term.coeffs.get(0))
                            m.set(j - j0, static_cast<std::size_t>(term.gen - col0), true);
                out.set(s, t, std::move(m));
            }
            j0 = j1;
        }
    }
    return out;
}

ExtMap connecting(const mod::ShortExactSeq& ses, const Resolution& r_sub,
                  const Resolution& r_quot) {
    if (ses.sub->cells() != r_sub.module()->cells())
        throw std::invalid_argument("connecting: sub resolution does not match the sequence");
    if (ses.quot->cells() != r_quot.module()->cells())
        throw std::invalid_argument("connecting: quotient resolution does not match the sequence");
    const mod::ModulePtr& b = ses.mid;

    // tau[k][j]: value in F_{k-1}(sub) of the k-th perturbation map on
    // generator j of F_k(quot); built level by level.
    std::vector<std::vector<FreeElement>> tau(static_cast<std::size_t>(r_quot.s_max()) + 1);
    int k_hi = std::min(r_quot.s_max(), r_sub.s_max() + 1);
    for (int k = 1; k <= k_hi; ++k) {
        const auto& g = r_quot.gens(k);
        tau[static_cast<std::size_t>(k)].resize(g.size());
        for (std::size_t j0 = 0; j0 < g.size();) {
            int t = g[j0].t;
            std::size_t j1 = j0;
            while (j1 < g.size() && g[j1].t == t) ++j1;
            SliceLayout lay = r_sub.layout(k - 1, t);
            SliceSolver sys(assemble_transposed(r_sub, k - 1, t, kAllGens));
            for (std::size_t j = j0; j < j1; ++j) {
                f2::BitVector rhs(static_cast<std::size_t>(
                    k == 1 ? (ses.sub->has_cell(t) ? 1 : 0) : r_sub.layout(k - 2, t).dim));
                if (k == 1) {
                    // Coefficient of the (unique) degree-t cell of the middle
                    // module in the canonical lift of d(gen).
                    bool hit = false;
                    for (const auto& term : r_quot.diff(1, static_cast<int>(j)).terms) {
                        int cj = r_quot.aug_cell(term.gen);
                        if (!ses.projection.maps_cell(cj))
                            throw std::logic_error("connecting: quotient cell missing upstairs");
                        f2::BitVector ar = b->act_row(t - cj, cj);
                        bool acc = false;
                        for_bits(term.coeffs, [&](std::size_t ith) { acc ^= ar.get(ith); });
                        hit ^= acc;
                    }
                    if (hit) {
                        if (rhs.size() != 1 || !ses.inclusion.maps_cell(t))
                            throw std::logic_error("connecting: boundary lands outside the submodule");
                        rhs.xor_bit(0);
                    }
                } else {
                    for (const auto& term : r_quot.diff(k, static_cast<int>(j)).terms) {
                        int tj = r_quot.gens(k - 1)[static_cast<std::size_t>(term.gen)].t;
                        const FreeElement& prev =
                            tau[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(term.gen)];
                        SliceLayout lay2 = r_sub.layout(k - 2, t);
                        for_bits(term.coeffs, [&](std::size_t ith) {
                            add_scaled(lay2, r_sub.gens(k - 2), t - tj, static_cast<int>(ith), prev,
                                       tj, rhs);
                        });
                    }
                }
                auto x = sys.solve(rhs);
                if (!x) throw std::logic_error("connecting: perturbation lift failed");
                tau[static_cast<std::size_t>(k)][j] = slice_to_free(lay, *x);
            }
            j0 = j1;
        }
    }

    // delta at source (s,t): rows = quot generators at (s+1,t), columns = sub
    // generators at (s,t); entry = unit coefficient in tau.
    ExtMap out(&r_quot, &r_sub, 1, 0);
    for (int k = 1; k <= k_hi; ++k) {
        int s = k - 1;
        const auto& g = r_quot.gens(k);
        for (std::size_t j0 = 0; j0 < g.size();) {
            int t = g[j0].t;
            std::size_t j1 = j0;
            while (j1 < g.size() && g[j1].t == t) ++j1;
            int ncols = r_sub.gen_count(s, t);
            int col0 = r_sub.gen_start(s, t);
            if (ncols > 0) {
                f2::BitMatrix m(j1 - j0, static_cast<std::size_t>(ncols));
                for (std::size_t j = j0; j < j1; ++j)
                    for (const auto& term : tau[static_cast<std::size_t>(k)][j].terms)
                        if (r_sub.gens(s)[static_cast<std::size_t>(term.gen)].t == t &&
                            term.coeffs.get(0))
                            m.set(j - j0, static_cast<std::size_t>(term.gen - col0), true);
                out.set(s, t, std::move(m));
            }
            j0 = j1;
        }
    }
    return out;
}

ExtMap yoneda_operator(const Resolution& r_sphere, int s0, int t0, int ordinal) {
    const auto& m = r_sphere.module();
    if (m->cells().size() != 1)
        throw std::invalid_argument("yoneda_operator: underlying module must be a single cell");
    int b = m->bottom();
    int dt = t0 - b;
    if (ordinal < 0 || ordinal >= r_sphere.gen_count(s0, t0))
        throw std::invalid_argument("yoneda_operator: no such generator");
    if (s0 == 0) throw std::invalid_argument("yoneda_operator: class must have positive filtration");
    int ga = r_sphere.gen_start(s0, t0) + ordinal;

    // phi[s][j]: value in F_{s - s0}(r) at degree t_j - dt of the chain map
    // representing the class, on generator j of F_s.
    std::vector<std::vector<FreeElement>> phi(static_cast<std::size_t>(r_sphere.s_max()) + 1);
    {
        const auto& g = r_sphere.gens(s0);
        phi[static_cast<std::size_t>(s0)].resize(g.size());
        FreeElement unit;
        f2::BitVector one(1);
        one.xor_bit(0);
        unit.terms.push_back({0, std::move(one)});
        phi[static_cast<std::size_t>(s0)][static_cast<std::size_t>(ga)] = std::move(unit);
    }
    for (int s = s0 + 1; s <= r_sphere.s_max(); ++s) {
        int k = s - s0;
        const auto& g = r_sphere.gens(s);
        phi[static_cast<std::size_t>(s)].resize(g.size());
        for (std::size_t j0 = 0; j0 < g.size();) {
            int t = g[j0].t;
            std::size_t j1 = j0;
            while (j1 < g.size() && g[j1].t == t) ++j1;
            int tt = t - dt;
            SliceLayout lay = r_sphere.layout(k, tt);
            SliceSolver sys(assemble_transposed(r_sphere, k, tt, kAllGens));
            for (std::size_t j = j0; j < j1; ++j) {
                SliceLayout lay2 = r_sphere.layout(k - 1, tt);
                f2::BitVector rhs(static_cast<std::size_t>(lay2.dim));
                for (const auto& term : r_sphere.diff(s, static_cast<int>(j)).terms) {
                    int tj = r_sphere.gens(s - 1)[static_cast<std::size_t>(term.gen)].t;
                    const FreeElement& prev =
                        phi[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(term.gen)];
                    for_bits(term.coeffs, [&](std::size_t ith) {
                        add_scaled(lay2, r_sphere.gens(k - 1), t - tj, static_cast<int>(ith), prev,
                                   tj - dt, rhs);
                    });
                }
                auto x = sys.solve(rhs);
                if (!x) throw std::logic_error("yoneda_operator: chain lift failed");
                phi[static_cast<std::size_t>(s)][j] = slice_to_free(lay, *x);
            }
            j0 = j1;
        }
    }

    // Matrix at source (s,t): rows = generators at (s+s0, t+dt), columns =
    // generators at (s,t); entry = unit coefficient of the column generator in
    // phi(row generator).
    ExtMap out(&r_sphere, &r_sphere, s0, dt);
    for (int s = 0; s + s0 <= r_sphere.s_max(); ++s) {
        const auto& g = r_sphere.gens(s + s0);
        for (std::size_t j0 = 0; j0 < g.size();) {
            int th = g[j0].t;
            std::size_t j1 = j0;
            while (j1 < g.size() && g[j1].t == th) ++j1;
            int t = th - dt;
            int ncols = r_sphere.gen_count(s, t);
            int col0 = r_sphere.gen_start(s, t);
            if (ncols > 0) {
                f2::BitMatrix mtx(j1 - j0, static_cast<std::size_t>(ncols));
                for (std::size_t j = j0; j < j1; ++j)
                    for (const auto& term : phi[static_cast<std::size_t>(s + s0)][j].terms)
                        if (r_sphere.gens(s)[static_cast<std::size_t>(term.gen)].t == t &&
                            term.coeffs.get(0))
                            mtx.set(j - j0, static_cast<std::size_t>(term.gen - col0), true);
                out.set(s, t, std::move(mtx));
            }
            j0 = j1;
        }
    }
    return out;
}

ExtMap compose_ext(const ExtMap& g, const ExtMap& f) {
    if (f.row_res() != g.col_res())
        throw std::invalid_argument("compose_ext: maps are not composable");
    ExtMap out(g.row_res(), f.col_res(), f.ds() + g.ds(), f.dt() + g.dt());
    for (const auto& [st, mf] : f.raw()) {
        f2::BitMatrix mg = g.get(st.first + f.ds(), st.second + f.dt());
        if (mg.rows() == 0 || mf.cols() == 0) continue;
        out.set(st.first, st.second, mg.multiply(mf));
    }
    return out;
}

}  // namespace bext::res
