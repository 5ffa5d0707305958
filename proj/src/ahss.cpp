#include "bext/ahss.hpp"

#include <algorithm>
#include <stdexcept>

#include "bext/cachefile.hpp"
#include "bext/catalog.hpp"

namespace bext::sseq {

namespace {

f2::BitVector column_of(const f2::BitMatrix& m, std::size_t j) {
    f2::BitVector v(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (m.get(i, j)) v.set(i, true);
    return v;
}

f2::BitVector unit_vector(std::size_t size, std::size_t j) {
    f2::BitVector v(size);
    v.set(j, true);
    return v;
}

std::string sphere_vector_name(const res::Resolution& r_sphere, int cell, int s, int t,
                               const f2::BitVector& v) {
    const auto& cat = cat::Catalog::instance();
    int stem = t - s - cell;
    int start = r_sphere.gen_start(s, t);
    std::string base = cat.name_vector(s, stem, v, [&](int i) {
        return r_sphere.gen_name(s, start + i);
    });
    if (base == "0") return base;
    return base + cat::cell_suffix(cell);
}

}  // namespace

// ---------------------------------------------------------------------------
// Detector

Detector::Detector(mod::ModulePtr m, int s_res, int t_res)
    : m_(std::move(m)), s_res_(s_res), t_res_(t_res) {
    if (m_->empty()) throw std::invalid_argument("Detector: empty module");
    r_m_ = cache::ResolutionStore::instance().get(m_, s_res_, t_res_);
}

int Detector::ext_dim(int s, int t) { return r_m_->gen_count(s, t); }

Detector::Prefix& Detector::prefix(int n) {
    auto it = prefixes_.find(n);
    if (it != prefixes_.end()) return it->second;
    auto& store = cache::ResolutionStore::instance();
    Prefix p;
    p.quot = m_->interval(m_->bottom(), n);
    p.r_quot = store.get(p.quot, s_res_, t_res_);
    auto sphere = mod::GradedModule::sphere(n);
    p.r_sphere = store.get(sphere, s_res_, t_res_);
    p.into_full = res::induced_map(mod::ModuleMap::cellwise(m_, p.quot), *r_m_, *p.r_quot);
    p.top_cell =
        res::induced_map(mod::ModuleMap::cellwise(sphere, p.quot), *p.r_sphere, *p.r_quot);
    return prefixes_.emplace(n, std::move(p)).first->second;
}

Detection Detector::name_class(int s, int t, const f2::BitVector& cls) {
    if (s + 1 >= s_res_ || t > t_res_)
        throw std::invalid_argument("Detector: query beyond resolution caps");
    if (static_cast<int>(cls.size()) != r_m_->gen_count(s, t))
        throw std::invalid_argument("Detector: class vector has wrong dimension");
    if (cls.is_zero()) throw std::invalid_argument("Detector: zero class has no name");

    for (int n : m_->cells()) {
        if (n > t - s) break;  // top-cell image would sit at negative stem
        Prefix& p = prefix(n);
        f2::BitMatrix into = p.into_full.get(s, t);
        auto witness = f2::solve(into, cls);
        if (!witness) continue;
        f2::BitMatrix top = p.top_cell.get(s, t);
        f2::BitVector image = top.apply(*witness);
        if (image.is_zero()) {
            // Adjust within the witness coset until the top-cell image is
            // nonzero; minimality of n guarantees such a witness exists.
            for (const auto& k : f2::kernel_basis(into)) {
                f2::BitVector cand = top.apply(k);
                if (!cand.is_zero()) {
                    image = cand;
                    break;
                }
            }
            if (image.is_zero())
                throw std::logic_error(
                    "Detector: detected class with identically zero top-cell image");
        }
        return Detection{n, sphere_vector_name(*p.r_sphere, n, s, t, image)};
    }
    throw std::logic_error("Detector: class not detected by any prefix quotient");
}

Detection detection_name(const mod::ModulePtr& m, int s, int t, const f2::BitVector& cls,
                         int s_res, int t_res) {
    Detector d(m, s_res, t_res);
    return d.name_class(s, t, cls);
}

// ---------------------------------------------------------------------------
// Ahss

Ahss::Ahss(mod::ModulePtr m, int s_max, int t_max)
    : m_(std::move(m)),
      s_max_(s_max),
      t_max_(t_max),
      s_res_(s_max + 2),
      t_res_(t_max),
      settle_(1) {
    if (m_->empty()) throw std::invalid_argument("Ahss: empty module");
    settle_ = m_->top() - m_->bottom() + 1;
    if (settle_ < 1) settle_ = 1;
}

Ahss::WindowCtx& Ahss::window(int n, int r) {
    auto key = std::make_pair(n, r);
    auto it = windows_.find(key);
    if (it != windows_.end()) return it->second;

    auto& store = cache::ResolutionStore::instance();
    WindowCtx ctx;
    ctx.lower = m_->interval(n - r + 1, n);
    ctx.upper = m_->interval(n, n + r - 1);
    ctx.r_lower = store.get(ctx.lower, s_res_, t_res_);
    ctx.r_upper = store.get(ctx.upper, s_res_, t_res_);
    auto sphere = mod::GradedModule::sphere(n);
    ctx.r_sphere = store.get(sphere, s_res_, t_res_);
    ctx.overlap = res::induced_map(mod::ModuleMap::cellwise(ctx.upper, ctx.lower),
                                   *ctx.r_upper, *ctx.r_lower);
    ctx.top_cell = res::induced_map(mod::ModuleMap::cellwise(sphere, ctx.lower),
                                    *ctx.r_sphere, *ctx.r_lower);
    ctx.include = res::induced_map(mod::ModuleMap::cellwise(ctx.upper, sphere),
                                   *ctx.r_upper, *ctx.r_sphere);
    return windows_.emplace(key, std::move(ctx)).first->second;
}

Ahss::WindowCtx& Ahss::window_with_delta(int n, int r) {
    WindowCtx& ctx = window(n, r);
    if (ctx.has_delta) return ctx;
    if (!m_->has_cell(n - r)) return ctx;  // no target cell: differential is zero
    auto& store = cache::ResolutionStore::instance();
    auto mid = m_->interval(n - r, n);
    auto ses = mod::cell_sub(mid, n - r + 1);
    auto r_quot = store.get(ses.quot, s_res_, t_res_);
    // ses.sub has the same cells as ctx.lower, so the cached resolution is
    // shared; connecting needs the resolution object for the sub side.
    auto r_sub = store.get(ses.sub, s_res_, t_res_);
    ctx.delta = res::connecting(ses, *r_sub, *r_quot);
    ctx.has_delta = true;
    return ctx;
}

Ahss::PageData& Ahss::page(int r, int n, int s, int t) {
    if (r < 1) throw std::invalid_argument("Ahss: page index must be >= 1");
    if (r > settle_) r = settle_;
    std::array<int, 4> key{r, n, s, t};
    auto it = pages_.find(key);
    if (it != pages_.end()) return it->second;

    PageData data;
    if (m_->has_cell(n) && s >= 0 && s <= s_max_ + 1 && t <= t_max_) {
        WindowCtx& ctx = window(n, r);
        f2::BitMatrix a = ctx.overlap.get(s, t);
        if (a.rows() > 0 && a.cols() > 0) {
            f2::AugSpan sel(a.rows(), a.cols());
            for (std::size_t j = 0; j < a.cols(); ++j) {
                if (!sel.add(column_of(a, j), unit_vector(a.cols(), j)))
                    data.pivot_cols.push_back(static_cast<int>(j));
            }
            data.dim = static_cast<int>(data.pivot_cols.size());
            data.coords.emplace(a.rows(), data.pivot_cols.size());
            for (std::size_t k = 0; k < data.pivot_cols.size(); ++k)
                data.coords->add(column_of(a, static_cast<std::size_t>(data.pivot_cols[k])),
                                 unit_vector(data.pivot_cols.size(), k));
        }
    }
    return pages_.emplace(key, std::move(data)).first->second;
}

int Ahss::dim(int r, int n, int s, int t) { return page(r, n, s, t).dim; }

const f2::BitMatrix& Ahss::differential(int r, int n, int s, int t) {
    if (r < 1) throw std::invalid_argument("Ahss: differential index must be >= 1");
    if (s > s_max_) throw std::invalid_argument("Ahss: differential beyond s_max");
    std::array<int, 4> key{r, n, s, t};
    auto it = diffs_.find(key);
    if (it != diffs_.end()) return it->second;

    PageData& src = page(r, n, s, t);
    PageData& tgt = page(r, n - r, s + 1, t);
    f2::BitMatrix mat(static_cast<std::size_t>(tgt.dim), static_cast<std::size_t>(src.dim));
    if (src.dim > 0 && tgt.dim > 0 && r < settle_) {
        WindowCtx& ctx = window_with_delta(n, r);
        if (ctx.has_delta) {
            WindowCtx& tctx = window(n - r, r);
            f2::BitMatrix delta = ctx.delta.get(s, t);
            f2::BitMatrix incl = tctx.include.get(s + 1, t);
            for (int k = 0; k < src.dim; ++k) {
                f2::BitVector v1 = column_of(delta, static_cast<std::size_t>(src.pivot_cols[k]));
                f2::BitVector w1 = incl.apply(v1);
                auto coords = tgt.coords->reduce_complete(
                    std::move(w1), f2::BitVector(static_cast<std::size_t>(tgt.dim)));
                if (!coords)
                    throw std::logic_error("Ahss: differential image escaped the target page");
                for (int i = 0; i < tgt.dim; ++i)
                    if (coords->get(static_cast<std::size_t>(i)))
                        mat.set(static_cast<std::size_t>(i), static_cast<std::size_t>(k), true);
            }
        }
    }
    return diffs_.emplace(key, std::move(mat)).first->second;
}

f2::BitVector Ahss::e1_class(int r, int n, int s, int t, int j) {
    PageData& src = page(r, n, s, t);
    if (j < 0 || j >= src.dim) throw std::invalid_argument("Ahss: basis index out of range");
    WindowCtx& ctx = window(n, std::min(r, settle_));
    f2::BitMatrix top = ctx.top_cell.get(s, t);
    return column_of(top, static_cast<std::size_t>(src.pivot_cols[static_cast<std::size_t>(j)]));
}

f2::BitVector Ahss::d_image_e1(int r, int n, int s, int t, int j) {
    PageData& src = page(r, n, s, t);
    if (j < 0 || j >= src.dim) throw std::invalid_argument("Ahss: basis index out of range");
    // No target cell below: the differential image is empty.
    if (r >= settle_ || !m_->has_cell(n - r)) return f2::BitVector(0);
    WindowCtx& ctx = window_with_delta(n, r);
    if (!ctx.has_delta) return f2::BitVector(0);
    f2::BitMatrix delta = ctx.delta.get(s, t);
    return column_of(delta, static_cast<std::size_t>(src.pivot_cols[static_cast<std::size_t>(j)]));
}

std::string Ahss::e1_name(int n, int s, int t, const f2::BitVector& v) {
    WindowCtx& ctx = window(n, 1);
    return sphere_vector_name(*ctx.r_sphere, n, s, t, v);
}

std::vector<PairRecord> Ahss::pairs(int r_max, int src_lo, int src_hi, int tgt_lo, int s_hi,
                                    int stem_hi) {
    if (s_hi > s_max_) throw std::invalid_argument("Ahss: pairs query beyond s_max");
    std::vector<PairRecord> out;
    for (int r = 1; r <= std::min(r_max, settle_ - 1); ++r) {
        for (int n : m_->cells()) {
            if (n < src_lo || n > src_hi) continue;
            if (n - r < tgt_lo || !m_->has_cell(n - r)) continue;
            for (int s = 0; s <= s_hi; ++s) {
                int t_lo = m_->bottom() + s;
                int t_hi = std::min(t_max_, stem_hi + s);
                for (int t = t_lo; t <= t_hi; ++t) {
                    if (dim(r, n, s, t) == 0) continue;
                    const f2::BitMatrix& d = differential(r, n, s, t);
                    if (d.rows() == 0) continue;
                    f2::RowSpan seen(d.rows());
                    for (int k = 0; k < dim(r, n, s, t); ++k) {
                        f2::BitVector col = column_of(d, static_cast<std::size_t>(k));
                        if (col.is_zero() || !seen.add(col)) continue;
                        PairRecord rec;
                        rec.r = r;
                        rec.n_src = n;
                        rec.n_tgt = n - r;
                        rec.s = s;
                        rec.t = t;
                        rec.source = e1_name(n, s, t, e1_class(r, n, s, t, k));
                        rec.target = e1_name(n - r, s + 1, t, d_image_e1(r, n, s, t, k));
                        out.push_back(std::move(rec));
                    }
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const PairRecord& a, const PairRecord& b) {
        int sa = a.t - a.s, sb = b.t - b.s;
        if (sa != sb) return sa < sb;
        if (a.s != b.s) return a.s < b.s;
        if (a.r != b.r) return a.r < b.r;
        if (a.n_src != b.n_src) return a.n_src < b.n_src;
        return a.source < b.source;
    });
    return out;
}

std::vector<std::string> Ahss::convergence_report() {
    auto& store = cache::ResolutionStore::instance();
    auto r_full = store.get(m_, s_res_, t_res_);
    std::vector<std::string> report;
    for (int s = 0; s <= s_max_; ++s) {
        for (int t = m_->bottom(); t <= t_max_; ++t) {
            int total = 0;
            for (int n : m_->cells()) total += einf_dim(n, s, t);
            int direct = r_full->gen_count(s, t);
            if (total != direct) {
                report.push_back("convergence mismatch at s=" + std::to_string(s) +
                                 " t=" + std::to_string(t) + ": graded total " +
                                 std::to_string(total) + " vs chart " + std::to_string(direct));
            }
        }
    }
    return report;
}

}  // namespace bext::sseq
