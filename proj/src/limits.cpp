#include "bext/limits.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "bext/cachefile.hpp"

namespace bext::lim {

namespace {

using cache::ResolutionStore;

constexpr int kStep = 8;         // rung spacing within one ladder
constexpr int kMaxWidenings = 3; // extra ladders tried on uncertified entries

// One bidegree's worth of a raw ExtMap family, detached (with correctly
// sized zero blocks) from the resolutions that produced it so deep rungs can
// be released early.
using MatFamily = std::map<std::pair<int, int>, f2::BitMatrix>;

MatFamily detach(const res::ExtMap& m, const std::vector<std::pair<int, int>>& keys) {
    MatFamily out;
    for (const auto& [s, t] : keys) out.emplace(std::make_pair(s, t), m.get(s, t));
    return out;
}

f2::BitVector column_of(const f2::BitMatrix& m, std::size_t c) {
    f2::BitVector v(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (m.get(r, c)) v.set(r, true);
    return v;
}

// Horizontal concatenation [a | b]; either side may have zero columns.
f2::BitMatrix hcat(const f2::BitMatrix& a, const f2::BitMatrix& b) {
    if (a.rows() != b.rows()) throw std::logic_error("hcat: row mismatch");
    f2::BitMatrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c)
            if (a.get(r, c)) out.set(r, c, true);
        for (std::size_t c = 0; c < b.cols(); ++c)
            if (b.get(r, c)) out.set(r, a.cols() + c, true);
    }
    return out;
}

std::size_t column_rank(const f2::BitMatrix& m) {
    f2::BitMatrix t = f2::transpose(m);
    return f2::rank_destructive(t);
}

mod::ModulePtr middle_module(int base, int w, int t_top) {
    std::vector<int> cells;
    for (int n = -base; n <= t_top; ++n) {
        if (w >= 1 && n == -1) continue;
        cells.push_back(n);
    }
    std::ostringstream name;
    name << "mid(w=" << w << ",K=" << base << ",T=" << t_top << ")";
    return mod::GradedModule::from_cells(name.str(), std::move(cells));
}

// Shared state across the ladders of one weight: resolutions come and go
// through the store (memory is released eagerly, the disk copy remains), and
// the per-pair tower families are kept because consecutive ladders overlap
// in two of their three rungs.
struct LadderCtx {
    int w;
    int top;
    int s_res;
    int t_cl_max;
    Window win;
    std::vector<std::pair<int, int>> keys;  // classical (s, t) the window touches
    std::map<int, MatFamily> steps;         // depth b -> Ext(P(-b-8)) -> Ext(P(-b))

    LadderCtx(int w_, const Window& win_)
        : w(w_), top(-w_ - 1), s_res(win_.s_max), t_cl_max(classical_t_max(win_)), win(win_) {
        for (int s = 0; s <= win.s_max; ++s)
            for (int c = win.coweight_min; c <= win.coweight_max; ++c)
                keys.emplace_back(s, (c - 1) + s);
    }

    std::shared_ptr<const res::Resolution> rung(int b) {
        return ResolutionStore::instance().get(mod::GradedModule::stunted(-b, top), s_res + 1,
                                               t_cl_max);
    }
    void release(int b) {
        ResolutionStore::instance().evict(*mod::GradedModule::stunted(-b, top), s_res + 1,
                                          t_cl_max);
    }

    const MatFamily& step(int b) {
        auto it = steps.find(b);
        if (it != steps.end()) return it->second;
        MatFamily fam;
        {
            std::shared_ptr<const res::Resolution> r_sh = rung(b);
            std::shared_ptr<const res::Resolution> r_dp = rung(b + kStep);
            mod::ModuleMap incl = mod::ModuleMap::cellwise(r_sh->module(), r_dp->module());
            fam = detach(res::induced_map(incl, *r_sh, *r_dp), keys);
        }
        release(b + kStep);
        release(b);
        return steps.emplace(b, std::move(fam)).first->second;
    }
};

struct Attempt {
    LimitChart chart;
    bool clean = true;  // every entry stabilized and transport-verified
};

Attempt attempt_at(LadderCtx& ctx, int base) {
    Attempt out;
    LimitChart& ch = out.chart;
    const Window& win = ctx.win;
    ch.w = ctx.w;
    ch.window = win;
    ch.base_depth = base;

    ResolutionStore& store = ResolutionStore::instance();
    const int t_cl_max = ctx.t_cl_max;

    // Deepest pair first so at most two deep resolutions are in memory.
    const MatFamily& f1_mats = ctx.step(base + kStep);
    const MatFamily& f0_mats = ctx.step(base);
    ch.bottom = ctx.rung(base);

    // Column-model split of the middle interval at cell -w: the sub part is
    // the column model, the quotient is exactly the bottom rung's module.
    mod::ModulePtr mid = middle_module(base, ctx.w, t_cl_max);
    mod::ShortExactSeq ses = mod::cell_sub(mid, -ctx.w);
    if (ses.quot->cells() != ch.bottom->module()->cells())
        throw std::logic_error("ext_of_limit: quotient does not match the bottom rung");
    ch.model = store.get(ses.sub, ctx.s_res, t_cl_max);
    res::ExtMap delta = res::connecting(ses, *ch.model, *ch.bottom);

    res::ExtMap pstar;
    if (ctx.w <= 0) {
        ch.sphere = store.get(mod::GradedModule::sphere(-1), ctx.s_res, t_cl_max);
        mod::ModuleMap proj = mod::ModuleMap::cellwise(ch.bottom->module(), ch.sphere->module());
        pstar = res::induced_map(proj, *ch.bottom, *ch.sphere);
    }

    for (int s = 0; s <= win.s_max; ++s) {
        for (int c = win.coweight_min; c <= win.coweight_max; ++c) {
            const int t_cl = (c - 1) + s;
            const int t_borel = t_cl + ctx.w + 1;
            const std::size_t v0 = static_cast<std::size_t>(ch.bottom->gen_count(s, t_cl));
            const f2::BitMatrix& f0 = f0_mats.at({s, t_cl});
            const f2::BitMatrix& f1 = f1_mats.at({s, t_cl});
            f2::EventualImage ev = f2::eventual_image({f0, f1});

            Entry entry;
            entry.dim = static_cast<int>(ev.basis.size());
            entry.stabilized = ev.stabilized;
            entry.base = base;

            const std::size_t model_dim =
                s >= 1 ? static_cast<std::size_t>(ch.model->gen_count(s - 1, t_cl)) : 0u;
            const std::size_t sphere_dim =
                ch.sphere ? static_cast<std::size_t>(ch.sphere->gen_count(s, t_cl)) : 0u;

            f2::BitMatrix dmat = s >= 1 ? delta.get(s - 1, t_cl) : f2::BitMatrix(v0, 0);
            if (dmat.rows() != v0 || dmat.cols() != model_dim)
                throw std::logic_error("ext_of_limit: connecting block has unexpected shape");
            f2::BitMatrix pmat = ch.sphere ? pstar.get(s, t_cl) : f2::BitMatrix(v0, 0);
            if (pmat.rows() != v0 || pmat.cols() != sphere_dim)
                throw std::logic_error("ext_of_limit: projection block has unexpected shape");

            Transport tr;
            tr.to_limit = hcat(dmat, pmat);
            tr.limit_basis = ev.basis;
            tr.model_cols = static_cast<int>(model_dim);
            tr.sphere_cols = static_cast<int>(sphere_dim);
            tr.stabilized = ev.stabilized;
            tr.base = base;

            // Verification: the transport columns are independent, they land
            // in the eventual image, and they fill it.
            bool ok = column_rank(tr.to_limit) == tr.to_limit.cols();
            if (tr.to_limit.cols() != ev.basis.size()) ok = false;
            if (ok) {
                f2::RowSpan span(v0);
                for (const f2::BitVector& b : ev.basis) span.add(b);
                for (std::size_t cix = 0; cix < tr.to_limit.cols() && ok; ++cix)
                    ok = span.contains(column_of(tr.to_limit, cix));
            }
            tr.verified = ok;
            entry.verified = ok;
            if (!entry.stabilized || !entry.verified) out.clean = false;

            ch.entries[{s, t_borel}] = entry;
            ch.transports[{s, t_borel}] = std::move(tr);
        }
    }
    ctx.release(base);
    return out;
}

// Problem reports are rebuilt from the final per-entry state so that merged
// charts describe exactly what remained uncertified.
void regenerate_problems(LimitChart& ch) {
    ch.problems.clear();
    for (const auto& [key, e] : ch.entries) {
        const auto& [s, t] = key;
        if (!e.stabilized) {
            std::ostringstream msg;
            msg << "unstabilized: w=" << ch.w << " s=" << s << " t=" << t << " at depth "
                << e.base << ".." << e.base + 2 * kStep;
            ch.problems.push_back(msg.str());
        }
        if (!e.verified) {
            const Transport& tr = ch.transports.at(key);
            std::ostringstream msg;
            msg << "transport mismatch: w=" << ch.w << " s=" << s << " t=" << t
                << " model+sphere=" << tr.model_cols << "+" << tr.sphere_cols
                << " eventual=" << e.dim;
            ch.problems.push_back(msg.str());
        }
    }
}

}  // namespace

int depth_for(const Window& win) {
    return (win.coweight_max - 1) + 2 * win.s_max + 8;
}

int classical_t_max(const Window& win) {
    return (win.coweight_max - 1) + win.s_max;
}

int LimitChart::dim(int s, int t) const {
    auto it = entries.find({s, t});
    return it == entries.end() ? 0 : it->second.dim;
}

bool LimitChart::fully_stabilized() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const auto& kv) { return kv.second.stabilized; });
}

bool LimitChart::fully_verified() const {
    return std::all_of(transports.begin(), transports.end(),
                       [](const auto& kv) { return kv.second.verified; });
}

LimitChart ext_of_limit(int w, const Window& win, int forced_base) {
    if (win.coweight_max < win.coweight_min)
        throw std::invalid_argument("ext_of_limit: empty coweight range");
    if (win.s_max < 0) throw std::invalid_argument("ext_of_limit: negative filtration cap");

    int base = forced_base > 0 ? forced_base : depth_for(win);
    // The bottom rung needs at least one cell below the top.
    base = std::max(base, w + 2);

    LadderCtx ctx(w, win);
    Attempt cur = attempt_at(ctx, base);
    cur.chart.bases_used = {base};

    if (forced_base <= 0) {
        for (int i = 1; i <= kMaxWidenings && !cur.clean; ++i) {
            const int b = base + kStep * i;
            Attempt next = attempt_at(ctx, b);
            cur.chart.bases_used.push_back(b);
            cur.clean = true;
            for (auto& [key, e] : cur.chart.entries) {
                if (e.stabilized && e.verified) continue;
                e = next.chart.entries.at(key);
                cur.chart.transports[key] = std::move(next.chart.transports.at(key));
                if (!e.stabilized || !e.verified) cur.clean = false;
            }
        }
    }

    regenerate_problems(cur.chart);
    return std::move(cur.chart);
}

}  // namespace bext::lim
