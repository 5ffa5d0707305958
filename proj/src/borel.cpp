#include "bext/borel.hpp"

#include <algorithm>
#include <stdexcept>

#include "bext/cachefile.hpp"
#include "bext/catalog.hpp"

namespace bext::borel {

namespace {

f2::BitVector column_of(const f2::BitMatrix& m, std::size_t j) {
    f2::BitVector v(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (m.get(i, j)) v.set(i, true);
    return v;
}

std::string encode_pair(const sseq::PairRecord& p) {
    return std::to_string(p.r) + "|" + std::to_string(p.n_src) + "|" + std::to_string(p.s) +
           "|" + std::to_string(p.t) + "|" + p.source + "|" + p.target;
}

}  // namespace

Engine::Engine(PageCaps caps) : caps_(caps) {}

lim::Window Engine::column_window(int w) const {
    lim::Window win;
    win.coweight_min = std::max(caps_.coweight_min, -w);
    win.coweight_max = std::min(caps_.coweight_max, caps_.stem_max - w);
    win.s_max = caps_.s_max;
    if (win.coweight_min > win.coweight_max) {
        throw std::out_of_range(
            "weight " + std::to_string(w) + " contributes no stem in [0, " +
            std::to_string(caps_.stem_max) + "] at coweights [" +
            std::to_string(caps_.coweight_min) + ", " + std::to_string(caps_.coweight_max) +
            "]; enlarge stem_max or the coweight window");
    }
    return win;
}

const lim::LimitChart& Engine::column(int w) {
    auto it = columns_.find(w);
    if (it != columns_.end()) return it->second;
    lim::LimitChart chart = lim::ext_of_limit(w, column_window(w));
    return columns_.emplace(w, std::move(chart)).first->second;
}

sseq::Detector& Engine::detector_for(const mod::ModulePtr& m, int t_res) {
    std::string key = cache::module_key(*m) + "@" + std::to_string(t_res);
    auto it = detectors_.find(key);
    if (it != detectors_.end()) return *it->second;
    auto det = std::make_unique<sseq::Detector>(m, caps_.s_max + 2, t_res);
    return *detectors_.emplace(key, std::move(det)).first->second;
}

std::vector<NamedClass> Engine::names_for(const lim::LimitChart& chart, int s, int t) {
    std::vector<NamedClass> out;
    auto it = chart.transports.find({s, t});
    if (it == chart.transports.end()) return out;
    const lim::Transport& tr = it->second;
    int t_cl = t - chart.w - 1;
    if (tr.model_cols > 0) {
        sseq::Detector& det = detector_for(chart.model->module(), chart.model->t_max());
        for (int i = 0; i < tr.model_cols; ++i) {
            f2::BitVector e(static_cast<std::size_t>(tr.model_cols));
            e.set(static_cast<std::size_t>(i), true);
            sseq::Detection d = det.name_class(s - 1, t_cl, e);
            out.push_back(NamedClass{d.name, d.cell, 'm'});
        }
    }
    if (tr.sphere_cols > 0) {
        sseq::Detector& det = detector_for(chart.sphere->module(), chart.sphere->t_max());
        for (int j = 0; j < tr.sphere_cols; ++j) {
            f2::BitVector e(static_cast<std::size_t>(tr.sphere_cols));
            e.set(static_cast<std::size_t>(j), true);
            sseq::Detection d = det.name_class(s, t_cl, e);
            out.push_back(NamedClass{d.name, d.cell, 's'});
        }
    }
    return out;
}

const BorelGroup& Engine::group(int s, int t, int w) {
    auto key = std::make_tuple(s, t, w);
    auto it = groups_.find(key);
    if (it != groups_.end()) return it->second;

    int c = t - s - w;
    int f = t - s;
    if (s < 0 || s > caps_.s_max)
        throw std::out_of_range("filtration s=" + std::to_string(s) +
                                " outside [0, " + std::to_string(caps_.s_max) +
                                "]; enlarge s_max to " + std::to_string(s));
    if (c < caps_.coweight_min || c > caps_.coweight_max)
        throw std::out_of_range("coweight t-s-w=" + std::to_string(c) + " outside [" +
                                std::to_string(caps_.coweight_min) + ", " +
                                std::to_string(caps_.coweight_max) +
                                "]; enlarge the coweight window to include " + std::to_string(c));
    if (f < 0 || f > caps_.stem_max)
        throw std::out_of_range("stem t-s=" + std::to_string(f) + " outside [0, " +
                                std::to_string(caps_.stem_max) + "]; enlarge stem_max to " +
                                std::to_string(f));

    const lim::LimitChart* chart = nullptr;
    auto have_column = columns_.find(w);
    if (have_column != columns_.end()) {
        const lim::Window& cw = have_column->second.window;
        if (c >= cw.coweight_min && c <= cw.coweight_max && s <= cw.s_max)
            chart = &have_column->second;
    }
    lim::LimitChart local;
    if (!chart) {
        lim::Window win{c, c, s};
        local = lim::ext_of_limit(w, win);
        chart = &local;
    }

    const lim::Entry& entry = chart->entries.at({s, t});
    BorelGroup g;
    g.s = s;
    g.t = t;
    g.w = w;
    g.dim = entry.dim;
    g.stabilized = entry.stabilized;
    g.verified = entry.verified;
    g.basis = names_for(*chart, s, t);
    return groups_.emplace(key, std::move(g)).first->second;
}

Engine::PairCharts& Engine::pair_charts(int w, int base) {
    auto key = std::make_pair(w, base);
    auto it = pairs_.find(key);
    if (it != pairs_.end()) return it->second;

    lim::Window a = column_window(w);
    lim::Window b = column_window(w - 1);
    lim::Window win;
    win.coweight_min = std::max(a.coweight_min, b.coweight_min);
    win.coweight_max = std::min(a.coweight_max, b.coweight_max);
    win.s_max = caps_.s_max;
    if (win.coweight_min > win.coweight_max)
        throw std::out_of_range("columns " + std::to_string(w) + " and " + std::to_string(w - 1) +
                                " share no coweight in the configured window");

    PairCharts pc;
    pc.base = base;
    pc.src = lim::ext_of_limit(w, win, base);
    pc.tgt = lim::ext_of_limit(w - 1, win, base);
    pc.r_src_rung = pc.src.bottom;
    pc.r_tgt_rung = pc.tgt.bottom;
    // Kill-top-cell quotient P(-K,-w) ->> P(-K,-w-1) induces
    // Ext(src rung) -> Ext(tgt rung), contravariantly.
    auto q = mod::ModuleMap::cellwise(pc.tgt.bottom->module(), pc.src.bottom->module());
    pc.mu = res::induced_map(q, *pc.r_tgt_rung, *pc.r_src_rung);
    return pairs_.emplace(key, std::move(pc)).first->second;
}

const RhoBlock& Engine::rho(int w, int s, int t) {
    auto key = std::make_tuple(w, s, t);
    auto it = rho_.find(key);
    if (it != rho_.end()) return it->second;

    lim::Window a = column_window(w);
    lim::Window b = column_window(w - 1);
    lim::Window win;
    win.coweight_min = std::max(a.coweight_min, b.coweight_min);
    win.coweight_max = std::min(a.coweight_max, b.coweight_max);
    win.s_max = caps_.s_max;
    int base0 = std::max(lim::depth_for(win), w + 2);
    int t_cl = t - w - 1;

    RhoBlock block;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        int base = base0 + 8 * attempt;
        PairCharts& pc = pair_charts(w, base);
        const lim::Entry& es = pc.src.entries.at({s, t});
        const lim::Entry& et = pc.tgt.entries.at({s, t - 1});
        const lim::Transport& ts = pc.src.transports.at({s, t});
        const lim::Transport& tt = pc.tgt.transports.at({s, t - 1});

        f2::BitMatrix mu_st = pc.mu.get(s, t_cl);
        std::size_t cols = ts.to_limit.cols();
        std::size_t rows = tt.to_limit.cols();
        f2::BitMatrix mat(rows, cols);
        bool solved = true;
        for (std::size_t j = 0; j < cols; ++j) {
            f2::BitVector u = mu_st.apply(column_of(ts.to_limit, j));
            auto x = f2::solve(tt.to_limit, u);
            if (!x) {
                solved = false;
                break;
            }
            for (std::size_t i = 0; i < rows; ++i)
                if (x->get(i)) mat.set(i, j, true);
        }
        block.matrix = std::move(mat);
        block.base = base;
        block.verified = solved && es.verified && et.verified;
        if (block.verified) break;
    }
    return rho_.emplace(key, std::move(block)).first->second;
}

std::vector<RhoLine> Engine::rho_lines(int coweight, int stem_max) {
    std::vector<RhoLine> lines;
    for (int f = 1; f <= std::min(stem_max, caps_.stem_max); ++f) {
        int w = f - coweight;
        // Both columns must contribute inside the caps.
        try {
            column_window(w);
            column_window(w - 1);
        } catch (const std::out_of_range&) {
            continue;
        }
        for (int s = 0; s <= caps_.s_max; ++s) {
            int t = s + coweight + w;
            const lim::LimitChart& src = column(w);
            const lim::LimitChart& tgt = column(w - 1);
            auto es = src.entries.find({s, t});
            auto et = tgt.entries.find({s, t - 1});
            if (es == src.entries.end() || et == tgt.entries.end()) continue;
            if (es->second.dim == 0 || et->second.dim == 0) continue;
            if (!es->second.verified || !et->second.verified) continue;
            const RhoBlock& rb = rho(w, s, t);
            if (!rb.verified) continue;
            for (std::size_t i = 0; i < rb.matrix.rows(); ++i)
                for (std::size_t j = 0; j < rb.matrix.cols(); ++j)
                    if (rb.matrix.get(i, j))
                        lines.push_back(RhoLine{f, s, static_cast<int>(j), static_cast<int>(i)});
        }
    }
    return lines;
}

f2::BitMatrix Engine::rho_power(int s, int t, int w, int k) {
    if (k < 1) throw std::invalid_argument("rho_power: k must be >= 1");
    f2::BitMatrix acc = rho(w, s, t).matrix;
    for (int j = 1; j < k; ++j) {
        const RhoBlock& next = rho(w - j, s, t - j);
        acc = next.matrix.multiply(acc);
    }
    return acc;
}

Dictionary dictionary(char variant, int K, int T, int r_max, int s_hi, int stem_hi) {
    auto run = [&](int depth) {
        auto m = mod::dictionary_model(variant, depth, T);
        sseq::Ahss a(m, s_hi + 1, stem_hi + s_hi + 2);
        return a.pairs(r_max, -depth, T, -depth, s_hi, stem_hi);
    };
    std::vector<sseq::PairRecord> shallow = run(K);
    std::vector<sseq::PairRecord> deep = run(K + 8);

    std::map<std::string, const sseq::PairRecord*> deep_keys;
    for (const auto& p : deep) deep_keys.emplace(encode_pair(p), &p);

    Dictionary dict;
    dict.variant = variant;
    dict.K = K;
    dict.T = T;
    std::map<std::string, bool> shallow_seen;
    for (const auto& p : shallow) {
        std::string key = encode_pair(p);
        shallow_seen.emplace(key, true);
        if (deep_keys.count(key)) {
            dict.pairs.push_back(p);
        } else {
            dict.unstable.push_back("pair (" + p.source + " -> " + p.target + ", r=" +
                                    std::to_string(p.r) + ") only at depth " + std::to_string(K));
        }
    }
    for (const auto& p : deep) {
        if (!shallow_seen.count(encode_pair(p))) {
            dict.unstable.push_back("pair (" + p.source + " -> " + p.target + ", r=" +
                                    std::to_string(p.r) + ") only at depth " +
                                    std::to_string(K + 8));
        }
    }
    return dict;
}

MahowaldResult mahowald(const std::string& cls, int K, int max_widenings) {
    const auto& cat = cat::Catalog::instance();
    auto pos = cat.find_position(cls);
    if (!pos) throw std::invalid_argument("mahowald: class '" + cls + "' is not in the catalog");

    int s = pos->s;
    int t = pos->stem + pos->s - 1;  // bidegree on the (-1)-sphere
    const int T = 1;
    auto& store = cache::ResolutionStore::instance();
    auto sm1 = mod::GradedModule::sphere(-1);

    MahowaldResult result;
    result.input = cls;
    std::string prev_name;
    int prev_cell = 0;
    bool have_prev = false;

    for (int i = 0; i <= max_widenings; ++i) {
        int depth = K + 8 * i;
        auto m = mod::dictionary_model('B', depth, T);
        int s_res = s + 2;
        auto r_db = store.get(m, s_res, t);
        auto r_sm1 = store.get(sm1, s_res, t);
        auto proj = mod::ModuleMap::cellwise(m, sm1);
        res::ExtMap P = res::induced_map(proj, *r_db, *r_sm1);
        f2::BitMatrix mat = P.get(s, t);
        if (pos->index >= static_cast<int>(mat.cols()))
            throw std::logic_error("mahowald: catalog position beyond the sphere chart");
        f2::BitVector v = column_of(mat, static_cast<std::size_t>(pos->index));
        if (v.is_zero()) {
            result.report = "image zero at depth " + std::to_string(depth) +
                            "; widen the depth to certify";
            have_prev = false;
            continue;
        }
        sseq::Detector det(m, s_res, t);
        sseq::Detection d = det.name_class(s, t, v);
        if (have_prev && d.name == prev_name && d.cell == prev_cell) {
            result.name = d.name;
            result.cell = d.cell;
            result.K_used = depth;
            result.certified = true;
            result.report.clear();
            return result;
        }
        prev_name = d.name;
        prev_cell = d.cell;
        have_prev = true;
        result.name = d.name;
        result.cell = d.cell;
        result.K_used = depth;
    }
    result.certified = false;
    if (result.report.empty())
        result.report = "detection name did not stabilize across consecutive depths";
    return result;
}

}  // namespace bext::borel
