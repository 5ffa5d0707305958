#include "bext/module.hpp"

#include <algorithm>
#include <stdexcept>

#include "bext/adem.hpp"
#include "bext/milnor.hpp"

namespace bext::mod {

bool binom2(long long n, long long k) {
    if (k < 0) throw std::invalid_argument("binom2: k must be nonnegative");
    if (n >= 0) {
        if (k > n) return false;
        return ((k & (n - k)) == 0);
    }
    // C(n,k) = (-1)^k C(k-n-1, k); the sign vanishes mod 2.
    return binom2(k - n - 1, k);
}

GradedModule::GradedModule(std::string name, std::vector<int> cells)
    : name_(std::move(name)), cells_(std::move(cells)) {
    std::sort(cells_.begin(), cells_.end());
    if (std::adjacent_find(cells_.begin(), cells_.end()) != cells_.end())
        throw std::invalid_argument("GradedModule: duplicate cell degree");
}

ModulePtr GradedModule::from_cells(std::string name, std::vector<int> cells) {
    return ModulePtr(new GradedModule(std::move(name), std::move(cells)));
}

ModulePtr GradedModule::sphere(int n) {
    return from_cells("S:" + std::to_string(n), {n});
}

ModulePtr GradedModule::stunted(int a, int b) {
    if (b < a) throw std::invalid_argument("stunted: empty cell range");
    std::vector<int> cells(static_cast<std::size_t>(b - a) + 1);
    for (int n = a; n <= b; ++n) cells[static_cast<std::size_t>(n - a)] = n;
    return from_cells("P:" + std::to_string(a) + ":" + std::to_string(b),
                      std::move(cells));
}

bool GradedModule::has_cell(int n) const { return cell_index(n) >= 0; }

int GradedModule::cell_index(int n) const {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), n);
    if (it == cells_.end() || *it != n) return -1;
    return static_cast<int>(it - cells_.begin());
}

bool GradedModule::sq(int n, int c) const {
    if (c < 1 || !has_cell(n) || !has_cell(n + c)) return false;
    return binom2(n, c);
}

f2::BitVector GradedModule::act_row(int d, int n) const {
    if (d == 0) {
        f2::BitVector unit(1);
        unit.set(0, has_cell(n));
        return unit;
    }
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(d, n);
    auto it = act_cache_.find(key);
    if (it != act_cache_.end()) return it->second;

    using namespace bext::steenrod;
    // Value of each admissible word on the cell: apply Sq factors rightmost
    // first; with one cell per degree this is a single 0/1 coefficient.
    const auto& adm = admissible_basis(d);
    f2::BitVector word_vals(adm.size());
    if (has_cell(n) && has_cell(n + d)) {
        for (std::size_t w = 0; w < adm.size(); ++w) {
            int cur = n;
            bool alive = true;
            for (auto itf = adm[w].a.rbegin(); alive && itf != adm[w].a.rend(); ++itf) {
                int c = static_cast<int>(*itf);
                alive = sq(cur, c);
                cur += c;
            }
            word_vals.set(w, alive);
        }
    }
    // A functional's admissible-basis values convert to Milnor-basis values
    // through the transpose of the milnor->admissible coordinate matrix;
    // to_admissible of each Milnor unit vector realizes exactly that.
    f2::BitVector milnor_vals(static_cast<std::size_t>(milnor_dim(d)));
    if (!word_vals.is_zero()) {
        for (int idx = 0; idx < milnor_dim(d); ++idx) {
            f2::BitVector unit(static_cast<std::size_t>(milnor_dim(d)));
            unit.set(static_cast<std::size_t>(idx), true);
            f2::BitVector adm_coords = BasisBridge::instance().to_admissible(d, unit);
            std::size_t parity = 0;
            for (std::size_t w = 0; w < adm_coords.size(); ++w)
                if (adm_coords.get(w) && word_vals.get(w)) parity ^= 1;
            milnor_vals.set(static_cast<std::size_t>(idx), parity != 0);
        }
    }
    return act_cache_.emplace(key, std::move(milnor_vals)).first->second;
}

bool GradedModule::act(int d, int idx, int n) const {
    return act_row(d, n).get(static_cast<std::size_t>(idx));
}

ModulePtr GradedModule::interval(int lo, int hi) const {
    std::vector<int> sub;
    for (int n : cells_)
        if (n >= lo && n <= hi) sub.push_back(n);
    return from_cells(name_ + "[" + std::to_string(lo) + "," + std::to_string(hi) + "]",
                      std::move(sub));
}

bool ModuleMap::maps_cell(int n) const {
    int i = src->cell_index(n);
    if (i < 0 || !tgt->has_cell(n)) return false;
    return coeff[static_cast<std::size_t>(i)];
}

ModuleMap ModuleMap::cellwise(ModulePtr src, ModulePtr tgt) {
    ModuleMap f;
    f.src = std::move(src);
    f.tgt = std::move(tgt);
    f.coeff.assign(f.src->cells().size(), false);
    for (std::size_t i = 0; i < f.src->cells().size(); ++i)
        f.coeff[i] = f.tgt->has_cell(f.src->cells()[i]);
    // A-linearity: f(Sq^c x) = Sq^c f(x) for every cell and every c reaching
    // another cell of either module. With one cell per degree this reduces to
    // a finite coefficient comparison over the combined window.
    int top = std::max(f.src->empty() ? 0 : f.src->top(),
                       f.tgt->empty() ? 0 : f.tgt->top());
    for (int n : f.src->cells()) {
        for (int c = 1; n + c <= top; ++c) {
            bool lhs = f.src->sq(n, c) && f.maps_cell(n + c);
            bool rhs = f.maps_cell(n) && f.tgt->sq(n, c);
            if (lhs != rhs)
                throw std::logic_error("cellwise map is not A-linear: " + f.src->name() +
                                       " -> " + f.tgt->name() + " at cell " +
                                       std::to_string(n) + ", Sq^" + std::to_string(c));
        }
    }
    return f;
}

ModuleMap compose(const ModuleMap& g, const ModuleMap& f) {
    if (g.src->cells() != f.tgt->cells())
        throw std::invalid_argument("compose: middle modules differ");
    ModuleMap h;
    h.src = f.src;
    h.tgt = g.tgt;
    h.coeff.assign(h.src->cells().size(), false);
    for (std::size_t i = 0; i < h.src->cells().size(); ++i) {
        int n = h.src->cells()[i];
        h.coeff[i] = f.coeff[i] && g.maps_cell(n);
    }
    return h;
}

ShortExactSeq cell_sub(ModulePtr m, int cutoff) {
    std::vector<int> lower, upper;
    for (int n : m->cells()) (n >= cutoff ? upper : lower).push_back(n);
    ShortExactSeq ses;
    ses.mid = m;
    ses.sub = GradedModule::from_cells(m->name() + "|>=" + std::to_string(cutoff), upper);
    ses.quot = GradedModule::from_cells(m->name() + "|<" + std::to_string(cutoff), lower);
    ses.inclusion = ModuleMap::cellwise(ses.sub, ses.mid);
    ses.projection = ModuleMap::cellwise(ses.mid, ses.quot);
    return ses;
}

std::vector<ColumnEntry> column_model(int w, int t_max) {
    std::vector<ColumnEntry> out;
    if (w > 0) {
        // Cells n >= -w with n != -1, truncated at t_max. Deleting cell -1 is
        // legal: nothing acts into it (C(2c,c) is even) and its own action
        // lands above, so the span of the others is a subquotient.
        std::vector<int> cells;
        for (int n = -w; n <= t_max; ++n)
            if (n != -1) cells.push_back(n);
        out.push_back({GradedModule::from_cells("M:" + std::to_string(w), cells), 1});
    } else {
        std::vector<int> cells;
        for (int n = -w; n <= t_max; ++n) cells.push_back(n);
        out.push_back({GradedModule::from_cells("M:" + std::to_string(w) + ":proj", cells), 1});
        out.push_back({GradedModule::sphere(-1), 0});
    }
    return out;
}

ModulePtr dictionary_model(char variant, int K, int T) {
    if (K < 1 || T < 1) throw std::invalid_argument("dictionary_model: K, T must be >= 1");
    std::vector<int> cells;
    for (int n = -K; n <= T; ++n) {
        if (variant == 'A' && n == -1) continue;
        cells.push_back(n);
    }
    std::string name = (variant == 'A' ? "DA:" : "DB:");
    name += std::to_string(K) + ":" + std::to_string(T);
    return GradedModule::from_cells(name, cells);
}

namespace {

// Split "head:i1:i2" on ':' and parse integer fields with diagnostics.
std::vector<std::string> split_fields(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(':', start);
        out.push_back(s.substr(start, pos == std::string::npos ? pos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

int parse_int_field(const std::string& spec, const std::vector<std::string>& f,
                    std::size_t i) {
    if (i >= f.size())
        throw std::invalid_argument("module spec '" + spec + "': missing field " +
                                    std::to_string(i + 1));
    try {
        std::size_t used = 0;
        int v = std::stoi(f[i], &used);
        if (used != f[i].size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("module spec '" + spec + "': field " +
                                    std::to_string(i + 1) + " ('" + f[i] +
                                    "') is not an integer");
    }
}

}  // namespace

std::vector<ColumnEntry> parse_module_spec(const std::string& spec, int t_max) {
    auto f = split_fields(spec);
    const std::string& head = f[0];
    auto need = [&](std::size_t n) {
        if (f.size() != n + 1)
            throw std::invalid_argument("module spec '" + spec + "': '" + head +
                                        "' takes " + std::to_string(n) + " field(s)");
    };
    if (head == "S") {
        need(1);
        return {{GradedModule::sphere(parse_int_field(spec, f, 1)), 0}};
    }
    if (head == "P") {
        need(2);
        int a = parse_int_field(spec, f, 1);
        int b = parse_int_field(spec, f, 2);
        if (b < a) throw std::invalid_argument("module spec '" + spec + "': empty cell range");
        return {{GradedModule::stunted(a, b), 0}};
    }
    if (head == "M") {
        need(1);
        return column_model(parse_int_field(spec, f, 1), t_max);
    }
    if (head == "DA" || head == "DB") {
        need(2);
        int K = parse_int_field(spec, f, 1);
        int T = parse_int_field(spec, f, 2);
        if (K < 1 || T < 1)
            throw std::invalid_argument("module spec '" + spec + "': K and T must be >= 1");
        return {{dictionary_model(head[1], K, T), 0}};
    }
    throw std::invalid_argument("module spec '" + spec + "': unknown head '" + head +
                                "' (expected S, P, M, DA, DB)");
}

}  // namespace bext::mod
