#include "bext/cobar.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>

#include "bext/f2.hpp"

namespace bext::cobar {

using steenrod::MilnorSq;
using steenrod::milnor_basis;
using steenrod::milnor_dim;
using steenrod::milnor_index;

namespace {

using Expo = std::vector<unsigned>;  // exponent tuple, trailing zeros allowed

Expo stripped(Expo e) {
    while (!e.empty() && e.back() == 0) e.pop_back();
    return e;
}

std::pair<int, int> expo_id(const Expo& e) {
    MilnorSq m{stripped(e)};
    int d = m.degree();
    return {d, milnor_index(m)};
}

// A sum of tensor squares of monomials with F2 coefficients.
using Tensor = std::set<std::pair<Expo, Expo>>;

void tensor_xor(Tensor& t, std::pair<Expo, Expo> term) {
    auto it = t.find(term);
    if (it != t.end())
        t.erase(it);
    else
        t.insert(std::move(term));
}

Tensor tensor_mul(const Tensor& a, const Tensor& b) {
    Tensor out;
    for (const auto& [al, ar] : a)
        for (const auto& [bl, br] : b) {
            Expo l(std::max(al.size(), bl.size()), 0);
            Expo r(std::max(ar.size(), br.size()), 0);
            for (std::size_t i = 0; i < al.size(); ++i) l[i] += al[i];
            for (std::size_t i = 0; i < bl.size(); ++i) l[i] += bl[i];
            for (std::size_t i = 0; i < ar.size(); ++i) r[i] += ar[i];
            for (std::size_t i = 0; i < br.size(); ++i) r[i] += br[i];
            tensor_xor(out, {stripped(std::move(l)), stripped(std::move(r))});
        }
    return out;
}

// psi(xi_k) = sum_{i=0}^{k} xi_{k-i}^{2^i} (x) xi_i, with xi_0 = 1.
Tensor generator_coproduct(unsigned k) {
    Tensor t;
    for (unsigned i = 0; i <= k; ++i) {
        Expo l, r;
        if (k - i >= 1) {
            l.assign(k - i, 0);
            l[k - i - 1] = 1u << i;
        }
        if (i >= 1) {
            r.assign(i, 0);
            r[i - 1] = 1;
        }
        tensor_xor(t, {std::move(l), std::move(r)});
    }
    return t;
}

Tensor full_coproduct(const Expo& e) {
    Tensor acc;
    acc.insert({Expo{}, Expo{}});  // 1 (x) 1
    for (std::size_t k = 0; k < e.size(); ++k) {
        if (e[k] == 0) continue;
        Tensor g = generator_coproduct(static_cast<unsigned>(k + 1));
        for (unsigned p = 0; p < e[k]; ++p) acc = tensor_mul(acc, g);
    }
    return acc;
}

void check_counit(const Expo& e, const Tensor& t) {
    // Terms with a unit factor must be exactly 1 (x) e and e (x) 1.
    Expo es = stripped(e);
    for (const auto& [l, r] : t) {
        if (l.empty() && r != es) throw std::logic_error("cobar: counit failure (left)");
        if (r.empty() && l != es) throw std::logic_error("cobar: counit failure (right)");
    }
    if (!t.count({Expo{}, es}) || (es.empty() ? t.size() != 1 : !t.count({es, Expo{}})))
        throw std::logic_error("cobar: counit terms missing");
}

void check_coassociative(const Tensor& t) {
    using Triple = std::tuple<Expo, Expo, Expo>;
    std::set<Triple> left, right;
    auto flip = [](std::set<Triple>& acc, Triple tr) {
        auto it = acc.find(tr);
        if (it != acc.end())
            acc.erase(it);
        else
            acc.insert(std::move(tr));
    };
    for (const auto& [l, r] : t) {
        for (const auto& [a, b] : full_coproduct(l)) flip(left, {a, b, r});
        for (const auto& [a, b] : full_coproduct(r)) flip(right, {l, a, b});
    }
    if (left != right) throw std::logic_error("cobar: coproduct is not coassociative");
}

struct DegreeTable {
    std::vector<std::vector<TensorPair>> by_index;
};

const DegreeTable& coproduct_table(int d) {
    static std::mutex mu;
    static std::map<int, DegreeTable> tables;
    std::lock_guard<std::mutex> lock(mu);
    auto it = tables.find(d);
    if (it != tables.end()) return it->second;
    DegreeTable table;
    const auto& basis = milnor_basis(d);
    table.by_index.resize(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        Expo e(basis[i].r.begin(), basis[i].r.end());
        Tensor t = full_coproduct(e);
        check_counit(e, t);
        if (d <= 12) check_coassociative(t);
        std::vector<TensorPair> list;
        list.reserve(t.size());
        for (const auto& [l, r] : t) {
            auto [dl, il] = expo_id(l);
            auto [dr, ir] = expo_id(r);
            list.push_back({dl, il, dr, ir});
        }
        std::sort(list.begin(), list.end());
        table.by_index[i] = std::move(list);
    }
    return tables.emplace(d, std::move(table)).first->second;
}

}  // namespace

std::string dual_to_string(const MilnorSq& exponents) {
    if (exponents.r.empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < exponents.r.size(); ++i) {
        if (exponents.r[i] == 0) continue;
        if (!out.empty()) out += "*";
        out += "xi" + std::to_string(i + 1);
        if (exponents.r[i] > 1) out += "^" + std::to_string(exponents.r[i]);
    }
    return out;
}

const std::vector<TensorPair>& coproduct(int d, int i) {
    if (d < 0 || i < 0 || i >= milnor_dim(d))
        throw std::invalid_argument("coproduct: no such basis element");
    return coproduct_table(d).by_index[static_cast<std::size_t>(i)];
}

std::vector<CoactionTerm> coaction(const mod::GradedModule& m, int n) {
    if (!m.has_cell(n)) throw std::invalid_argument("coaction: no such cell");
    std::vector<CoactionTerm> out;
    out.push_back({0, 0, n});
    for (int cell : m.cells()) {
        if (cell >= n) break;
        int d = n - cell;
        f2::BitVector row = m.act_row(d, cell);
        for (int i = 0; i < milnor_dim(d); ++i)
            if (row.get(static_cast<std::size_t>(i))) out.push_back({d, i, cell});
    }
    std::sort(out.begin(), out.end());
    return out;
}

int CobarExt::dim(int s, int t) const {
    auto it = dims.find({s, t});
    return it == dims.end() ? 0 : it->second;
}

namespace {

// Basis element of cobar degree s: s algebra factors (degree, index), all of
// positive degree, followed by the cell; flattened to ints for ordering.
using CobarKey = std::vector<int>;

}  // namespace

CobarExt cobar_ext(const mod::ModulePtr& m, int s_cap, int t_cap) {
    if (!m) throw std::invalid_argument("cobar_ext: null module");
    if (s_cap < 0 || s_cap > 3)
        throw std::invalid_argument("cobar_ext: filtration cap must be between 0 and 3");
    if (t_cap > 14) throw std::invalid_argument("cobar_ext: internal degree cap must be <= 14");

    CobarExt out;
    out.s_cap = s_cap;
    out.t_cap = t_cap;
    if (m->empty() || t_cap < m->bottom()) return out;
    int t0 = m->bottom();

    // Enumerate bases for s = 0 .. s_cap + 1, grouped by internal degree.
    std::vector<std::vector<std::vector<CobarKey>>> basis_by_s_t(
        static_cast<std::size_t>(s_cap) + 2);
    for (int s = 0; s <= s_cap + 1; ++s) {
        auto& by_t = basis_by_s_t[static_cast<std::size_t>(s)];
        by_t.resize(static_cast<std::size_t>(t_cap - t0) + 1);
        // Recursive composition: choose factor degrees >= 1 left to right.
        std::vector<int> prefix;
        auto rec = [&](auto&& self, int placed, int deg_used) -> void {
            if (placed == s) {
                for (int cell : m->cells()) {
                    if (cell < t0 || deg_used + cell > t_cap) continue;
                    CobarKey key = prefix;
                    key.push_back(cell);
                    by_t[static_cast<std::size_t>(deg_used + cell - t0)].push_back(key);
                }
                return;
            }
            for (int d = 1; deg_used + d + (s - placed - 1) + m->bottom() <= t_cap; ++d) {
                for (int i = 0; i < milnor_dim(d); ++i) {
                    prefix.push_back(d);
                    prefix.push_back(i);
                    self(self, placed + 1, deg_used + d);
                    prefix.pop_back();
                    prefix.pop_back();
                }
            }
        };
        rec(rec, 0, 0);
    }

    for (auto& by_t : basis_by_s_t)
        for (auto& list : by_t) std::sort(list.begin(), list.end());

    // Coactions of each cell, computed once.
    std::map<int, std::vector<CoactionTerm>> coaction_of;
    for (int cell : m->cells()) coaction_of[cell] = coaction(*m, cell);

    // Differential d^s at one internal degree, stored transposed: row c is
    // d(c) expressed in the level-(s+1) basis. The transposed orientation
    // keeps the smaller side as rows, which is what elimination cost tracks.
    auto matrix_t = [&](int s, int ti) {
        const auto& src = basis_by_s_t[static_cast<std::size_t>(s)][static_cast<std::size_t>(ti)];
        const auto& tgt =
            basis_by_s_t[static_cast<std::size_t>(s + 1)][static_cast<std::size_t>(ti)];
        f2::BitMatrix mtx(src.size(), tgt.size());
        for (std::size_t c = 0; c < src.size(); ++c) {
            const CobarKey& key = src[c];
            int cell = key.back();
            auto flip = [&](const CobarKey& k) {
                auto it = std::lower_bound(tgt.begin(), tgt.end(), k);
                if (it == tgt.end() || *it != k)
                    throw std::logic_error("cobar: missing basis element");
                std::size_t r = static_cast<std::size_t>(it - tgt.begin());
                mtx.set(c, r, !mtx.get(c, r));
            };
            // Reduced coproducts of each algebra factor.
            for (int p = 0; p < s; ++p) {
                int d = key[static_cast<std::size_t>(2 * p)];
                int i = key[static_cast<std::size_t>(2 * p + 1)];
                for (const auto& tp : coproduct(d, i)) {
                    if (tp.dl == 0 || tp.dr == 0) continue;
                    CobarKey k;
                    k.reserve(key.size() + 2);
                    k.insert(k.end(), key.begin(), key.begin() + 2 * p);
                    k.push_back(tp.dl);
                    k.push_back(tp.il);
                    k.push_back(tp.dr);
                    k.push_back(tp.ir);
                    k.insert(k.end(), key.begin() + 2 * (p + 1), key.end());
                    flip(k);
                }
            }
            // Reduced coaction of the cell, inserted next to it.
            for (const auto& ct : coaction_of.at(cell)) {
                if (ct.da == 0) continue;
                CobarKey k(key.begin(), key.end() - 1);
                k.push_back(ct.da);
                k.push_back(ct.ia);
                k.push_back(ct.cell);
                flip(k);
            }
        }
        return mtx;
    };

    for (int ti = 0; ti <= t_cap - t0; ++ti) {
        std::vector<f2::BitMatrix> dt(static_cast<std::size_t>(s_cap) + 1);
        for (int s = 0; s <= s_cap; ++s) dt[static_cast<std::size_t>(s)] = matrix_t(s, ti);
        // d^2 = 0 sanity on every run; with transposed storage the composite
        // d^{s+1} o d^s is dt[s] * dt[s+1].
        for (int s = 0; s + 1 <= s_cap; ++s) {
            auto z = dt[static_cast<std::size_t>(s)].multiply(dt[static_cast<std::size_t>(s + 1)]);
            for (std::size_t r = 0; r < z.rows(); ++r)
                if (!z.row_is_zero(r))
                    throw std::logic_error("cobar: differential does not square to zero");
        }
        // Cocycle representatives for filtrations 0 and 1: kernel basis
        // vectors that are independent of the image span, in kernel order.
        // Must run before the destructive rank pass below.
        std::map<int, std::vector<std::string>> reps_here;
        for (int s = 0; s <= std::min(1, s_cap); ++s) {
            const auto& basis =
                basis_by_s_t[static_cast<std::size_t>(s)][static_cast<std::size_t>(ti)];
            if (basis.empty()) continue;
            auto cycles = f2::kernel_basis(f2::transpose(dt[static_cast<std::size_t>(s)]));
            f2::RowSpan image(basis.size());
            if (s > 0) {
                const auto& prev = dt[static_cast<std::size_t>(s - 1)];
                for (std::size_t r = 0; r < prev.rows(); ++r) image.add(prev.row_copy(r));
            }
            auto& words = reps_here[s];
            for (auto& v : cycles) {
                if (!image.add(v)) continue;  // a boundary: not a new class
                std::string word;
                for (std::size_t j = 0; j < basis.size(); ++j) {
                    if (!v.get(j)) continue;
                    const CobarKey& k = basis[j];
                    std::string el = "[";
                    for (int p = 0; p < s; ++p) {
                        int d = k[static_cast<std::size_t>(2 * p)];
                        int i = k[static_cast<std::size_t>(2 * p + 1)];
                        el += dual_to_string(milnor_basis(d)[static_cast<std::size_t>(i)]);
                        el += " | ";
                    }
                    el += "y" + std::to_string(k.back()) + "]";
                    if (!word.empty()) word += " + ";
                    word += el;
                }
                words.push_back(std::move(word));
            }
        }
        std::vector<std::size_t> rank(static_cast<std::size_t>(s_cap) + 1);
        for (int s = 0; s <= s_cap; ++s)
            rank[static_cast<std::size_t>(s)] =
                f2::rank_destructive(dt[static_cast<std::size_t>(s)]);
        for (int s = 0; s <= s_cap; ++s) {
            std::size_t dim_c =
                basis_by_s_t[static_cast<std::size_t>(s)][static_cast<std::size_t>(ti)].size();
            std::size_t rank_in = s == 0 ? 0 : rank[static_cast<std::size_t>(s - 1)];
            std::size_t h = dim_c - rank[static_cast<std::size_t>(s)] - rank_in;
            if (s <= 1) {
                const auto& words = reps_here[s];
                if (words.size() != h)
                    throw std::logic_error("cobar: representative count disagrees with rank count");
                if (h > 0) out.reps[{s, ti + t0}] = words;
            }
            if (h > 0) out.dims[{s, ti + t0}] = static_cast<int>(h);
        }
    }
    return out;
}

}  // namespace bext::cobar
