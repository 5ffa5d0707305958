#include "bext/milnor.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace bext::steenrod {

namespace {

// Degree contributed by exponent r at position i (1-based): r * (2^i - 1).
long long position_weight(int i) { return (1LL << i) - 1; }

void strip_trailing_zeros(std::vector<unsigned>& v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
}

// Enumerate exponent tuples of total degree `remaining`, extending `prefix`
// at position `pos` (1-based). Emitting as soon as the degree is exhausted
// (and returning) yields each stripped tuple exactly once, in lex order.
void enumerate_basis(int remaining, int pos, std::vector<unsigned>& prefix,
                     std::vector<MilnorSq>& out) {
    if (remaining == 0) {
        std::vector<unsigned> tuple = prefix;
        strip_trailing_zeros(tuple);
        out.push_back(MilnorSq(std::move(tuple)));
        return;
    }
    long long w = position_weight(pos);
    if (w > remaining) return;  // weights only grow with position
    for (unsigned v = 0; static_cast<long long>(v) * w <= remaining; ++v) {
        prefix.push_back(v);
        enumerate_basis(remaining - static_cast<int>(v * w), pos + 1, prefix, out);
        prefix.pop_back();
    }
}

std::mutex g_basis_mu;
std::map<int, std::vector<MilnorSq>> g_basis;  // node-based: stable refs

}  // namespace

MilnorSq::MilnorSq(std::vector<unsigned> rr) : r(std::move(rr)) {
    strip_trailing_zeros(r);
}

int MilnorSq::degree() const {
    long long d = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
        d += static_cast<long long>(r[i]) * position_weight(static_cast<int>(i) + 1);
    return static_cast<int>(d);
}

std::string MilnorSq::to_string() const {
    if (r.empty()) return "1";
    std::string s = "Sq(";
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(r[i]);
    }
    s += ')';
    return s;
}

const std::vector<MilnorSq>& milnor_basis(int d) {
    if (d < 0) {
        static const std::vector<MilnorSq> empty;
        return empty;
    }
    std::lock_guard<std::mutex> lock(g_basis_mu);
    auto it = g_basis.find(d);
    if (it != g_basis.end()) return it->second;
    std::vector<MilnorSq> out;
    if (d == 0) {
        out.push_back(MilnorSq{});
    } else {
        std::vector<unsigned> prefix;
        enumerate_basis(d, 1, prefix, out);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return g_basis.emplace(d, std::move(out)).first->second;
}

int milnor_dim(int d) { return static_cast<int>(milnor_basis(d).size()); }

int milnor_index(const MilnorSq& m) {
    const auto& basis = milnor_basis(m.degree());
    auto it = std::lower_bound(basis.begin(), basis.end(), m);
    if (it == basis.end() || !(*it == m))
        throw std::logic_error("milnor_index: element not in basis of its degree");
    return static_cast<int>(it - basis.begin());
}

namespace {

// State for the Milnor-matrix walk computing Sq(R) * Sq(S).
// Matrices x[i][j] (i=0..m, j=0..n, (0,0) unused) satisfy
//   r_i = sum_j 2^j x[i][j]   (left factor: row sums weighted by column),
//   s_j = sum_i x[i][j]       (right factor: plain column sums),
// and contribute Sq(t) with t_k = sum_{i+j=k} x[i][j] when every
// anti-diagonal multinomial coefficient is odd.
struct ProductWalk {
    const std::vector<unsigned>& R;
    const std::vector<unsigned>& S;
    int m, n;
    std::vector<unsigned long long> row_rem;     // index 1..m, 2^j-weighted budget
    std::vector<unsigned> col_rem;               // index 1..n
    std::vector<std::vector<unsigned>> x;        // (m+1) x (n+1)
    f2::BitVector* out;

    void leaf() {
        // Fill the border: x[i][0] from leftover rows, x[0][j] from columns.
        for (int i = 1; i <= m; ++i)
            x[static_cast<std::size_t>(i)][0] =
                static_cast<unsigned>(row_rem[static_cast<std::size_t>(i)]);
        for (int j = 1; j <= n; ++j) x[0][static_cast<std::size_t>(j)] = col_rem[static_cast<std::size_t>(j)];
        // Coefficient is odd iff on every anti-diagonal the entries have
        // pairwise disjoint binary expansions (no carries in their sum).
        std::vector<unsigned> t;
        t.assign(static_cast<std::size_t>(m + n) + 1, 0);
        for (int k = 1; k <= m + n; ++k) {
            unsigned acc = 0;
            unsigned sum = 0;
            for (int i = std::max(0, k - n); i <= std::min(m, k); ++i) {
                unsigned v = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(k - i)];
                if (acc & v) return;  // even multinomial
                acc |= v;
                sum += v;
            }
            t[static_cast<std::size_t>(k)] = sum;
        }
        t.erase(t.begin());
        MilnorSq result(std::move(t));
        out->xor_bit(static_cast<std::size_t>(milnor_index(result)));
    }

    // Assign x[i][j] over interior cells in row-major order.
    void step(int i, int j) {
        if (j > n) {
            ++i;
            j = 1;
        }
        if (i > m) {
            leaf();
            return;
        }
        unsigned cap = static_cast<unsigned>(std::min<unsigned long long>(
            row_rem[static_cast<std::size_t>(i)] >> j, col_rem[static_cast<std::size_t>(j)]));
        for (unsigned v = 0; v <= cap; ++v) {
            row_rem[static_cast<std::size_t>(i)] -= static_cast<unsigned long long>(v) << j;
            col_rem[static_cast<std::size_t>(j)] -= v;
            x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
            step(i, j + 1);
            row_rem[static_cast<std::size_t>(i)] += static_cast<unsigned long long>(v) << j;
            col_rem[static_cast<std::size_t>(j)] += v;
        }
        x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 0;
    }
};

}  // namespace

f2::BitVector milnor_product(const MilnorSq& a, const MilnorSq& b) {
    int dout = a.degree() + b.degree();
    f2::BitVector out(static_cast<std::size_t>(milnor_dim(dout)));
    if (a.is_unit() || b.is_unit()) {
        const MilnorSq& other = a.is_unit() ? b : a;
        out.set(static_cast<std::size_t>(milnor_index(other)), true);
        return out;
    }
    ProductWalk walk{a.r,
                     b.r,
                     static_cast<int>(a.r.size()),
                     static_cast<int>(b.r.size()),
                     {},
                     {},
                     {},
                     &out};
    walk.row_rem.assign(static_cast<std::size_t>(walk.m) + 1, 0);
    for (int i = 1; i <= walk.m; ++i)
        walk.row_rem[static_cast<std::size_t>(i)] = a.r[static_cast<std::size_t>(i - 1)];
    walk.col_rem.assign(static_cast<std::size_t>(walk.n) + 1, 0);
    for (int j = 1; j <= walk.n; ++j)
        walk.col_rem[static_cast<std::size_t>(j)] = b.r[static_cast<std::size_t>(j - 1)];
    walk.x.assign(static_cast<std::size_t>(walk.m) + 1,
                  std::vector<unsigned>(static_cast<std::size_t>(walk.n) + 1, 0));
    walk.step(1, 1);
    return out;
}

AlgebraTable& AlgebraTable::instance() {
    static AlgebraTable table;
    return table;
}

void AlgebraTable::precompute(int d_max) {
    for (int d = 0; d <= d_max; ++d) milnor_basis(d);
}

f2::BitVector AlgebraTable::product(int da, int ia, int db, int ib) {
    return product_ref(da, ia, db, ib);
}

const f2::BitVector& AlgebraTable::product_ref(int da, int ia, int db, int ib) {
    if (da < 0 || db < 0 || da > 0xFFFF || db > 0xFFFF || ia < 0 || ib < 0)
        throw std::invalid_argument("AlgebraTable::product: bad arguments");
    std::uint64_t key = (static_cast<std::uint64_t>(da) << 48) |
                        (static_cast<std::uint64_t>(db) << 32) |
                        (static_cast<std::uint64_t>(ia) << 16) |
                        static_cast<std::uint64_t>(ib);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    f2::BitVector result =
        milnor_product(milnor_basis(da)[static_cast<std::size_t>(ia)],
                       milnor_basis(db)[static_cast<std::size_t>(ib)]);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.try_emplace(key, std::move(result)).first->second;
}

}  // namespace bext::steenrod
