#include "bext/adem.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

#include "bext/milnor.hpp"

namespace bext::steenrod {

namespace {

// binom(n, k) mod 2 for n, k >= 0 (Lucas: no shared bits between k and n-k).
bool odd_binom(long long n, long long k) {
    if (k < 0 || n < 0 || k > n) return false;
    return ((k & (n - k)) == 0);
}

std::mutex g_adm_mu;
std::map<int, std::vector<AdmissibleSq>> g_adm_basis;

// Build all admissible words of degree d; memoized via admissible_basis.
std::vector<AdmissibleSq> build_admissible(int d) {
    std::vector<AdmissibleSq> out;
    if (d == 0) {
        out.emplace_back();
        return out;
    }
    for (int a1 = 1; a1 <= d; ++a1) {
        for (const AdmissibleSq& tail : admissible_basis(d - a1)) {
            if (!tail.a.empty() && 2 * tail.a.front() > static_cast<unsigned>(a1)) continue;
            std::vector<unsigned> w;
            w.reserve(tail.a.size() + 1);
            w.push_back(static_cast<unsigned>(a1));
            w.insert(w.end(), tail.a.begin(), tail.a.end());
            out.emplace_back(std::move(w));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

int AdmissibleSq::degree() const {
    int d = 0;
    for (unsigned v : a) d += static_cast<int>(v);
    return d;
}

std::string AdmissibleSq::to_string() const {
    if (a.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ' ';
        s += "Sq^" + std::to_string(a[i]);
    }
    return s;
}

const std::vector<AdmissibleSq>& admissible_basis(int d) {
    if (d < 0) {
        static const std::vector<AdmissibleSq> empty;
        return empty;
    }
    {
        std::lock_guard<std::mutex> lock(g_adm_mu);
        auto it = g_adm_basis.find(d);
        if (it != g_adm_basis.end()) return it->second;
    }
    // Build outside the lock; build_admissible recurses into smaller degrees.
    std::vector<AdmissibleSq> out = build_admissible(d);
    std::lock_guard<std::mutex> lock(g_adm_mu);
    return g_adm_basis.emplace(d, std::move(out)).first->second;
}

int admissible_dim(int d) { return static_cast<int>(admissible_basis(d).size()); }

int admissible_index(const AdmissibleSq& w) {
    const auto& basis = admissible_basis(w.degree());
    auto it = std::lower_bound(basis.begin(), basis.end(), w);
    if (it == basis.end() || !(*it == w))
        throw std::logic_error("admissible_index: word is not admissible");
    return static_cast<int>(it - basis.begin());
}

f2::BitVector adem_expand_word(const std::vector<unsigned>& word) {
    std::vector<unsigned> start;
    int d = 0;
    for (unsigned v : word) {
        if (v != 0) start.push_back(v);  // Sq^0 is the identity
        d += static_cast<int>(v);
    }
    f2::BitVector result(static_cast<std::size_t>(admissible_dim(d)));
    std::vector<std::vector<unsigned>> work{std::move(start)};
    while (!work.empty()) {
        std::vector<unsigned> w = std::move(work.back());
        work.pop_back();
        std::size_t bad = w.size();
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (w[i] < 2 * w[i + 1]) {
                bad = i;
                break;
            }
        }
        if (bad == w.size()) {
            result.xor_bit(static_cast<std::size_t>(admissible_index(AdmissibleSq(w))));
            continue;
        }
        // Adem relation on the leftmost inadmissible pair (a, b), a < 2b:
        // Sq^a Sq^b = sum_c binom(b-c-1, a-2c) Sq^{a+b-c} Sq^c.
        unsigned a = w[bad], b = w[bad + 1];
        for (unsigned c = 0; 2 * c <= a; ++c) {
            if (!odd_binom(static_cast<long long>(b) - c - 1,
                           static_cast<long long>(a) - 2 * c))
                continue;
            std::vector<unsigned> next(w.begin(), w.begin() + static_cast<long>(bad));
            next.push_back(a + b - c);
            if (c != 0) next.push_back(c);
            next.insert(next.end(), w.begin() + static_cast<long>(bad) + 2, w.end());
            work.push_back(std::move(next));
        }
    }
    return result;
}

f2::BitVector adem_product(const AdmissibleSq& x, const AdmissibleSq& y) {
    std::vector<unsigned> word = x.a;
    word.insert(word.end(), y.a.begin(), y.a.end());
    return adem_expand_word(word);
}

struct BasisBridge::Entry {
    f2::BitMatrix a2m;    // rows: admissible elts in milnor coords
    f2::BitMatrix a2m_t;  // transpose, applied for admissible -> milnor
    f2::BitMatrix m2a;    // inverse transpose: milnor -> admissible
    bool ready = false;
};

BasisBridge& BasisBridge::instance() {
    static BasisBridge bridge;
    return bridge;
}

BasisBridge::Entry& BasisBridge::entry(int d) {
    static std::mutex g_bridge_mu;
    static std::map<int, Entry> g_bridge;
    {
        std::lock_guard<std::mutex> lock(g_bridge_mu);
        auto it = g_bridge.find(d);
        if (it != g_bridge.end() && it->second.ready) return it->second;
    }
    const auto& adm = admissible_basis(d);
    int n = milnor_dim(d);
    if (static_cast<int>(adm.size()) != n)
        throw std::logic_error("basis bridge: admissible and Milnor dimensions differ");
    Entry e;
    e.a2m = f2::BitMatrix(adm.size(), static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < adm.size(); ++i) {
        // Expand Sq^{a1}...Sq^{ak} by repeated left multiplication, rightmost
        // factor first, entirely on the Milnor side.
        f2::BitVector v(1);
        v.set(0, true);
        int dv = 0;
        for (auto it = adm[i].a.rbegin(); it != adm[i].a.rend(); ++it) {
            int da = static_cast<int>(*it);
            MilnorSq single({*it});
            int ia = milnor_index(single);
            f2::BitVector next(static_cast<std::size_t>(milnor_dim(dv + da)));
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (!v.get(j)) continue;
                next.xor_with(AlgebraTable::instance().product(da, ia, dv, static_cast<int>(j)));
            }
            v = std::move(next);
            dv += da;
        }
        for (std::size_t c = 0; c < v.size(); ++c) e.a2m.set(i, c, v.get(c));
    }
    // Invert once: column j of m2a expresses Milnor element j in admissible
    // coordinates, i.e. solves a2m^T x = e_j.
    e.a2m_t = f2::transpose(e.a2m);
    f2::LinearSystem sys(e.a2m_t);
    e.m2a = f2::BitMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        f2::BitVector rhs(static_cast<std::size_t>(n));
        rhs.set(static_cast<std::size_t>(j), true);
        auto x = sys.solve(rhs);
        if (!x) throw std::logic_error("basis bridge: change of basis is not invertible");
        for (int i = 0; i < n; ++i) e.m2a.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), x->get(static_cast<std::size_t>(i)));
    }
    e.ready = true;
    std::lock_guard<std::mutex> lock(g_bridge_mu);
    Entry& slot = g_bridge[d];
    if (!slot.ready) slot = std::move(e);
    return slot;
}

const f2::BitMatrix& BasisBridge::admissible_to_milnor(int d) { return entry(d).a2m; }

f2::BitVector BasisBridge::to_admissible(int d, const f2::BitVector& milnor_coeffs) {
    // m2a columns are admissible coords of Milnor elements: x = m2a * v.
    return entry(d).m2a.apply(milnor_coeffs);
}

f2::BitVector BasisBridge::to_milnor(int d, const f2::BitVector& admissible_coeffs) {
    return entry(d).a2m_t.apply(admissible_coeffs);
}

}  // namespace bext::steenrod
