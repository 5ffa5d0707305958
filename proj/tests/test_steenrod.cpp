// Steenrod algebra: Milnor basis/product vs the independent Adem-rewriting
// implementation, plus the change-of-basis bridge.
#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <vector>

#include "bext/adem.hpp"
#include "bext/f2.hpp"
#include "bext/milnor.hpp"

using bext::f2::BitVector;
using namespace bext::steenrod;

namespace {

// Independent dimension count: number of ways to write d as
// sum r_i * (2^i - 1), computed by a direct DP unrelated to the enumerators.
long long dim_by_partition_dp(int d) {
    std::vector<long long> ways(static_cast<std::size_t>(d) + 1, 0);
    ways[0] = 1;
    for (int i = 1; (1 << i) - 1 <= d; ++i) {
        int part = (1 << i) - 1;
        for (int v = part; v <= d; ++v)
            ways[static_cast<std::size_t>(v)] += ways[static_cast<std::size_t>(v - part)];
    }
    return ways[static_cast<std::size_t>(d)];
}

BitVector singleton(int dim, int idx) {
    BitVector v(static_cast<std::size_t>(dim));
    v.set(static_cast<std::size_t>(idx), true);
    return v;
}

// Milnor coordinates of the product of two homogeneous Milnor-coefficient
// vectors, by bilinear extension.
BitVector milnor_vec_product(int da, const BitVector& a, int db, const BitVector& b) {
    BitVector out(static_cast<std::size_t>(milnor_dim(da + db)));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a.get(i)) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!b.get(j)) continue;
            out.xor_with(AlgebraTable::instance().product(da, static_cast<int>(i), db,
                                                          static_cast<int>(j)));
        }
    }
    return out;
}

// The canonical admissible <-> Milnor pairing (a1,...,ak) -> (a1-2a2,...,ak).
std::vector<unsigned> paired_tuple(const AdmissibleSq& w) {
    std::vector<unsigned> r(w.a.size());
    for (std::size_t i = 0; i < w.a.size(); ++i) {
        unsigned next = (i + 1 < w.a.size()) ? w.a[i + 1] : 0;
        REQUIRE(w.a[i] >= 2 * next);
        r[i] = w.a[i] - 2 * next;
    }
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

// Right-to-left lexicographic comparison of exponent tuples (pad with zeros,
// compare highest position first). The bridge is triangular for this order.
int revlex_cmp(std::vector<unsigned> a, std::vector<unsigned> b) {
    std::size_t n = std::max(a.size(), b.size());
    a.resize(n, 0);
    b.resize(n, 0);
    for (std::size_t k = n; k-- > 0;)
        if (a[k] != b[k]) return a[k] < b[k] ? -1 : 1;
    return 0;
}

}  // namespace

TEST_CASE("Milnor basis: frozen small cases and lex order") {
    REQUIRE(milnor_dim(0) == 1);
    REQUIRE(milnor_basis(0)[0].is_unit());
    REQUIRE(milnor_dim(1) == 1);
    REQUIRE(milnor_basis(1)[0].r == std::vector<unsigned>{1});

    // Degree 3 is {Sq(0,1), Sq(3)} in lex order.
    REQUIRE(milnor_dim(3) == 2);
    REQUIRE(milnor_basis(3)[0].r == std::vector<unsigned>({0, 1}));
    REQUIRE(milnor_basis(3)[1].r == std::vector<unsigned>({3}));

    // Degree 7 is {Sq(0,0,1), Sq(1,2), Sq(4,1), Sq(7)} in lex order.
    REQUIRE(milnor_dim(7) == 4);
    REQUIRE(milnor_basis(7)[0].r == std::vector<unsigned>({0, 0, 1}));
    REQUIRE(milnor_basis(7)[1].r == std::vector<unsigned>({1, 2}));
    REQUIRE(milnor_basis(7)[2].r == std::vector<unsigned>({4, 1}));
    REQUIRE(milnor_basis(7)[3].r == std::vector<unsigned>({7}));

    for (int d = 0; d <= 45; ++d) {
        INFO("degree " << d);
        REQUIRE(milnor_dim(d) == dim_by_partition_dp(d));
        // milnor_index inverts the enumeration.
        for (int i = 0; i < milnor_dim(d); ++i)
            REQUIRE(milnor_index(milnor_basis(d)[static_cast<std::size_t>(i)]) == i);
    }
}

TEST_CASE("Milnor products: frozen hand computations") {
    MilnorSq sq1({1}), sq2({2}), sq3({3});

    // Sq^1 Sq^1 = 0.
    REQUIRE(milnor_product(sq1, sq1).is_zero());

    // Sq^1 Sq^2 = Sq^3 = Sq(3).
    BitVector p12 = milnor_product(sq1, sq2);
    REQUIRE(p12 == singleton(2, milnor_index(sq3)));

    // Sq^2 Sq^1 = Sq(3) + Sq(0,1).
    BitVector p21 = milnor_product(sq2, sq1);
    BitVector expect21 = singleton(2, milnor_index(sq3));
    expect21.xor_bit(static_cast<std::size_t>(milnor_index(MilnorSq({0, 1}))));
    REQUIRE(p21 == expect21);

    // Sq^3 Sq^1 = Sq(1,1) exactly.
    BitVector p31 = milnor_product(sq3, sq1);
    REQUIRE(p31 == singleton(milnor_dim(4), milnor_index(MilnorSq({1, 1}))));

    // Sq^2 Sq^2 = Sq(1,1) as well (Adem: Sq^2 Sq^2 = Sq^3 Sq^1).
    REQUIRE(milnor_product(sq2, sq2) == p31);

    // Unit acts as identity on both sides.
    MilnorSq unit;
    REQUIRE(milnor_product(unit, sq3) == singleton(2, milnor_index(sq3)));
    REQUIRE(milnor_product(sq3, unit) == singleton(2, milnor_index(sq3)));
}

TEST_CASE("Admissible basis and Adem rewriting: frozen small cases") {
    // Degree 3: {Sq^2 Sq^1, Sq^3} in lex order.
    REQUIRE(admissible_dim(3) == 2);
    REQUIRE(admissible_basis(3)[0].a == std::vector<unsigned>({2, 1}));
    REQUIRE(admissible_basis(3)[1].a == std::vector<unsigned>({3}));

    // Sq^1 Sq^1 = 0; Sq^1 Sq^2 = Sq^3; Sq^2 Sq^2 = Sq^3 Sq^1.
    REQUIRE(adem_expand_word({1, 1}).is_zero());
    REQUIRE(adem_expand_word({1, 2}) ==
            singleton(2, admissible_index(AdmissibleSq({3}))));
    REQUIRE(adem_expand_word({2, 2}) ==
            singleton(admissible_dim(4), admissible_index(AdmissibleSq({3, 1}))));

    // Sq^0 factors are dropped.
    REQUIRE(adem_expand_word({0, 3, 0}) ==
            singleton(2, admissible_index(AdmissibleSq({3}))));

    // Admissible and Milnor bases have equal dimension in every degree.
    for (int d = 0; d <= 45; ++d) {
        INFO("degree " << d);
        REQUIRE(admissible_dim(d) == milnor_dim(d));
        for (int i = 0; i < admissible_dim(d); ++i)
            REQUIRE(admissible_index(admissible_basis(d)[static_cast<std::size_t>(i)]) == i);
    }
}

TEST_CASE("Basis bridge is unitriangular under the standard pairing") {
    for (int d = 0; d <= 20; ++d) {
        INFO("degree " << d);
        const auto& adm = admissible_basis(d);
        const bext::f2::BitMatrix& a2m = BasisBridge::instance().admissible_to_milnor(d);
        REQUIRE(a2m.rows() == adm.size());
        REQUIRE(a2m.cols() == static_cast<std::size_t>(milnor_dim(d)));
        std::map<int, int> pair_seen;
        for (std::size_t i = 0; i < adm.size(); ++i) {
            MilnorSq paired(paired_tuple(adm[i]));
            REQUIRE(paired.degree() == d);
            int pi = milnor_index(paired);
            // Diagonal coefficient 1; every other term is strictly smaller in
            // right-to-left lex order on exponent tuples.
            REQUIRE(a2m.get(i, static_cast<std::size_t>(pi)));
            for (std::size_t c = 0; c < a2m.cols(); ++c) {
                if (!a2m.get(i, c) || c == static_cast<std::size_t>(pi)) continue;
                REQUIRE(revlex_cmp(milnor_basis(d)[c].r, paired.r) < 0);
            }
            REQUIRE(pair_seen.emplace(pi, static_cast<int>(i)).second);
        }
        // The pairing is onto, hence a bijection.
        REQUIRE(pair_seen.size() == adm.size());
    }
}

TEST_CASE("Bridge roundtrips coefficient vectors both ways") {
    std::mt19937_64 rng(20260815u);
    for (int d = 0; d <= 24; ++d) {
        int n = milnor_dim(d);
        for (int trial = 0; trial < 8; ++trial) {
            BitVector x(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) x.set(static_cast<std::size_t>(i), rng() & 1);
            BitVector m = BasisBridge::instance().to_milnor(d, x);
            REQUIRE(BasisBridge::instance().to_admissible(d, m) == x);
            BitVector a = BasisBridge::instance().to_admissible(d, m);
            REQUIRE(BasisBridge::instance().to_milnor(d, a) == m);
        }
    }
}

TEST_CASE("Milnor and Adem products agree under the bridge, exhaustively") {
    auto& bridge = BasisBridge::instance();
    for (int d1 = 0; d1 <= 16; ++d1) {
        for (int d2 = 0; d1 + d2 <= 16; ++d2) {
            const auto& b1 = admissible_basis(d1);
            const auto& b2 = admissible_basis(d2);
            for (std::size_t i = 0; i < b1.size(); ++i) {
                for (std::size_t j = 0; j < b2.size(); ++j) {
                    // Adem side, converted to Milnor coordinates.
                    BitVector adem_side =
                        bridge.to_milnor(d1 + d2, adem_product(b1[i], b2[j]));
                    // Milnor side: multiply the Milnor expansions bilinearly.
                    BitVector x = bridge.to_milnor(d1, singleton(admissible_dim(d1),
                                                                 static_cast<int>(i)));
                    BitVector y = bridge.to_milnor(d2, singleton(admissible_dim(d2),
                                                                 static_cast<int>(j)));
                    BitVector milnor_side = milnor_vec_product(d1, x, d2, y);
                    INFO(b1[i].to_string() << " * " << b2[j].to_string());
                    REQUIRE(adem_side == milnor_side);
                }
            }
        }
    }
}

TEST_CASE("Milnor product is associative") {
    for (int d1 = 1; d1 <= 7; ++d1)
        for (int d2 = 1; d1 + d2 <= 12; ++d2)
            for (int d3 = 1; d1 + d2 + d3 <= 14; ++d3) {
                const auto& b1 = milnor_basis(d1);
                const auto& b2 = milnor_basis(d2);
                const auto& b3 = milnor_basis(d3);
                for (std::size_t i = 0; i < b1.size(); ++i)
                    for (std::size_t j = 0; j < b2.size(); ++j)
                        for (std::size_t k = 0; k < b3.size(); ++k) {
                            BitVector ab = milnor_product(b1[i], b2[j]);
                            BitVector bc = milnor_product(b2[j], b3[k]);
                            BitVector left = milnor_vec_product(
                                d1 + d2, ab, d3,
                                singleton(milnor_dim(d3), static_cast<int>(k)));
                            BitVector right = milnor_vec_product(
                                d1, singleton(milnor_dim(d1), static_cast<int>(i)),
                                d2 + d3, bc);
                            INFO(b1[i].to_string() << " * " << b2[j].to_string() << " * "
                                                   << b3[k].to_string());
                            REQUIRE(left == right);
                        }
            }
}

TEST_CASE("AlgebraTable caches consistently") {
    AlgebraTable::instance().precompute(12);
    MilnorSq a({2, 1}), b({1, 1});
    BitVector direct = milnor_product(a, b);
    BitVector cached = AlgebraTable::instance().product(a.degree(), milnor_index(a),
                                                        b.degree(), milnor_index(b));
    REQUIRE(direct == cached);
    // Second lookup hits the cache and must return the same value.
    REQUIRE(AlgebraTable::instance().product(a.degree(), milnor_index(a), b.degree(),
                                             milnor_index(b)) == direct);
}
