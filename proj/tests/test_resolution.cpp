// Tests for minimal resolutions, Ext charts, induced maps, connecting maps
// and Yoneda operators.
//
// Frozen expected values below come from two independent sources: classical
// facts about the mod-2 Steenrod algebra that are recomputed in-test from
// first principles (binomial parity, indecomposability of Sq^{2^i}), and the
// standard low-stem Ext chart of the sphere, which is stable textbook data.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "bext/f2.hpp"
#include "bext/milnor.hpp"
#include "bext/module.hpp"
#include "bext/resolution.hpp"

using namespace bext;
using Catch::Matchers::ContainsSubstring;

namespace {

// Exact Pascal-parity oracle, independent of the library's binom2.
class Pascal {
public:
    Pascal() {
        rows_.resize(kMax + 1);
        rows_[0] = {true};
        for (int n = 1; n <= kMax; ++n) {
            rows_[n].assign(n + 1, false);
            for (int k = 0; k <= n; ++k) {
                bool a = (k <= n - 1) && rows_[n - 1][k];
                bool b = (k >= 1) && rows_[n - 1][k - 1];
                rows_[n][k] = a != b;
            }
        }
    }
    // C(n, k) mod 2 for possibly negative n, via C(n,k) = +/- C(k-n-1, k).
    bool at(long long n, long long k) const {
        if (k < 0) return false;
        if (n < 0) return at(k - n - 1, k);
        if (k > n) return false;
        return rows_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    }

private:
    static constexpr int kMax = 400;
    std::vector<std::vector<bool>> rows_;
};

// Cells of the span module `cells` that are not in the image of any positive
// Steenrod operation from a lower cell; these must be exactly the degrees of
// the F_0 generators of a minimal resolution.
std::set<int> unhit_cells(const std::vector<int>& cells, const Pascal& pascal) {
    std::set<int> present(cells.begin(), cells.end());
    std::set<int> out;
    for (int n : cells) {
        bool hit = false;
        for (int m : cells) {
            if (m >= n) break;
            if (pascal.at(m, n - m)) hit = true;
        }
        if (!hit) out.insert(n);
    }
    return out;
}

}  // namespace

TEST_CASE("Sphere resolution reproduces the classical low-stem chart") {
    auto r = res::Resolution(mod::GradedModule::sphere(0), 8, 40);
    auto c = res::chart(r);

    SECTION("unit and first algebra generators") {
        CHECK(c.dim(0, 0) == 1);
        CHECK(c.dim(1, 1) == 1);
        CHECK(c.dim(1, 2) == 1);
        CHECK(c.dim(1, 4) == 1);
        CHECK(c.dim(2, 2) == 1);
        CHECK(c.dim(3, 3) == 1);
    }

    SECTION("s = 0 row vanishes away from the unit") {
        for (int t = 1; t <= 40; ++t) CHECK(c.dim(0, t) == 0);
    }

    SECTION("filtration-one line is exactly the indecomposables Sq^{2^i}") {
        for (int t = 1; t <= 40; ++t) {
            bool pow2 = (t & (t - 1)) == 0;
            CHECK(c.dim(1, t) == (pow2 ? 1 : 0));
        }
    }

    SECTION("stem-zero tower has dimension one in every filtration") {
        for (int s = 0; s <= 8; ++s) CHECK(c.dim(s, s) == 1);
    }

    SECTION("low stems match the standard chart") {
        // stem 1..8 data: (s, stem) -> dim
        for (int s = 1; s <= 8; ++s) {
            CHECK(c.dim(s, s + 1) == (s == 1 ? 1 : 0));  // stem 1
            CHECK(c.dim(s, s + 2) == (s == 2 ? 1 : 0));  // stem 2
            CHECK(c.dim(s, s + 3) == (s <= 3 ? 1 : 0));  // stem 3 tower
            CHECK(c.dim(s, s + 4) == 0);                 // stem 4 empty
            CHECK(c.dim(s, s + 5) == 0);                 // stem 5 empty
            CHECK(c.dim(s, s + 6) == (s == 2 ? 1 : 0));  // stem 6
            CHECK(c.dim(s, s + 7) == (s <= 4 ? 1 : 0));  // stem 7 tower
            CHECK(c.dim(s, s + 8) == (s == 2 || s == 3 ? 1 : 0));  // stem 8
        }
    }

    SECTION("generator names encode bidegree and ordinal") {
        CHECK(r.gen_name(0, 0) == "g0_0_0");
        REQUIRE(r.gen_count(1, 2) == 1);
        CHECK(r.gen_name(1, r.gen_start(1, 2)) == "g1_2_0");
    }
}

TEST_CASE("Resolutions are genuine minimal complexes") {
    auto modules = std::vector<mod::ModulePtr>{
        mod::GradedModule::sphere(0),
        mod::GradedModule::stunted(1, 8),
        mod::GradedModule::stunted(-5, -1),
    };
    for (const auto& m : modules) {
        int tmax = std::max(m->top() + 12, 14);
        auto r = res::Resolution(m, 5, tmax);
        INFO("module " << m->name());

        // Minimality: no differential entry has a unit coefficient.
        for (int s = 1; s <= 5; ++s)
            for (std::size_t j = 0; j < r.gens(s).size(); ++j)
                for (const auto& term : r.diff(s, static_cast<int>(j)).terms) {
                    int d = r.gens(s)[j].t - r.gens(s - 1)[static_cast<std::size_t>(term.gen)].t;
                    if (d == 0) CHECK_FALSE(term.coeffs.get(0));
                    CHECK(term.coeffs.size() == static_cast<std::size_t>(steenrod::milnor_dim(d)));
                }

        // Complex: composites of consecutive slice matrices vanish, including
        // the augmentation.
        for (int t = m->bottom(); t <= tmax; ++t)
            for (int s = 1; s <= 5; ++s) {
                auto a = r.slice_matrix(s - 1, t);
                auto b = r.slice_matrix(s, t);
                auto z = a.multiply(b);
                bool zero = true;
                for (std::size_t row = 0; row < z.rows(); ++row)
                    if (!z.row_is_zero(row)) zero = false;
                CHECK(zero);
            }

        // Exactness: the kernel of each slice map equals the image of the next.
        for (int t = m->bottom(); t <= tmax; ++t)
            for (int s = 0; s < 5; ++s) {
                auto a = r.slice_matrix(s, t);
                auto b = r.slice_matrix(s + 1, t);
                std::size_t ker = a.cols() - f2::rref(a).rank();
                CHECK(ker == f2::rref(b).rank());
            }
    }
}

TEST_CASE("F_0 generators are exactly the unhit cells") {
    Pascal pascal;
    for (const char* spec : {"P:1:8", "P:-5:-1", "P:-20:6", "DB:4:4"}) {
        auto m = mod::parse_module_spec(spec, 10).at(0).model;
        auto r = res::Resolution(m, 0, m->top());
        INFO("module " << m->name());
        std::set<int> expect = unhit_cells(m->cells(), pascal);
        std::set<int> got;
        for (const auto& g : r.gens(0)) got.insert(g.t);
        CHECK(got == expect);
    }
    // The length-8 real projective span has generators in degrees 1, 3, 7.
    auto r8 = res::Resolution(mod::GradedModule::stunted(1, 8), 0, 8);
    std::set<int> got;
    for (const auto& g : r8.gens(0)) got.insert(g.t);
    CHECK(got == std::set<int>{1, 3, 7});
}

TEST_CASE("Suspension shifts the whole resolution uniformly") {
    auto r0 = res::Resolution(mod::GradedModule::sphere(0), 6, 20);
    auto r3 = res::Resolution(mod::GradedModule::sphere(3), 6, 23);
    for (int s = 0; s <= 6; ++s) {
        REQUIRE(r0.gens(s).size() == r3.gens(s).size());
        for (std::size_t j = 0; j < r0.gens(s).size(); ++j) {
            CHECK(r0.gens(s)[j].t + 3 == r3.gens(s)[j].t);
            CHECK(r0.gens(s)[j].ordinal == r3.gens(s)[j].ordinal);
            if (s == 0) continue;
            const auto& d0 = r0.diff(s, static_cast<int>(j)).terms;
            const auto& d3 = r3.diff(s, static_cast<int>(j)).terms;
            REQUIRE(d0.size() == d3.size());
            for (std::size_t k = 0; k < d0.size(); ++k) {
                CHECK(d0[k].gen == d3[k].gen);
                CHECK(d0[k].coeffs == d3[k].coeffs);
            }
        }
    }
}

TEST_CASE("Empty modules resolve to nothing") {
    auto empty = mod::GradedModule::stunted(1, 4)->interval(5, 9);
    REQUIRE(empty->empty());
    auto r = res::Resolution(empty, 4, 10);
    for (int s = 0; s <= 4; ++s) CHECK(r.gens(s).empty());
}

TEST_CASE("Connecting map of a two-cell split is the expected isomorphism") {
    // 0 -> S^2 -> P(1,2) -> S^1 -> 0
    auto p12 = mod::GradedModule::stunted(1, 2);
    auto ses = mod::cell_sub(p12, 2);
    auto r_sub = res::Resolution(ses.sub, 5, 16);
    auto r_quot = res::Resolution(ses.quot, 6, 16);
    auto delta = res::connecting(ses, r_sub, r_quot);

    // Ext^{0,2}(S^2) -> Ext^{1,2}(S^1) is an isomorphism of lines.
    auto m = delta.get(0, 2);
    REQUIRE(m.rows() == 1);
    REQUIRE(m.cols() == 1);
    CHECK(m.get(0, 0));
}

TEST_CASE("Long exact sequence of a cell split is exact") {
    const int smax = 5, tmax = 14;
    for (auto [spec, cut] : std::vector<std::pair<const char*, int>>{
             {"P:1:2", 2}, {"P:1:4", 3}, {"P:-4:2", 0}}) {
        auto m = mod::parse_module_spec(spec, tmax).at(0).model;
        auto ses = mod::cell_sub(m, cut);
        INFO("module " << m->name() << " cut at " << cut);
        auto r_sub = res::Resolution(ses.sub, smax, tmax);
        auto r_mid = res::Resolution(ses.mid, smax, tmax);
        auto r_quot = res::Resolution(ses.quot, smax + 1, tmax);

        auto pi_star = res::induced_map(ses.projection, r_mid, r_quot);    // Ext(C) -> Ext(B)
        auto iota_star = res::induced_map(ses.inclusion, r_sub, r_mid);    // Ext(B) -> Ext(A)
        auto delta = res::connecting(ses, r_sub, r_quot);                  // Ext(A) -> Ext^{+1}(C)

        for (int s = 0; s < smax; ++s)
            for (int t = m->bottom(); t <= tmax; ++t) {
                auto mp = pi_star.get(s, t);
                auto mi = iota_star.get(s, t);
                auto md = delta.get(s, t);
                auto mp1 = pi_star.get(s + 1, t);

                // Consecutive composites vanish.
                auto z1 = mi.multiply(mp);
                auto z2 = md.multiply(mi);
                auto z3 = mp1.multiply(md);
                for (auto* z : {&z1, &z2, &z3})
                    for (std::size_t row = 0; row < z->rows(); ++row)
                        CHECK(z->row_is_zero(row));

                // Rank identities: im = ker at each joint.
                std::size_t rank_p = f2::rref(mp).rank();
                std::size_t rank_i = f2::rref(mi).rank();
                std::size_t rank_d = f2::rref(md).rank();
                std::size_t rank_p1 = f2::rref(mp1).rank();
                CHECK(rank_p + rank_i == mp.rows());            // at Ext^s(B)
                CHECK(rank_i + rank_d == md.cols());            // at Ext^s(A)
                CHECK(rank_d + rank_p1 == mp1.cols());          // at Ext^{s+1}(C)
            }
    }
}

TEST_CASE("Induced maps are functorial") {
    const int smax = 4, tmax = 14;
    auto p34 = mod::GradedModule::stunted(3, 4);
    auto p24 = mod::GradedModule::stunted(2, 4);
    auto p14 = mod::GradedModule::stunted(1, 4);
    auto r34 = res::Resolution(p34, smax, tmax);
    auto r24 = res::Resolution(p24, smax, tmax);
    auto r14 = res::Resolution(p14, smax, tmax);

    auto f = mod::ModuleMap::cellwise(p34, p24);
    auto g = mod::ModuleMap::cellwise(p24, p14);
    auto gf = mod::compose(g, f);

    auto direct = res::induced_map(gf, r34, r14);
    auto stepped = res::compose_ext(res::induced_map(f, r34, r24), res::induced_map(g, r24, r14));
    for (int s = 0; s <= smax; ++s)
        for (int t = 1; t <= tmax; ++t) CHECK(direct.get(s, t) == stepped.get(s, t));
}

TEST_CASE("Identity maps induce identity on Ext") {
    auto m = mod::GradedModule::stunted(1, 6);
    auto r = res::Resolution(m, 4, 14);
    auto id = mod::ModuleMap::cellwise(m, m);
    auto e = res::induced_map(id, r, r);
    for (int s = 0; s <= 4; ++s)
        for (int t = 1; t <= 14; ++t)
            CHECK(e.get(s, t) == f2::BitMatrix::identity(static_cast<std::size_t>(r.gen_count(s, t))));
}

TEST_CASE("Yoneda operators reproduce classical products") {
    auto r = res::Resolution(mod::GradedModule::sphere(0), 8, 24);

    SECTION("the (1,1) class generates the stem-zero tower") {
        auto h0 = res::yoneda_operator(r, 1, 1, 0);
        for (int s = 0; s <= 7; ++s) {
            auto m = h0.get(s, s);
            REQUIRE(m.rows() == 1);
            REQUIRE(m.cols() == 1);
            CHECK(m.get(0, 0));
        }
        // (1,1) * (1,4) is the nonzero class at (2,5).
        auto m = h0.get(1, 4);
        REQUIRE(m.rows() == 1);
        REQUIRE(m.cols() == 1);
        CHECK(m.get(0, 0));
    }

    SECTION("the (1,2) class squares and cubes nontrivially") {
        auto h1 = res::yoneda_operator(r, 1, 2, 0);
        auto sq = h1.get(1, 2);  // (1,2)*(1,2) -> (2,4)
        REQUIRE(sq.rows() == 1);
        CHECK(sq.get(0, 0));
        auto cube = res::compose_ext(h1, res::compose_ext(h1, h1));
        // The cube of the (1,2) class is the nonzero class at (3,6).
        auto c0 = cube.get(0, 0);
        REQUIRE(c0.rows() == 1);
        CHECK(c0.get(0, 0));
        // The fourth power lands in the empty stem-4 column.
        CHECK(cube.get(1, 2).rows() == 0);
    }

    SECTION("products with disjoint supports vanish structurally") {
        auto h0 = res::yoneda_operator(r, 1, 1, 0);
        auto m = h0.get(1, 2);  // (1,1)*(1,2) -> (2,3), an empty bidegree
        CHECK(m.rows() == 0);
    }
}

TEST_CASE("Serialization round-trips and rejects corruption") {
    auto m = mod::GradedModule::stunted(-5, -1);
    auto r = res::Resolution(m, 4, 10);
    std::vector<std::uint8_t> buf;
    r.serialize(buf);
    REQUIRE(!buf.empty());

    auto back = res::Resolution::deserialize(m, 4, 10, buf);
    REQUIRE(back != nullptr);
    for (int s = 0; s <= 4; ++s) {
        REQUIRE(back->gens(s).size() == r.gens(s).size());
        for (std::size_t j = 0; j < r.gens(s).size(); ++j) {
            CHECK(back->gens(s)[j].t == r.gens(s)[j].t);
            CHECK(back->gens(s)[j].ordinal == r.gens(s)[j].ordinal);
            if (s == 0) {
                CHECK(back->aug_cell(static_cast<int>(j)) == r.aug_cell(static_cast<int>(j)));
                continue;
            }
            const auto& a = r.diff(s, static_cast<int>(j)).terms;
            const auto& b = back->diff(s, static_cast<int>(j)).terms;
            REQUIRE(a.size() == b.size());
            for (std::size_t k = 0; k < a.size(); ++k) {
                CHECK(a[k].gen == b[k].gen);
                CHECK(a[k].coeffs == b[k].coeffs);
            }
        }
    }

    SECTION("truncated buffers are rejected") {
        std::vector<std::uint8_t> cut(buf.begin(), buf.end() - 5);
        CHECK(res::Resolution::deserialize(m, 4, 10, cut) == nullptr);
    }
    SECTION("trailing garbage is rejected") {
        auto extended = buf;
        extended.push_back(0);
        CHECK(res::Resolution::deserialize(m, 4, 10, extended) == nullptr);
    }
    SECTION("wrong bounds are rejected") {
        CHECK(res::Resolution::deserialize(m, 5, 10, buf) == nullptr);
    }
}
