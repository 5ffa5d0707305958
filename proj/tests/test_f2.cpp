#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bext/f2.hpp"

using namespace bext::f2;

namespace {

BitMatrix mat_from_strings(const std::vector<std::string>& rows) {
    std::size_t cols = rows.empty() ? 0 : rows[0].size();
    BitMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (rows[r][c] == '1') m.set(r, c, true);
    return m;
}

BitVector vec_from_string(const std::string& s) {
    BitVector v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] == '1') v.set(i, true);
    return v;
}

BitMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double density) {
    BitMatrix m(r, c);
    std::bernoulli_distribution bit(density);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            if (bit(rng)) m.set(i, j, true);
    return m;
}

}  // namespace

// Expected values below were worked out by hand on paper before the
// implementation existed and are frozen here.
TEST_CASE("rref of a hand-reduced 4x5 matrix") {
    BitMatrix m = mat_from_strings({"10110", "11101", "01011", "10110"});
    RrefResult rr = rref(m);
    REQUIRE(rr.pivots == std::vector<int>{0, 1});
    CHECK(rr.mat.row_copy(0) == vec_from_string("10110"));
    CHECK(rr.mat.row_copy(1) == vec_from_string("01011"));
    CHECK(rr.mat.row_is_zero(2));
    CHECK(rr.mat.row_is_zero(3));
}

TEST_CASE("canonical kernel basis of the hand example") {
    BitMatrix m = mat_from_strings({"10110", "11101", "01011", "10110"});
    auto ker = kernel_basis(m);
    REQUIRE(ker.size() == 3);  // 5 cols - rank 2
    CHECK(ker[0] == vec_from_string("10100"));
    CHECK(ker[1] == vec_from_string("11010"));
    CHECK(ker[2] == vec_from_string("01001"));
    for (const auto& v : ker) CHECK(m.apply(v).is_zero());
}

TEST_CASE("canonical solve: free coordinates are zero") {
    BitMatrix m = mat_from_strings({"10110", "11101", "01011", "10110"});
    auto x = solve(m, vec_from_string("0110"));
    REQUIRE(x.has_value());
    CHECK(*x == vec_from_string("01000"));
    CHECK(m.apply(*x) == vec_from_string("0110"));

    CHECK_FALSE(solve(m, vec_from_string("1010")).has_value());
    CHECK_THROWS_AS(solve(m, vec_from_string("101")), std::invalid_argument);
}

TEST_CASE("eventual image of a hand tower: dims 1,1,0") {
    // f0 projects onto the first coordinate, f1 swaps, f2 collapses onto e0.
    BitMatrix f0 = mat_from_strings({"10", "00"});
    BitMatrix f1 = mat_from_strings({"01", "10"});
    BitMatrix f2 = mat_from_strings({"11", "00"});

    auto one = eventual_image({f0});
    CHECK(one.basis.size() == 1);
    CHECK_FALSE(one.stabilized);  // nothing shorter to compare against

    auto two = eventual_image({f0, f1});
    CHECK(two.basis.size() == 1);
    CHECK(two.stabilized);  // image dim 1 after one stage and after two

    auto three = eventual_image({f0, f1, f2});
    CHECK(three.basis.empty());
    CHECK_FALSE(three.stabilized);  // dropped from 1 to 0 at the last stage
}

TEST_CASE("rank + nullity = cols (randomized)") {
    std::mt19937_64 rng(20260815);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t r = 1 + rng() % 24, c = 1 + rng() % 24;
        BitMatrix m = random_matrix(rng, r, c, 0.35);
        RrefResult rr = rref(m);
        auto ker = kernel_basis(m);
        CHECK(rr.rank() + ker.size() == c);
        for (std::size_t i = 1; i < rr.pivots.size(); ++i)
            CHECK(rr.pivots[i - 1] < rr.pivots[i]);
        for (const auto& v : ker) CHECK(m.apply(v).is_zero());
    }
}

TEST_CASE("solve roundtrip (randomized)") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t r = 1 + rng() % 20, c = 1 + rng() % 20;
        BitMatrix m = random_matrix(rng, r, c, 0.4);
        BitVector x(c);
        for (std::size_t j = 0; j < c; ++j) x.set(j, rng() & 1);
        BitVector b = m.apply(x);
        auto sol = solve(m, b);
        REQUIRE(sol.has_value());
        CHECK(m.apply(*sol) == b);
    }
}

TEST_CASE("LinearSystem agrees with one-shot solve") {
    std::mt19937_64 rng(99);
    BitMatrix m = random_matrix(rng, 18, 13, 0.4);
    LinearSystem sys(m);
    for (int trial = 0; trial < 30; ++trial) {
        BitVector b(18);
        for (std::size_t j = 0; j < 18; ++j) b.set(j, rng() & 1);
        auto a = solve(m, b);
        auto c = sys.solve(b);
        REQUIRE(a.has_value() == c.has_value());
        if (a) CHECK(*a == *c);
    }
}

TEST_CASE("eventual image dims are nonincreasing in tower length") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 15; ++trial) {
        std::size_t dim = 4 + rng() % 6;
        std::vector<BitMatrix> maps;
        for (int k = 0; k < 6; ++k) maps.push_back(random_matrix(rng, dim, dim, 0.3));
        std::size_t prev = dim;
        for (std::size_t k = 1; k <= maps.size(); ++k) {
            auto img = eventual_image({maps.begin(), maps.begin() + long(k)});
            CHECK(img.basis.size() <= prev);
            prev = img.basis.size();
        }
    }
}

TEST_CASE("transpose and multiply basics") {
    std::mt19937_64 rng(5);
    BitMatrix a = random_matrix(rng, 9, 17, 0.4);
    CHECK(transpose(transpose(a)) == a);
    BitMatrix i = BitMatrix::identity(17);
    CHECK(a.multiply(i) == a);
    BitMatrix b = random_matrix(rng, 17, 7, 0.4);
    // (AB)x == A(Bx) on a few vectors.
    BitMatrix ab = a.multiply(b);
    for (int t = 0; t < 8; ++t) {
        BitVector x(7);
        for (std::size_t j = 0; j < 7; ++j) x.set(j, rng() & 1);
        CHECK(ab.apply(x) == a.apply(b.apply(x)));
    }
}
