// Cell-span modules: binomial action, submodule/quotient splits, the column
// and dictionary models, and the CLI module grammar.
#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "bext/adem.hpp"
#include "bext/milnor.hpp"
#include "bext/module.hpp"

using namespace bext::mod;
using bext::steenrod::AdmissibleSq;
using bext::steenrod::adem_product;
using bext::steenrod::admissible_basis;

namespace {

// Independent parity oracle: the exact integer Pascal recurrence
// C(n,k) = C(n-1,k-1) + C(n-1,k), reduced mod 2 (parity is preserved by the
// recurrence); negative n via the exact reflection C(n,k) = (-1)^k C(k-n-1,k).
class PascalParity {
public:
    PascalParity() {
        table_.assign(kMax + 1, std::vector<std::uint8_t>(kMax + 1, 0));
        for (int n = 0; n <= kMax; ++n) {
            table_[static_cast<std::size_t>(n)][0] = 1;
            for (int k = 1; k <= n; ++k)
                table_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] =
                    (table_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k - 1)] +
                     (k <= n - 1 ? table_[static_cast<std::size_t>(n - 1)]
                                         [static_cast<std::size_t>(k)]
                                 : 0)) &
                    1;
        }
    }
    bool get(long long n, long long k) const {
        if (n < 0) return get(k - n - 1, k);
        if (k > n) return false;
        return table_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] != 0;
    }

private:
    static constexpr int kMax = 200;
    std::vector<std::vector<std::uint8_t>> table_;
};

}  // namespace

TEST_CASE("binom2: frozen values and Pascal-parity oracle") {
    REQUIRE(binom2(6, 2) == true);
    REQUIRE(binom2(-3, 2) == false);
    for (long long k = 0; k <= 64; ++k) REQUIRE(binom2(-1, k) == true);

    PascalParity oracle;
    for (long long n = -64; n <= 64; ++n)
        for (long long k = 0; k <= 64; ++k) {
            INFO("n=" << n << " k=" << k);
            REQUIRE(binom2(n, k) == oracle.get(n, k));
        }
}

TEST_CASE("Stunted modules: frozen action facts") {
    auto p12 = GradedModule::stunted(1, 2);
    REQUIRE(p12->sq(1, 1));  // Sq^1 x^1 = x^2

    auto window = GradedModule::stunted(-12, 12);
    // Nothing hits x^{-1}: the coefficient into degree -1 from -1-c is
    // C(-1-c, c) = C(2c, c), always even.
    for (int c = 1; c <= 11; ++c) {
        INFO("c=" << c);
        REQUIRE_FALSE(window->sq(-1 - c, c));
    }
    // x^{-1} supports every Sq^c.
    for (int c = 1; c <= 13; ++c) {
        INFO("c=" << c);
        REQUIRE(window->sq(-1, c) == window->has_cell(-1 + c));
    }
}

TEST_CASE("James periodicity shadow of the Lucas rule") {
    auto big = GradedModule::stunted(-40, 60);
    for (int L = 4; L <= 5; ++L) {
        int period = 1 << L;
        for (int n = -40; n + period <= 40; ++n)
            for (int c = 1; c < period; ++c) {
                if (!big->has_cell(n + c) || !big->has_cell(n + period + c)) continue;
                INFO("n=" << n << " c=" << c << " L=" << L);
                REQUIRE(big->sq(n, c) == big->sq(n + period, c));
            }
    }
}

TEST_CASE("Module axiom: composite single squares match adem_product") {
    std::vector<ModulePtr> modules = {
        GradedModule::stunted(-6, 10),
        dictionary_model('A', 6, 6),
        dictionary_model('B', 5, 5),
        column_model(8, 8)[0].model,
    };
    for (const auto& m : modules) {
        int span = m->top() - m->bottom();
        for (int a = 1; a <= span; ++a)
            for (int b = 1; a + b <= std::min(span, 14); ++b) {
                // Composite coefficient of Sq^a(Sq^b x^n) into x^{n+a+b}.
                for (int n : m->cells()) {
                    bool composite = m->sq(n, b) && m->sq(n + b, a);
                    // adem_product expansion applied word by word.
                    auto prod = adem_product(AdmissibleSq({static_cast<unsigned>(a)}),
                                             AdmissibleSq({static_cast<unsigned>(b)}));
                    bool expanded = false;
                    const auto& basis = admissible_basis(a + b);
                    for (std::size_t w = 0; w < basis.size(); ++w) {
                        if (!prod.get(w)) continue;
                        int cur = n;
                        bool alive = true;
                        for (auto it = basis[w].a.rbegin(); alive && it != basis[w].a.rend();
                             ++it) {
                            alive = m->sq(cur, static_cast<int>(*it));
                            cur += static_cast<int>(*it);
                        }
                        expanded ^= alive;
                    }
                    INFO(m->name() << " Sq^" << a << " Sq^" << b << " on cell " << n);
                    REQUIRE(composite == expanded);
                }
            }
    }
}

TEST_CASE("Milnor action rows: singles agree with sq, unit with identity") {
    auto m = GradedModule::stunted(-5, 9);
    for (int n : m->cells()) {
        for (int c = 1; c <= 9 - n; ++c) {
            bext::steenrod::MilnorSq single({static_cast<unsigned>(c)});
            INFO("n=" << n << " c=" << c);
            REQUIRE(m->act(c, bext::steenrod::milnor_index(single), n) == m->sq(n, c));
        }
        REQUIRE(m->act(0, 0, n) == true);
    }
}

TEST_CASE("column_model shapes") {
    auto w1 = column_model(1, 6);
    REQUIRE(w1.size() == 1);
    REQUIRE(w1[0].s_shift == 1);
    REQUIRE(w1[0].model->cells() == std::vector<int>({0, 1, 2, 3, 4, 5, 6}));

    auto w0 = column_model(0, 3);
    REQUIRE(w0.size() == 2);
    REQUIRE(w0[0].s_shift == 1);
    REQUIRE(w0[0].model->cells() == std::vector<int>({0, 1, 2, 3}));
    REQUIRE(w0[1].s_shift == 0);
    REQUIRE(w0[1].model->cells() == std::vector<int>({-1}));

    auto w8 = column_model(8, 4);
    REQUIRE(w8.size() == 1);
    REQUIRE(w8[0].model->has_cell(-4));
    REQUIRE_FALSE(w8[0].model->has_cell(-1));
    REQUIRE(w8[0].model->bottom() == -8);

    auto wm2 = column_model(-2, 5);
    REQUIRE(wm2.size() == 2);
    REQUIRE(wm2[0].model->bottom() == 2);
}

TEST_CASE("dictionary_model shapes") {
    auto a88 = dictionary_model('A', 8, 8);
    REQUIRE(a88->cells().size() == 16);
    REQUIRE_FALSE(a88->has_cell(-1));
    auto b11 = dictionary_model('B', 1, 1);
    REQUIRE(b11->cells() == std::vector<int>({-1, 0, 1}));
    REQUIRE_THROWS_AS(dictionary_model('A', 0, 4), std::invalid_argument);
}

TEST_CASE("cell_sub splits") {
    auto p12 = GradedModule::stunted(1, 2);
    auto ses = cell_sub(p12, 2);
    REQUIRE(ses.sub->cells() == std::vector<int>({2}));
    REQUIRE(ses.quot->cells() == std::vector<int>({1}));
    REQUIRE(ses.inclusion.maps_cell(2));
    REQUIRE(ses.projection.maps_cell(1));
    REQUIRE_FALSE(ses.projection.maps_cell(2));

    auto full = cell_sub(p12, 1);
    REQUIRE(full.sub->cells() == p12->cells());
    REQUIRE(full.quot->cells().empty());

    auto a = dictionary_model('A', 6, 4);
    auto split0 = cell_sub(a, 0);
    REQUIRE(split0.sub->cells() == std::vector<int>({0, 1, 2, 3, 4}));
    REQUIRE(split0.quot->cells() == std::vector<int>({-6, -5, -4, -3, -2}));
}

TEST_CASE("cellwise maps enforce A-linearity") {
    // Quotient killing the top cell and inclusion of it are both legal.
    auto p12 = GradedModule::stunted(1, 2);
    REQUIRE_NOTHROW(ModuleMap::cellwise(p12, GradedModule::sphere(1)));
    REQUIRE_NOTHROW(ModuleMap::cellwise(GradedModule::sphere(2), p12));
    // The overlap map must run quotient-then-include; the raw cellwise map
    // from the lower window to the upper one hits the Sq^1 obstruction.
    REQUIRE_THROWS_AS(ModuleMap::cellwise(p12, GradedModule::stunted(2, 3)),
                      std::logic_error);
    // Lin projection: killing everything except cell -1 is legal on the
    // variant-B model.
    auto b = dictionary_model('B', 6, 6);
    REQUIRE_NOTHROW(ModuleMap::cellwise(b, GradedModule::sphere(-1)));

    // The legal overlap composite runs from the upper window to the lower:
    // quotient to the shared cell, then include it as the top cell.
    auto upper = GradedModule::stunted(2, 3);
    auto overlap = compose(ModuleMap::cellwise(GradedModule::sphere(2), p12),
                           ModuleMap::cellwise(upper, GradedModule::sphere(2)));
    REQUIRE(overlap.maps_cell(2));
    REQUIRE_FALSE(overlap.maps_cell(3));
}

TEST_CASE("module spec grammar") {
    auto s = parse_module_spec("S:0", 10);
    REQUIRE(s.size() == 1);
    REQUIRE(s[0].model->cells() == std::vector<int>({0}));

    auto p = parse_module_spec("P:-5:-1", 10);
    REQUIRE(p[0].model->cells() == std::vector<int>({-5, -4, -3, -2, -1}));

    auto m0 = parse_module_spec("M:0", 6);
    REQUIRE(m0.size() == 2);

    auto da = parse_module_spec("DA:4:4", 10);
    REQUIRE_FALSE(da[0].model->has_cell(-1));

    REQUIRE_THROWS_WITH(parse_module_spec("P:2:1", 10),
                        Catch::Matchers::ContainsSubstring("empty cell range"));
    REQUIRE_THROWS_WITH(parse_module_spec("P:a:1", 10),
                        Catch::Matchers::ContainsSubstring("not an integer"));
    REQUIRE_THROWS_WITH(parse_module_spec("X:1", 10),
                        Catch::Matchers::ContainsSubstring("unknown head"));
    REQUIRE_THROWS_WITH(parse_module_spec("S", 10),
                        Catch::Matchers::ContainsSubstring("takes 1 field"));
    REQUIRE_THROWS_WITH(parse_module_spec("DA:0:3", 10),
                        Catch::Matchers::ContainsSubstring(">= 1"));
}
