#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mendel/genetics.hpp"
#include "util.hpp"

using namespace mendel;

TEST_CASE("allele_count") {
    CHECK(allele_count({1, 0, 0}, Allele::A) == 1.0);
    CHECK(allele_count({0, 1, 0}, Allele::A) == 0.5);
    CHECK(allele_count({1, 2, 3}, Allele::a) == 4.0);
}

TEST_CASE("allele_frequency") {
    CHECK(allele_frequency({1, 0, 1}, Allele::A) == doctest::Approx(0.5));
    CHECK(allele_frequency({1, 0, 0}, Allele::a) == 0.0);
    CHECK(allele_frequency({1, 2, 3}, Allele::A) == doctest::Approx(2.0 / 6.0));
    CHECK_THROWS_AS(allele_frequency({0, 0, 0}, Allele::A), ZeroPopulationError);
    // near-zero totals count as empty to avoid overflowing the ratio
    CHECK_THROWS_AS(allele_frequency({1e-302, 0, 0}, Allele::A),
                    ZeroPopulationError);
    CHECK(allele_frequency({1, 2, 3}, Allele::A) +
              allele_frequency({1, 2, 3}, Allele::a) ==
          doctest::Approx(1.0));
}

TEST_CASE("mendel_offspring fixed points and hand values") {
    for (double c : {1.0, 0.25, 7.5}) {
        const GenotypeVector off = mendel_offspring({c, 0, 0});
        CHECK(off.AA == doctest::Approx(c));
        CHECK(off.Aa == 0.0);
        CHECK(off.aa == 0.0);
    }
    const GenotypeVector het = mendel_offspring({0, 1, 0});
    CHECK(het.AA == doctest::Approx(0.25));
    CHECK(het.Aa == doctest::Approx(0.5));
    CHECK(het.aa == doctest::Approx(0.25));

    const GenotypeVector sym = mendel_offspring({1, 0, 1});
    CHECK(sym.AA == doctest::Approx(0.5));
    CHECK(sym.Aa == doctest::Approx(1.0));
    CHECK(sym.aa == doctest::Approx(0.5));

    CHECK_THROWS_AS(mendel_offspring({0, 0, 0}), ZeroPopulationError);
}

TEST_CASE("inheritance matrices are symmetric and sum to the ones matrix") {
    Matrix3 sum{};
    for (int i = 1; i <= 3; ++i) {
        const Matrix3 g = inheritance_matrix(i);
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) {
                CHECK(g[r][c] == g[c][r]);
                sum[r][c] += g[r][c];
            }
    }
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(sum[r][c] == doctest::Approx(1.0));
    CHECK_THROWS_AS(inheritance_matrix(0), std::invalid_argument);
}

TEST_CASE("classify_state") {
    CHECK(classify_state({0, 0, 0}) == StateClass::Zero);
    CHECK(classify_state({2, 0, 0}) == StateClass::MonomorphicA);
    CHECK(classify_state({0, 0, 3}) == StateClass::Monomorphica);
    CHECK(classify_state({1, 1, 1}) == StateClass::Holomorphic);
    CHECK(classify_state({1, 0, 1}) == StateClass::Polymorphic);
    CHECK(classify_state({0, 1, 0}) == StateClass::Polymorphic);
    // tolerance folds dust into zero
    CHECK(classify_state({1, 1e-15, 0}, 1e-12) == StateClass::MonomorphicA);
}

TEST_CASE("offspring operator: conservation, homogeneity, quadratic route") {
    std::mt19937_64 rng(1234);
    for (int k = 0; k < 1000; ++k) {
        const GenotypeVector x = testutil::random_state(rng);
        const GenotypeVector off = mendel_offspring(x);
        const double scale = x.total();

        CHECK(off.total() == doctest::Approx(scale).epsilon(1e-12));
        for (Allele j : {Allele::A, Allele::a})
            CHECK(allele_count(off, j) ==
                  doctest::Approx(allele_count(x, j)).epsilon(1e-12));

        const GenotypeVector twice = mendel_offspring({2 * x.AA, 2 * x.Aa, 2 * x.aa});
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(twice[i] == doctest::Approx(2 * off[i]).epsilon(1e-12));

        for (int i = 1; i <= 3; ++i)
            CHECK(offspring_share_quadratic(x, i) ==
                  doctest::Approx(off[static_cast<std::size_t>(i - 1)])
                      .epsilon(1e-12));

        // output sits in Hardy-Weinberg proportions
        const double p = allele_frequency(x, Allele::A);
        const double q = allele_frequency(x, Allele::a);
        CHECK(off.AA == doctest::Approx(p * p * scale).epsilon(1e-12));
        CHECK(off.Aa == doctest::Approx(2 * p * q * scale).epsilon(1e-12));
        CHECK(off.aa == doctest::Approx(q * q * scale).epsilon(1e-12));
    }
}
