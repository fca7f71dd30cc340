#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mendel/equilibria.hpp"
#include "mendel/models.hpp"
#include "util.hpp"

using namespace mendel;

namespace {

TwoPhaseParams unit_two_phase(const RateFunction& mu_larva,
                              const RateFunction& mu_adult,
                              Vec3 omega = {1, 1, 1}, Vec3 nu = {1, 1, 1},
                              Vec3 v = {1, 1, 1}, Vec3 w = {1, 1, 1}) {
    return TwoPhaseParams(omega, nu, {mu_larva, mu_larva, mu_larva},
                          {mu_adult, mu_adult, mu_adult}, v, w);
}

}  // namespace

TEST_CASE("two_phase_rhs hand values") {
    const auto p = unit_two_phase(RateFunction::affine_growth(1.0, 0.0),
                                  RateFunction::affine_growth(1.0, 0.0));
    const TwoPhaseState zero{};
    const TwoPhaseState dz = two_phase_rhs(p, zero);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(dz.L[i] == 0.0);
        CHECK(dz.A[i] == 0.0);
    }

    // empty larval pool, one adult AA: births feed L1, the adult decays
    const TwoPhaseState s{{0, 0, 0}, {1, 0, 0}};
    const TwoPhaseState d = two_phase_rhs(p, s);
    CHECK(d.L.AA == doctest::Approx(1.0));
    CHECK(d.L.Aa == 0.0);
    CHECK(d.L.aa == 0.0);
    CHECK(d.A.AA == doctest::Approx(-1.0));

    // monomorphic in, monomorphic out
    const TwoPhaseState m{{0.7, 0, 0}, {0.3, 0, 0}};
    const TwoPhaseState dm = two_phase_rhs(p, m);
    CHECK(dm.L.Aa == 0.0);
    CHECK(dm.L.aa == 0.0);
    CHECK(dm.A.Aa == 0.0);
    CHECK(dm.A.aa == 0.0);
}

TEST_CASE("two_phase_rhs epsilon scaling") {
    auto p = unit_two_phase(RateFunction::affine_growth(1.0, 0.0),
                            RateFunction::affine_growth(1.0, 0.0));
    const TwoPhaseState s{{1, 0, 0}, {1, 0, 0}};
    const TwoPhaseState base = two_phase_rhs(p, s);
    p.epsilon = 0.1;
    p.scaling = PhaseScaling::AdultFast;
    const TwoPhaseState fast = two_phase_rhs(p, s);
    CHECK(fast.A.AA == doctest::Approx(10.0 * base.A.AA));
    CHECK(fast.L.AA == doctest::Approx(base.L.AA));
    p.scaling = PhaseScaling::LarvaFast;
    const TwoPhaseState lf = two_phase_rhs(p, s);
    CHECK(lf.L.AA == doctest::Approx(10.0 * base.L.AA));
    CHECK(lf.A.AA == doctest::Approx(base.A.AA));
}

TEST_CASE("TwoPhaseParams validation") {
    CHECK_THROWS_AS(unit_two_phase(RateFunction::affine_growth(1.0, 0.0),
                                   RateFunction::affine_growth(1.0, 0.0),
                                   {0, 1, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(unit_two_phase(RateFunction::rational_decay(1.0, 1.0),
                                   RateFunction::affine_growth(1.0, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("fast reduction formulas") {
    const auto p = unit_two_phase(RateFunction::affine_growth(0.5, 0.1),
                                  RateFunction::affine_growth(1.0, 1.0));
    const ReducedModel r = reduce_fast(p);
    CHECK(r.kind == ReductionKind::Fast);
    // recruitment 1/(1+b)
    CHECK(r.rates.m[0] == RateFunction::rational_decay(1.0, 1.0));
    // mortality nu + mu = 1.5 + 0.1 z
    CHECK(r.rates.mu[0] == RateFunction::affine_growth(1.5, 0.1));

    // fertility-weighted density weights pick up omega
    const auto p2 = unit_two_phase(RateFunction::affine_growth(0.5, 0.1),
                                   RateFunction::affine_growth(1.0, 1.0),
                                   {2, 2, 2});
    const ReducedModel r2 = reduce_fast(p2);
    for (std::size_t i = 0; i < 3; ++i) CHECK(r2.rates.w[i] == doctest::Approx(2.0));
    // recruitment scale doubles with omega
    CHECK(r2.rates.m[0](0.0) == doctest::Approx(2.0));
}

TEST_CASE("slow reduction formulas") {
    const auto p = unit_two_phase(RateFunction::affine_growth(1.0, 1.0),
                                  RateFunction::affine_growth(0.5, 0.5));
    const ReducedModel r = reduce_slow(p);
    CHECK(r.kind == ReductionKind::Slow);
    // m(b) = 1/(2+b)
    CHECK(r.rates.m[0](0.0) == doctest::Approx(0.5));
    CHECK(r.rates.m[0](2.0) == doctest::Approx(0.25));
    CHECK(r.rates.m[0] == RateFunction::rational_decay(0.5, 0.5));
    CHECK(r.rates.mu[0] == RateFunction::affine_growth(0.5, 0.5));

    // huge maturation rate: recruitment approaches fertility
    const auto pfastmat = unit_two_phase(RateFunction::affine_growth(1.0, 0.0),
                                         RateFunction::affine_growth(0.5, 0.5),
                                         {3, 3, 3}, {1e3, 1e3, 1e3});
    CHECK(reduce_slow(pfastmat).rates.m[0](5.0) == doctest::Approx(3.0).epsilon(1e-2));

    // density weights divide by maturation rates
    const auto pnu = unit_two_phase(RateFunction::affine_growth(1.0, 1.0),
                                    RateFunction::affine_growth(0.5, 0.5),
                                    {1, 1, 1}, {2, 2, 2});
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(reduce_slow(pnu).rates.v[i] == doctest::Approx(0.5));
}

TEST_CASE("reduced vector fields: zero state and neutral agreement") {
    const ReducedModel fast{ReductionKind::Fast, testutil::example_neutral_rates()};
    const ReducedModel slow{ReductionKind::Slow, testutil::example_neutral_rates()};
    for (const auto* m : {&fast, &slow}) {
        const GenotypeVector d = reduced_rhs(*m, {0, 0, 0});
        CHECK(d.AA == 0.0);
        CHECK(d.Aa == 0.0);
        CHECK(d.aa == 0.0);
    }
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const GenotypeVector x = testutil::random_state(rng);
        const GenotypeVector df = fast_rhs(fast, x);
        const GenotypeVector ds = slow_rhs(slow, x);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(df[i] == doctest::Approx(ds[i]).epsilon(1e-12));
    }
}

TEST_CASE("reduced fields vanish at the monomorphic capacities") {
    for (ReductionKind kind : {ReductionKind::Fast, ReductionKind::Slow}) {
        const ReducedModel m{kind, testutil::example_ordered_rates()};
        for (int i : {1, 3}) {
            const double c = monomorphic_capacity(m, i).value;
            GenotypeVector x;
            x[static_cast<std::size_t>(i - 1)] = c;
            const GenotypeVector d = reduced_rhs(m, x);
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(std::abs(d[j]) < 1e-9);
        }
    }
}

TEST_CASE("total-population balance and boundary nonnegativity") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 200; ++k) {
        const ReducedModel m{ReductionKind::Fast,
                             testutil::random_ordered_rates(rng)};
        const GenotypeVector x = testutil::random_state(rng);
        const GenotypeVector d = fast_rhs(m, x);
        const double b = solve_bstar(m.rates, x);
        const double density = dot(m.rates.w, x.to_array());
        double expected = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            expected += (m.rates.m[i](b) - m.rates.mu[i](density)) * x[i];
        CHECK(d.total() ==
              doctest::Approx(expected).epsilon(1e-12).scale(std::abs(expected) + 1));

        // components at zero cannot be pushed negative
        GenotypeVector edge = x;
        edge[k % 3] = 0.0;
        if (edge.total() < kZeroTotal) continue;
        const ReducedModel s{ReductionKind::Slow, m.rates};
        CHECK(fast_rhs(m, edge)[k % 3] >= 0.0);
        CHECK(slow_rhs(s, edge)[k % 3] >= 0.0);
    }
}

TEST_CASE("monomorphic states stay on their axis") {
    const ReducedModel fast{ReductionKind::Fast, testutil::example_ordered_rates()};
    const ReducedModel slow{ReductionKind::Slow, testutil::example_ordered_rates()};
    for (const auto* m : {&fast, &slow}) {
        for (std::size_t idx : {std::size_t{0}, std::size_t{2}}) {
            GenotypeVector x;
            x[idx] = 0.8;
            const GenotypeVector d = reduced_rhs(*m, x);
            for (std::size_t j = 0; j < 3; ++j)
                if (j != idx) CHECK(d[j] == 0.0);
            // scalar law: (m_i(b*) - mu_i(w_i x_i)) x_i
            const double b = recruitment_density(*m, x);
            const double expect =
                (m->rates.m[idx](b) - m->rates.mu[idx](m->rates.w[idx] * x[idx])) *
                x[idx];
            CHECK(d[idx] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("is_selectively_neutral") {
    CHECK(is_selectively_neutral(
        {ReductionKind::Fast, testutil::example_neutral_rates()}));
    CHECK_FALSE(is_selectively_neutral(
        {ReductionKind::Fast, testutil::example_ordered_rates()}));
    // weights do not affect neutrality
    const RateFunction m = RateFunction::rational_decay(2.0, 1.0);
    const RateFunction mu = RateFunction::affine_growth(0.5, 0.5);
    const RateModel vw({m, m, m}, {mu, mu, mu}, {1, 2, 3}, {3, 2, 1});
    CHECK(is_selectively_neutral({ReductionKind::Slow, vw}));
}

TEST_CASE("manifold recovery maps make the eliminated phase stationary") {
    const TwoPhaseParams p = testutil::example_two_phase();
    std::mt19937_64 rng(31);
    for (int k = 0; k < 50; ++k) {
        const GenotypeVector x = testutil::random_state(rng, 1e-2, 1e2);

        // adult phase on the fast-reduction manifold
        const GenotypeVector adults = recover_adults(p, x);
        TwoPhaseState s;
        for (std::size_t i = 0; i < 3; ++i) s.L[i] = p.omega[i] * x[i];
        s.A = adults;
        const TwoPhaseState d = two_phase_rhs(p, s);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(std::abs(d.A[i]) < 1e-9 * (1.0 + std::abs(s.A[i])));

        // larval phase on the slow-reduction manifold
        const GenotypeVector lhat = recover_larvae(p, x);
        TwoPhaseState s2;
        for (std::size_t i = 0; i < 3; ++i) s2.L[i] = p.omega[i] * lhat[i];
        s2.A = x;
        const TwoPhaseState d2 = two_phase_rhs(p, s2);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(std::abs(d2.L[i]) < 1e-9 * (1.0 + std::abs(s2.L[i])));
    }
}
