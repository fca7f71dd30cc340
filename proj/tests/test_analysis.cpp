#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mendel/analysis.hpp"
#include "util.hpp"

using namespace mendel;

namespace {

SimConfig tight(double t_end, double record_every) {
    SimConfig cfg;
    cfg.t_end = t_end;
    cfg.record_every = record_every;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-10;
    return cfg;
}

}  // namespace

TEST_CASE("mean allelic rates: hand values and neutrality") {
    const ReducedModel codom{ReductionKind::Fast, testutil::example_ordered_rates()};
    const MeanAllelicRates mar = mean_allelic_rates(codom, {1, 1, 1});
    // mortality at density 3: 2.0 / 2.1 / 2.2 averaged with allele weights
    CHECK(mar.mu_A == doctest::Approx((2.0 + 0.5 * 2.1) / 1.5).epsilon(1e-12));
    CHECK(mar.mu_a == doctest::Approx((2.2 + 0.5 * 2.1) / 1.5).epsilon(1e-12));
    CHECK(2.0 <= mar.mu_A);
    CHECK(mar.mu_A <= 2.1);
    CHECK(2.1 <= mar.mu_a);
    CHECK(mar.mu_a <= 2.2);

    const ReducedModel neutral{ReductionKind::Fast, testutil::example_neutral_rates()};
    const MeanAllelicRates n = mean_allelic_rates(neutral, {1, 2, 0.5});
    CHECK(n.m_A == doctest::Approx(n.m_a).epsilon(1e-12));
    CHECK(n.mu_A == doctest::Approx(n.mu_a).epsilon(1e-12));
    const double b = solve_bstar(neutral.rates, {1, 2, 0.5});
    CHECK(n.m_A == doctest::Approx(neutral.rates.m[0](b)).epsilon(1e-12));

    // without heterozygotes the averages collapse to the homozygote rates
    const MeanAllelicRates edge = mean_allelic_rates(codom, {1, 0, 1});
    CHECK(edge.mu_A == doctest::Approx(codom.rates.mu[0](2.0)).epsilon(1e-12));
    CHECK(edge.mu_a == doctest::Approx(codom.rates.mu[2](2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(mean_allelic_rates(codom, {1, 0, 0}), std::domain_error);
}

TEST_CASE("allelic_ratio") {
    CHECK(allelic_ratio({1, 0, 0}) == 0.0);
    CHECK(allelic_ratio({0, 1, 0}) == doctest::Approx(1.0));
    CHECK(allelic_ratio({1, 2, 3}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(allelic_ratio({0, 0, 1}), std::domain_error);
}

TEST_CASE("allelic balance identity") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
        const RateModel rates = testutil::random_ordered_rates(rng);
        const GenotypeVector x = testutil::random_state(rng);
        for (ReductionKind kind : {ReductionKind::Fast, ReductionKind::Slow}) {
            const ReducedModel model{kind, rates};
            const MeanAllelicRates mar = mean_allelic_rates(model, x);
            const GenotypeVector d = reduced_rhs(model, x);
            const double lhs_A = allele_count(d, Allele::A);
            const double rhs_A = (mar.m_A - mar.mu_A) * allele_count(x, Allele::A);
            CHECK(lhs_A == doctest::Approx(rhs_A)
                               .epsilon(1e-12)
                               .scale(std::abs(rhs_A) + 1.0));
            const double lhs_a = allele_count(d, Allele::a);
            const double rhs_a = (mar.m_a - mar.mu_a) * allele_count(x, Allele::a);
            CHECK(lhs_a == doctest::Approx(rhs_a)
                               .epsilon(1e-12)
                               .scale(std::abs(rhs_a) + 1.0));
            // ordered rates separate the allelic averages the right way
            CHECK(mar.m_A - mar.m_a >= -1e-12);
            CHECK(mar.mu_a - mar.mu_A >= -1e-12);
        }
    }
}

TEST_CASE("rate ordering report") {
    const ReducedModel neutral{ReductionKind::Fast, testutil::example_neutral_rates()};
    CHECK(verify_rate_ordering(neutral, 200).passed());
    for (ReductionKind kind : {ReductionKind::Fast, ReductionKind::Slow}) {
        const ReducedModel codom{kind, testutil::example_ordered_rates()};
        const VerificationReport rep = verify_rate_ordering(codom, 500);
        CHECK(rep.passed());
    }
}

TEST_CASE("hardy-weinberg certification") {
    const ReducedModel model{ReductionKind::Fast, testutil::example_neutral_rates()};

    SUBCASE("symmetric polymorphic start") {
        const Trajectory traj = integrate(model, {1, 0, 1}, tight(200, 2));
        const VerificationReport rep = verify_hardy_weinberg(traj, model);
        CHECK(rep.passed());
        CHECK(traj.back().AA == doctest::Approx(0.25).epsilon(1e-5));
        CHECK(traj.back().Aa == doctest::Approx(0.5).epsilon(1e-5));
    }
    SUBCASE("monomorphic start degenerates gracefully") {
        const Trajectory traj = integrate(model, {4, 0, 0}, tight(200, 2));
        const VerificationReport rep = verify_hardy_weinberg(traj, model);
        CHECK(rep.passed());
        CHECK(traj.back().AA == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("skewed frequencies") {
        const Trajectory traj = integrate(model, {9, 0, 1}, tight(200, 2));
        const VerificationReport rep = verify_hardy_weinberg(traj, model);
        CHECK(rep.passed());
        const double total = traj.back().total();
        CHECK(traj.back().AA / total == doctest::Approx(0.81).epsilon(1e-4));
        CHECK(traj.back().Aa / total == doctest::Approx(0.18).epsilon(1e-4));
    }
    SUBCASE("non-neutral models are rejected") {
        const ReducedModel codom{ReductionKind::Fast,
                                 testutil::example_ordered_rates()};
        const Trajectory traj = integrate(model, {1, 0, 1}, tight(10, 1));
        CHECK_THROWS_AS(verify_hardy_weinberg(traj, codom), NeutralityError);
    }
    SUBCASE("non-viable neutral model is flagged, not thrown") {
        const RateFunction m = RateFunction::rational_decay(1.0, 1.0);
        const RateFunction mu = RateFunction::affine_growth(2.0, 1.0);
        const ReducedModel nv{
            ReductionKind::Fast,
            RateModel({m, m, m}, {mu, mu, mu}, {1, 1, 1}, {1, 1, 1})};
        const Trajectory traj = integrate(nv, {1, 0, 1}, tight(100, 2));
        const VerificationReport rep = verify_hardy_weinberg(traj, nv);
        CHECK_FALSE(rep.passed());
        bool viability_flagged = false;
        for (const auto& c : rep.checks)
            if (c.name == "assumption_viability" && !c.passed)
                viability_flagged = true;
        CHECK(viability_flagged);
        // the population still dies out toward the zero target
        CHECK(traj.back().total() < 1e-3);
    }
}

TEST_CASE("selection convergence certification") {
    const ReducedModel model{ReductionKind::Fast, testutil::example_ordered_rates()};

    SUBCASE("holomorphic start converges to the fit homozygote") {
        const Trajectory traj = integrate(model, {1, 1, 1}, tight(500, 5));
        const VerificationReport rep = verify_selection_convergence(traj, model);
        CHECK(rep.passed());
        CHECK(traj.back().AA == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("allele A absent: the weaker homozygote equilibrium") {
        const Trajectory traj = integrate(model, {0, 0, 1}, tight(300, 5));
        const VerificationReport rep = verify_selection_convergence(traj, model);
        CHECK(rep.passed());
        const double c3 =
            monomorphic_capacity(model, 3).value;
        CHECK(traj.back().aa == doctest::Approx(c3).epsilon(1e-4));
    }
    SUBCASE("allele A absent and non-viable: extinction") {
        RateModel rates = testutil::example_ordered_rates();
        rates.mu[2] = RateFunction::affine_growth(2.5, 0.5);
        const ReducedModel harsh{ReductionKind::Fast, rates};
        const Trajectory traj = integrate(harsh, {0, 0, 1}, tight(300, 5));
        const VerificationReport rep = verify_selection_convergence(traj, harsh);
        CHECK(rep.passed());
        CHECK(traj.back().total() < 1e-4);
    }
    SUBCASE("neutral models are rejected") {
        const ReducedModel neutral{ReductionKind::Fast,
                                   testutil::example_neutral_rates()};
        const Trajectory traj = integrate(neutral, {1, 1, 1}, tight(10, 1));
        CHECK_THROWS_AS(verify_selection_convergence(traj, neutral),
                        AssumptionError);
    }
}

TEST_CASE("boundedness certification") {
    const ReducedModel model{ReductionKind::Fast, testutil::example_ordered_rates()};
    const Trajectory traj = integrate(model, {5, 5, 5}, tight(100, 2));
    CHECK(verify_boundedness(traj, model).passed());
}

TEST_CASE("slow-manifold consistency") {
    const TwoPhaseParams p = testutil::example_two_phase();
    for (ReductionKind kind : {ReductionKind::Fast, ReductionKind::Slow}) {
        const VerificationReport rep = slow_manifold_consistency(
            p, kind, {0.1, 0.05, 0.025}, 30.0, {1, 1, 1});
        CHECK(rep.passed());
    }
    // a single epsilon reports the error without asserting decrease
    CHECK(slow_manifold_consistency(p, ReductionKind::Fast, {1.0}, 10.0, {1, 1, 1})
              .passed());
    CHECK_THROWS_AS(slow_manifold_consistency(p, ReductionKind::Fast, {}, 10.0,
                                              {1, 1, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(slow_manifold_consistency(p, ReductionKind::Fast, {0.1, 0.2},
                                              10.0, {1, 1, 1}),
                    std::invalid_argument);
}

TEST_CASE("report serialization is stable") {
    VerificationReport rep;
    rep.add("alpha", true, 0.5, 1.0);
    rep.add("beta", false, 2.0, 3.0, "context");
    const std::string text = rep.to_text();
    CHECK(text ==
          "check name=alpha pass=true worst=0.5 t=1\n"
          "check name=beta pass=false worst=2 t=3 note=context\n"
          "summary pass=false\n");
    CHECK_FALSE(rep.passed());
}
