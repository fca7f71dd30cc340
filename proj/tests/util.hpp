// Shared generators for randomized tests.
#pragma once

#include <algorithm>
#include <random>

#include "mendel/models.hpp"
#include "mendel/rates.hpp"

namespace testutil {

using namespace mendel;

inline GenotypeVector random_state(std::mt19937_64& rng, double lo = 1e-3,
                                   double hi = 1e3) {
    std::uniform_real_distribution<double> u(std::log10(lo), std::log10(hi));
    return {std::pow(10.0, u(rng)), std::pow(10.0, u(rng)), std::pow(10.0, u(rng))};
}

inline Vec3 random_weights(std::mt19937_64& rng, double lo = 1.0, double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng)};
}

// Selectively neutral viable model with random parameters.
inline RateModel random_neutral_rates(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ua(1.5, 3.0), ub(0.5, 2.0),
        uc(0.2, 0.6), ud(0.3, 0.8);
    const RateFunction m = RateFunction::rational_decay(ua(rng), ub(rng));
    const RateFunction mu = RateFunction::affine_growth(uc(rng), ud(rng));
    return RateModel({m, m, m}, {mu, mu, mu}, random_weights(rng),
                     random_weights(rng));
}

// Strictly fitness-ordered viable model: shared decay/growth shapes with
// ordered levels and mortality gaps of at least 0.05 so selection acts at a
// usable speed.
inline RateModel random_ordered_rates(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ua(1.5, 3.0), ub(0.5, 2.0),
        uc(0.3, 0.6), ugap(0.05, 0.25), ud(0.3, 0.8);
    double a[3] = {ua(rng), ua(rng), ua(rng)};
    std::sort(a, a + 3, std::greater<double>());
    const double beta = ub(rng);
    const double c1 = uc(rng);
    const double c2 = c1 + ugap(rng);
    const double c3 = c2 + ugap(rng);
    const double d = ud(rng);
    return RateModel({RateFunction::rational_decay(a[0], beta),
                      RateFunction::rational_decay(a[1], beta),
                      RateFunction::rational_decay(a[2], beta)},
                     {RateFunction::affine_growth(c1, d),
                      RateFunction::affine_growth(c2, d),
                      RateFunction::affine_growth(c3, d)},
                     random_weights(rng), random_weights(rng));
}

// The running example: m = 2/(1+b) for all genotypes.
inline RateModel example_neutral_rates() {
    const RateFunction m = RateFunction::rational_decay(2.0, 1.0);
    const RateFunction mu = RateFunction::affine_growth(0.5, 0.5);
    return RateModel({m, m, m}, {mu, mu, mu}, {1, 1, 1}, {1, 1, 1});
}

// Equal recruitment, mortality intercepts 0.5 / 0.6 / 0.7: allele A fitter,
// heterozygote intermediate.
inline RateModel example_ordered_rates() {
    const RateFunction m = RateFunction::rational_decay(2.0, 1.0);
    return RateModel({m, m, m},
                     {RateFunction::affine_growth(0.5, 0.5),
                      RateFunction::affine_growth(0.6, 0.5),
                      RateFunction::affine_growth(0.7, 0.5)},
                     {1, 1, 1}, {1, 1, 1});
}

inline TwoPhaseParams example_two_phase() {
    return TwoPhaseParams({2, 2, 2}, {1, 1, 1},
                          {RateFunction::affine_growth(0.3, 0.2),
                           RateFunction::affine_growth(0.4, 0.2),
                           RateFunction::affine_growth(0.5, 0.2)},
                          {RateFunction::affine_growth(0.5, 0.5),
                           RateFunction::affine_growth(0.6, 0.5),
                           RateFunction::affine_growth(0.7, 0.5)},
                          {1, 1, 1}, {1, 1, 1});
}

}  // namespace testutil
