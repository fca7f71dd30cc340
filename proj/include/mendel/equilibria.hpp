// equilibria.hpp — scalar solvers for equilibrium population levels.
//
// Monomorphic capacity c_i*:   m_i(b*(c e_i)) = mu_i(c w_i), or 0 when
// genotype i is not viable.  Neutral capacity c_sn*: the analogue along a
// fixed direction.  Population bound c*: the density threshold past which
// every genotype's recruitment falls below its mortality on the slice
// {w.x = 1}, approximated on a barycentric direction grid.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mendel/genetics.hpp"
#include "mendel/models.hpp"
#include "mendel/rates.hpp"
#include "mendel/rootfind.hpp"

namespace mendel {

struct CapacityResult {
    double value = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

// c_i* for i in {1, 3} (genotype index 1-based, homozygotes only).
inline CapacityResult monomorphic_capacity(const ReducedModel& model, int i,
                                           double resid_tol = 1e-10) {
    if (i != 1 && i != 3)
        throw std::invalid_argument("monomorphic_capacity: i must be 1 or 3");
    const std::size_t idx = i == 1 ? 0 : 2;
    const RateModel& r = model.rates;
    if (!(r.m[idx](0.0) > r.mu[idx](0.0))) return {0.0, 0.0, 0};

    // A(e_i) = e_i for the homozygotes, so the slow system solves the same
    // scalar equation as the fast one.
    auto h = [&](double c) {
        GenotypeVector x;
        x[idx] = c;
        return r.m[idx](solve_bstar(r, x)) - r.mu[idx](c * r.w[idx]);
    };
    const RootResult root = solve_decreasing(h, resid_tol);
    if (std::abs(root.residual) > resid_tol)
        throw ConvergenceError("monomorphic_capacity: residual above tolerance");
    return {root.root, root.residual, root.iterations};
}

// c_sn*(x_dir): m(b_sn(c v.x)) = mu(c w.x) for a selectively neutral model.
// When the model is not viable, returns 0 if strict is false, else throws.
inline CapacityResult neutral_capacity(const ReducedModel& model,
                                       const GenotypeVector& x_dir,
                                       double resid_tol = 1e-10,
                                       bool strict = true) {
    const RateModel& r = model.rates;
    if (!r.selectively_neutral())
        throw NeutralityError("neutral_capacity: model is not selectively neutral");
    if (x_dir.total() < kZeroTotal)
        throw std::invalid_argument("neutral_capacity: direction must be nonzero");
    if (!(r.m[0](0.0) > r.mu[0](0.0))) {
        if (strict)
            throw AssumptionError("neutral_capacity: model not viable (m(0) <= mu(0))");
        return {0.0, 0.0, 0};
    }
    const double sv = dot(r.v, x_dir.to_array());
    const double sw = dot(r.w, x_dir.to_array());
    auto h = [&](double c) {
        return r.m[0](solve_bstar_neutral(r, c * sv)) - r.mu[0](c * sw);
    };
    const RootResult root = solve_decreasing(h, resid_tol);
    if (std::abs(root.residual) > resid_tol)
        throw ConvergenceError("neutral_capacity: residual above tolerance");
    return {root.root, root.residual, root.iterations};
}

// Barycentric grid on the simplex slice {w.x = 1}, `subdivisions` steps per
// edge: (n+1)(n+2)/2 directions.
inline std::vector<GenotypeVector> direction_grid(const Vec3& w, int subdivisions) {
    std::vector<GenotypeVector> dirs;
    for (int a = 0; a <= subdivisions; ++a) {
        for (int b = 0; b + a <= subdivisions; ++b) {
            const int c = subdivisions - a - b;
            const double s = static_cast<double>(subdivisions);
            GenotypeVector x{a / s, b / s, c / s};
            const double wx = dot(w, x.to_array());
            for (std::size_t k = 0; k < 3; ++k) x[k] /= wx;
            dirs.push_back(x);
        }
    }
    return dirs;
}

struct PopulationBoundResult {
    double value = 0.0;
    double grid_max_ratio = 0.0;  // max_i m_i / mu_i over the grid at the bound
    int grid_size = 0;
    int iterations = 0;
};

// Upper estimate of c*: the crossing where the grid max of
// m_i(b*(c x)) - mu_i(c) (fast) or m_i(b*(c A(x))) - mu_i(c) (slow) hits 0.
inline PopulationBoundResult population_bound(const ReducedModel& model,
                                              int subdivisions = 20,
                                              double rel_width = 1e-6) {
    const RateModel& r = model.rates;
    const auto dirs = direction_grid(r.w, subdivisions);
    const bool slow = model.kind == ReductionKind::Slow;

    auto grid_gap = [&](double c) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& dir : dirs) {
            GenotypeVector arg = dir;
            if (slow && dir.total() >= kZeroTotal) arg = mendel_offspring(dir);
            GenotypeVector scaled{c * arg.AA, c * arg.Aa, c * arg.aa};
            const double b = solve_bstar(r, scaled);
            for (std::size_t i = 0; i < 3; ++i)
                worst = std::max(worst, r.m[i](b) - r.mu[i](c));
        }
        return worst;
    };

    PopulationBoundResult out;
    out.grid_size = static_cast<int>(dirs.size());

    if (grid_gap(0.0) <= 0.0) {
        out.value = 0.0;
    } else {
        double hi = expand_bracket_decreasing(grid_gap);
        double lo = 0.0;
        int it = 0;
        while (hi - lo > rel_width * std::max(1.0, hi) && it < 200) {
            const double mid = 0.5 * (lo + hi);
            (grid_gap(mid) > 0.0 ? lo : hi) = mid;
            ++it;
        }
        out.value = hi;  // certified side: grid gap <= 0 there
        out.iterations = it;
    }

    double ratio = 0.0;
    for (const auto& dir : dirs) {
        GenotypeVector arg = dir;
        if (slow && dir.total() >= kZeroTotal) arg = mendel_offspring(dir);
        GenotypeVector scaled{out.value * arg.AA, out.value * arg.Aa,
                              out.value * arg.aa};
        const double b = solve_bstar(r, scaled);
        for (std::size_t i = 0; i < 3; ++i) {
            const double mu = r.mu[i](out.value);
            if (mu > 0.0) ratio = std::max(ratio, r.m[i](b) / mu);
        }
    }
    out.grid_max_ratio = ratio;
    return out;
}

}  // namespace mendel
