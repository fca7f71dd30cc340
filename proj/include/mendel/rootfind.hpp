// rootfind.hpp — monotone scalar root finding.
//
// All scalar equations in this library (the b* fixed point, capacities,
// population bounds) reduce to finding the root of a monotone function.
// Bisection on a valid bracket is globally convergent; a safeguarded Newton
// step is taken whenever a derivative is available and the step stays inside
// the bracket.
#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "mendel/errors.hpp"

namespace mendel {

struct RootResult {
    double root = 0.0;
    double residual = 0.0;  // g(root)
    int iterations = 0;
};

// Root of an increasing function g on [lo, hi] with g(lo) <= 0 <= g(hi).
// Stops when |g| <= resid_tol or the bracket width falls below width_tol.
inline RootResult solve_increasing(const std::function<double(double)>& g,
                                   const std::function<double(double)>& gprime,
                                   double lo, double hi, double resid_tol,
                                   double width_tol, int max_iter = 200) {
    double glo = g(lo);
    double ghi = g(hi);
    if (glo > 0.0 || ghi < 0.0)
        throw ConvergenceError("solve_increasing: invalid bracket");
    if (std::abs(glo) <= resid_tol) return {lo, glo, 0};
    if (std::abs(ghi) <= resid_tol) return {hi, ghi, 0};

    double b = 0.5 * (lo + hi);
    double gb = g(b);
    int it = 0;
    for (; it < max_iter; ++it) {
        if (std::abs(gb) <= resid_tol || hi - lo <= width_tol) break;
        if (gb > 0.0)
            hi = b;
        else
            lo = b;

        double next = std::numeric_limits<double>::quiet_NaN();
        if (gprime) {
            const double d = gprime(b);
            if (std::isfinite(d) && d > 0.0) {
                const double cand = b - gb / d;
                if (cand > lo && cand < hi) next = cand;
            }
        }
        if (!std::isfinite(next)) next = 0.5 * (lo + hi);
        b = next;
        gb = g(b);
    }
    return {b, gb, it};
}

// Bracket [0, hi] for a decreasing function h with h(0) > 0: expand hi until
// h(hi) <= 0.  Throws when the expansion cap is hit (the function never
// crosses zero, e.g. a saturation assumption fails).
inline double expand_bracket_decreasing(const std::function<double(double)>& h,
                                        double hi0 = 1.0, int max_doublings = 80) {
    double hi = hi0;
    for (int k = 0; k < max_doublings; ++k) {
        if (h(hi) <= 0.0) return hi;
        hi *= 2.0;
    }
    throw ConvergenceError("expand_bracket_decreasing: no sign change within cap");
}

// Root of a decreasing function h on [0, inf) with h(0) > 0.
inline RootResult solve_decreasing(const std::function<double(double)>& h,
                                   double resid_tol, int max_iter = 200) {
    const double h0 = h(0.0);
    if (h0 <= 0.0) return {0.0, h0, 0};
    const double hi = expand_bracket_decreasing(h);
    auto g = [&h](double c) { return -h(c); };
    RootResult r = solve_increasing(g, nullptr, 0.0, hi, resid_tol,
                                    1e-15 * std::max(1.0, hi), max_iter);
    r.residual = -r.residual;
    return r;
}

}  // namespace mendel
