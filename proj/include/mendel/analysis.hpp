// analysis.hpp — mean allelic rates and numerical certification of the
// qualitative theory on computed trajectories.
//
// Verifiers never assert: they return a VerificationReport listing each
// check with its worst deviation and location, so callers (tests, the CLI)
// decide what a failure means.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mendel/equilibria.hpp"
#include "mendel/genetics.hpp"
#include "mendel/integrate.hpp"
#include "mendel/models.hpp"

namespace mendel {

struct MeanAllelicRates {
    double m_A = 0.0;
    double m_a = 0.0;
    double mu_A = 0.0;
    double mu_a = 0.0;
    ReductionKind kind = ReductionKind::Fast;
};

// Recruitment and mortality averaged over the genotypes carrying each
// allele, weighted by allele copies.  Defined only at polymorphic states.
inline MeanAllelicRates mean_allelic_rates(const ReducedModel& model,
                                           const GenotypeVector& x) {
    const double cA = allele_count(x, Allele::A);
    const double ca = allele_count(x, Allele::a);
    if (!(cA > 0.0) || !(ca > 0.0))
        throw std::domain_error("mean_allelic_rates: state is not polymorphic");

    const RateModel& r = model.rates;
    MeanAllelicRates out;
    out.kind = model.kind;

    GenotypeVector recruited;  // M(x) x for fast, M(A(x)) A(x) for slow
    if (model.kind == ReductionKind::Fast) {
        const double b = solve_bstar(r, x);
        recruited = {r.m[0](b) * x.AA, r.m[1](b) * x.Aa, r.m[2](b) * x.aa};
    } else {
        const GenotypeVector off = mendel_offspring(x);
        const double b = solve_bstar(r, off);
        recruited = {r.m[0](b) * off.AA, r.m[1](b) * off.Aa, r.m[2](b) * off.aa};
    }
    out.m_A = allele_count(recruited, Allele::A) / cA;
    out.m_a = allele_count(recruited, Allele::a) / ca;

    const double density = dot(r.w, x.to_array());
    const GenotypeVector removed{r.mu[0](density) * x.AA, r.mu[1](density) * x.Aa,
                                 r.mu[2](density) * x.aa};
    out.mu_A = allele_count(removed, Allele::A) / cA;
    out.mu_a = allele_count(removed, Allele::a) / ca;
    return out;
}

inline double allelic_ratio(const GenotypeVector& x) {
    const double cA = allele_count(x, Allele::A);
    if (!(cA > 0.0))
        throw std::domain_error("allelic_ratio: allele A absent (zero denominator)");
    return allele_count(x, Allele::a) / cA;
}

struct CheckResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;    // worst deviation observed
    double at_time = 0.0;  // location of the worst deviation
    std::string note;
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const CheckResult& c) { return c.passed; });
    }

    void add(std::string name, bool pass, double worst, double at,
             std::string note = {}) {
        checks.push_back({std::move(name), pass, worst, at, std::move(note)});
    }

    // Stable key order, suitable for golden-file comparison.
    std::string to_text() const {
        std::ostringstream os;
        for (const auto& c : checks) {
            os << "check name=" << c.name << " pass=" << (c.passed ? "true" : "false")
               << " worst=" << c.worst << " t=" << c.at_time;
            if (!c.note.empty()) os << " note=" << c.note;
            os << '\n';
        }
        os << "summary pass=" << (passed() ? "true" : "false") << '\n';
        return os.str();
    }
};

// Hardy-Weinberg certification on a selectively neutral trajectory:
//  (a) allele frequency conservation;
//  (b) terminal state at the neutral capacity on the HW half-line;
//  (c) HW residual envelopes shrink over the recorded tail.
inline VerificationReport verify_hardy_weinberg(const Trajectory& traj,
                                                const ReducedModel& model,
                                                double tol_freq = 1e-7,
                                                double tol_state = 1e-5) {
    if (!model.selectively_neutral())
        throw NeutralityError("verify_hardy_weinberg: model is not selectively neutral");
    if (traj.states.empty() || traj.states.front().total() < kZeroTotal)
        throw std::invalid_argument("verify_hardy_weinberg: empty trajectory or start");

    VerificationReport rep;
    const double p = allele_frequency(traj.states.front(), Allele::A);
    const double q = 1.0 - p;

    double worst_dev = 0.0, worst_t = 0.0;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const double dev = std::abs(allele_frequency(traj.states[k], Allele::A) - p);
        if (dev > worst_dev) {
            worst_dev = dev;
            worst_t = traj.times[k];
        }
    }
    rep.add("frequency_conservation", worst_dev <= tol_freq, worst_dev, worst_t);

    const bool viable = model.rates.m[0](0.0) > model.rates.mu[0](0.0);
    rep.add("assumption_viability", viable, 0.0, 0.0,
            viable ? "" : "m(0) <= mu(0): neutral population is not viable");

    const GenotypeVector hw{p * p, 2.0 * p * q, q * q};
    GenotypeVector target;  // zero when not viable
    if (viable) {
        const CapacityResult c = neutral_capacity(model, hw);
        target = {c.value * hw.AA, c.value * hw.Aa, c.value * hw.aa};
    }
    const GenotypeVector& last = traj.states.back();
    double state_dev = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        state_dev = std::max(state_dev, std::abs(last[i] - target[i]));
    rep.add("terminal_capacity", state_dev <= tol_state, state_dev,
            traj.times.back());

    // Residuals x1/p^2 - x2/(2pq) and x3/q^2 - x2/(2pq) decay like
    // exp(-int mu); check the envelope over the last half of the samples.
    // Degenerate (monomorphic) frequencies make the residuals undefined.
    if (p > 1e-12 && q > 1e-12) {
        const std::size_t n = traj.states.size();
        const std::size_t start = n / 2;
        bool shrinking = true;
        double worst_growth = 0.0, growth_t = 0.0;
        auto residuals = [&](const GenotypeVector& x) {
            const double het = x.Aa / (2.0 * p * q);
            return std::make_pair(x.AA / (p * p) - het, x.aa / (q * q) - het);
        };
        for (std::size_t k = start; k + 1 < n; ++k) {
            const auto [r1a, r3a] = residuals(traj.states[k]);
            const auto [r1b, r3b] = residuals(traj.states[k + 1]);
            const double g1 = std::abs(r1b) - std::abs(r1a);
            const double g3 = std::abs(r3b) - std::abs(r3a);
            const double slack = 1e-9 * (1.0 + std::abs(r1a) + std::abs(r3a));
            if (g1 > slack || g3 > slack) {
                shrinking = false;
                if (std::max(g1, g3) > worst_growth) {
                    worst_growth = std::max(g1, g3);
                    growth_t = traj.times[k + 1];
                }
            }
        }
        rep.add("residual_envelope", shrinking, worst_growth, growth_t);
    }
    return rep;
}

// Selection certification under the fitness-ordering assumption:
//  (a) the allelic ratio ua.x/uA.x never increases and shrinks by at least
//      `min_reduction` over the horizon;
//  (b) the terminal state is the fitter monomorphic equilibrium;
//  (c) terminal heterozygote/recessive frequencies are negligible.
// Trajectories starting without allele A are checked against c3* e3 instead.
inline VerificationReport verify_selection_convergence(const Trajectory& traj,
                                                       const ReducedModel& model,
                                                       double tol_state = 1e-4,
                                                       double min_reduction = 1e-6,
                                                       double freq_tol = 1e-4) {
    const ValidationReport v = validate(model.rates);
    if (!v.selective)
        throw AssumptionError(
            "verify_selection_convergence: fitness-ordering assumption fails");
    if (traj.states.empty())
        throw std::invalid_argument("verify_selection_convergence: empty trajectory");

    VerificationReport rep;
    const GenotypeVector& first = traj.states.front();
    const GenotypeVector& last = traj.states.back();
    const bool allele_A_present = allele_count(first, Allele::A) > 0.0;

    if (!allele_A_present) {
        const CapacityResult c3 = monomorphic_capacity(model, 3);
        double dev = std::max({std::abs(last.AA), std::abs(last.Aa),
                               std::abs(last.aa - c3.value)});
        rep.add("terminal_monomorphic_a", dev <= tol_state, dev, traj.times.back());
        return rep;
    }

    bool monotone = true;
    double worst_rise = 0.0, rise_t = 0.0;
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
        const double rise =
            allelic_ratio(traj.states[k + 1]) - allelic_ratio(traj.states[k]);
        if (rise > 1e-10) {
            monotone = false;
            if (rise > worst_rise) {
                worst_rise = rise;
                rise_t = traj.times[k + 1];
            }
        }
    }
    rep.add("ratio_nonincreasing", monotone, worst_rise, rise_t);

    const double r0 = allelic_ratio(first);
    const double r_end = allelic_ratio(last);
    if (r0 > 0.0) {
        const bool reduced = r_end < r0 * (1.0 - min_reduction);
        // Fitted log-slope of the ratio: reported, never asserted.
        std::string note;
        {
            double sxx = 0, sxy = 0, sx = 0, sy = 0;
            std::size_t n = 0;
            for (std::size_t k = 0; k < traj.states.size(); ++k) {
                const double r = allelic_ratio(traj.states[k]);
                if (r <= 0.0) break;
                const double t = traj.times[k], y = std::log(r);
                sx += t; sy += y; sxx += t * t; sxy += t * y;
                ++n;
            }
            if (n >= 2) {
                const double slope =
                    (n * sxy - sx * sy) / (n * sxx - sx * sx);
                std::ostringstream os;
                os << "log_ratio_slope=" << slope;
                note = os.str();
            }
        }
        rep.add("ratio_reduced", reduced, r_end / r0, traj.times.back(), note);
    }

    const CapacityResult c1 = monomorphic_capacity(model, 1);
    const double dev = std::max({std::abs(last.AA - c1.value), std::abs(last.Aa),
                                 std::abs(last.aa)});
    rep.add("terminal_monomorphic_A", dev <= tol_state, dev, traj.times.back());

    const double total = last.total();
    const double freq_dev =
        total >= kZeroTotal ? std::max(last.Aa, last.aa) / total : 0.0;
    rep.add("terminal_frequencies", freq_dev < freq_tol, freq_dev,
            traj.times.back());
    return rep;
}

// Random holomorphic state, components log-uniform in [1e-3, 1e3].
inline GenotypeVector random_polymorphic(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    return {std::pow(10.0, u(rng)), std::pow(10.0, u(rng)), std::pow(10.0, u(rng))};
}

// Ordering chains of the mean allelic rates on random polymorphic states:
//   m1 >= m~_A >= m2 >= m~_a >= m3   and   mu1 <= mu~_A <= mu2 <= mu~_a <= mu3.
inline VerificationReport verify_rate_ordering(const ReducedModel& model,
                                               int samples = 1000,
                                               std::uint64_t seed = 42,
                                               double slack = 1e-12) {
    const ValidationReport v = validate(model.rates);
    if (!v.ordering)
        throw AssumptionError("verify_rate_ordering: fitness ordering fails");

    std::mt19937_64 rng(seed);
    const RateModel& r = model.rates;
    double worst = 0.0;
    bool ok = true;
    for (int s = 0; s < samples; ++s) {
        const GenotypeVector x = random_polymorphic(rng);
        const MeanAllelicRates mar = mean_allelic_rates(model, x);
        const double b = recruitment_density(model, x);
        const double density = dot(r.w, x.to_array());
        const double m1 = r.m[0](b), m2 = r.m[1](b), m3 = r.m[2](b);
        const double u1 = r.mu[0](density), u2 = r.mu[1](density),
                     u3 = r.mu[2](density);
        const double gaps[] = {m1 - mar.m_A,   mar.m_A - m2, m2 - mar.m_a,
                               mar.m_a - m3,   mar.mu_A - u1, u2 - mar.mu_A,
                               mar.mu_a - u2,  u3 - mar.mu_a};
        for (double g : gaps) {
            if (g < -slack) {
                ok = false;
                worst = std::min(worst, g);
            }
        }
    }
    VerificationReport rep;
    rep.add("mean_allelic_ordering", ok, worst, 0.0,
            "samples=" + std::to_string(samples));
    return rep;
}

// Tail boundedness against the certified population bound.
inline VerificationReport verify_boundedness(const Trajectory& traj,
                                             const ReducedModel& model,
                                             double slack = 1e-6) {
    const PopulationBoundResult bound = population_bound(model);
    const std::size_t n = traj.states.size();
    const std::size_t start = n / 2;
    double worst = -std::numeric_limits<double>::infinity();
    double worst_t = 0.0;
    for (std::size_t k = start; k < n; ++k) {
        const double excess = traj.states[k].total() - bound.value;
        if (excess > worst) {
            worst = excess;
            worst_t = traj.times[k];
        }
    }
    VerificationReport rep;
    std::ostringstream os;
    os << "bound=" << bound.value << " grid_max_ratio=" << bound.grid_max_ratio;
    rep.add("population_bounded", worst <= slack, worst, worst_t, os.str());
    return rep;
}

// Empirical slow-manifold fidelity: integrate the two-phase system with the
// eliminated phase accelerated by 1/eps, from an initial condition on the
// reduced manifold, and compare the slow variable against the reduced
// trajectory.  The error must decrease along eps_list with final ratio at
// most `ratio_bound`.
inline VerificationReport slow_manifold_consistency(
    const TwoPhaseParams& params, ReductionKind kind,
    const std::vector<double>& eps_list, double horizon,
    const GenotypeVector& x0, double ratio_bound = 0.7) {
    if (eps_list.empty())
        throw std::invalid_argument("slow_manifold_consistency: empty eps list");
    for (std::size_t k = 1; k < eps_list.size(); ++k)
        if (!(eps_list[k] < eps_list[k - 1]))
            throw std::invalid_argument(
                "slow_manifold_consistency: eps list must decrease");

    const ReducedModel reduced =
        kind == ReductionKind::Fast ? reduce_fast(params) : reduce_slow(params);

    SimConfig cfg;
    cfg.t_end = horizon;
    cfg.dt = 1e-3;
    cfg.method = IntegrationMethod::RK45Adaptive;
    cfg.abs_tol = 1e-11;
    cfg.rel_tol = 1e-9;
    cfg.record_every = horizon / 100.0;
    cfg.equilibrium_tol = 1e-300;  // keep record grids aligned

    const Trajectory ref = integrate(reduced, x0, cfg);

    std::vector<double> errors;
    for (double eps : eps_list) {
        TwoPhaseParams p = params;
        p.epsilon = eps;
        p.scaling = kind == ReductionKind::Fast ? PhaseScaling::AdultFast
                                                : PhaseScaling::LarvaFast;
        TwoPhaseState s0;
        if (kind == ReductionKind::Fast) {
            for (std::size_t i = 0; i < 3; ++i) s0.L[i] = params.omega[i] * x0[i];
            s0.A = recover_adults(params, x0);
        } else {
            s0.A = x0;
            const GenotypeVector lhat = recover_larvae(params, x0);
            for (std::size_t i = 0; i < 3; ++i) s0.L[i] = params.omega[i] * lhat[i];
        }
        const TwoPhaseTrajectory full = integrate(p, s0, cfg);

        double err = 0.0;
        const std::size_t n = std::min(full.times.size(), ref.times.size());
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < 3; ++i) {
                const double slow_var = kind == ReductionKind::Fast
                                            ? full.states[k].L[i] / params.omega[i]
                                            : full.states[k].A[i];
                err = std::max(err, std::abs(slow_var - ref.states[k][i]));
            }
        }
        errors.push_back(err);
    }

    VerificationReport rep;
    std::ostringstream note;
    for (std::size_t k = 0; k < errors.size(); ++k)
        note << (k ? "," : "errors=") << errors[k];

    bool decreasing = true;
    for (std::size_t k = 1; k < errors.size(); ++k)
        if (!(errors[k] < errors[k - 1])) decreasing = false;
    rep.add("manifold_error_decreasing", decreasing,
            errors.size() > 1 ? errors.back() / errors.front() : 0.0, horizon,
            note.str());
    if (errors.size() > 1) {
        const double last_ratio = errors.back() / errors[errors.size() - 2];
        rep.add("manifold_last_ratio", last_ratio <= ratio_bound, last_ratio,
                horizon);
    }
    return rep;
}

}  // namespace mendel
