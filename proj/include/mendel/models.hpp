// models.hpp — vector fields: the full two-phase model and the reduced
// fast/slow systems, plus the slow-manifold reduction maps.
//
// Reduced dynamics, with M(x) = diag{m_i(b*(x))} and mu(z) = diag{mu_i(z)}:
//
//   fast (system F):  xdot = A(M(x) x)    - mu(w.x) x
//   slow (system S):  xdot = M(A(x)) A(x) - mu(w.x) x
//
// The fast reduction eliminates the adult phase (its state is the rescaled
// pre-adult vector Lhat = L / omega); the slow reduction eliminates the
// pre-adult phase (its state is the adult vector A).
#pragma once

#include <array>
#include <utility>

#include "mendel/genetics.hpp"
#include "mendel/rates.hpp"

namespace mendel {

enum class ReductionKind { Fast, Slow };

struct ReducedModel {
    ReductionKind kind;
    RateModel rates;

    bool selectively_neutral() const { return rates.selectively_neutral(); }
};

inline bool is_selectively_neutral(const ReducedModel& model) {
    return model.selectively_neutral();
}

// Which phase is accelerated by 1/epsilon in stiff two-phase experiments.
enum class PhaseScaling { None, AdultFast, LarvaFast };

struct TwoPhaseParams {
    Vec3 omega{1.0, 1.0, 1.0};  // fertility rates
    Vec3 nu{1.0, 1.0, 1.0};     // maturation rates
    std::array<RateFunction, 3> mu_larva;  // pre-adult mortality, increasing
    std::array<RateFunction, 3> mu_adult;  // adult mortality, increasing
    Vec3 v{1.0, 1.0, 1.0};
    Vec3 w{1.0, 1.0, 1.0};
    double epsilon = 1.0;
    PhaseScaling scaling = PhaseScaling::None;

    TwoPhaseParams(Vec3 omega_, Vec3 nu_, std::array<RateFunction, 3> mu_larva_,
                   std::array<RateFunction, 3> mu_adult_, Vec3 v_, Vec3 w_,
                   double epsilon_ = 1.0, PhaseScaling scaling_ = PhaseScaling::None)
        : omega(omega_),
          nu(nu_),
          mu_larva(std::move(mu_larva_)),
          mu_adult(std::move(mu_adult_)),
          v(v_),
          w(w_),
          epsilon(epsilon_),
          scaling(scaling_) {
        for (int i = 0; i < 3; ++i) {
            if (!(omega[i] > 0.0) || !(nu[i] > 0.0) || !(v[i] > 0.0) || !(w[i] > 0.0))
                throw std::invalid_argument(
                    "TwoPhaseParams: omega, nu, v, w must be positive");
            if (!mu_larva[i].nondecreasing() || !mu_adult[i].nondecreasing())
                throw std::invalid_argument(
                    "TwoPhaseParams: mortality functions must be increasing");
        }
        if (!(epsilon > 0.0))
            throw std::invalid_argument("TwoPhaseParams: epsilon must be positive");
    }
};

struct TwoPhaseState {
    GenotypeVector L;  // pre-adult
    GenotypeVector A;  // adult
};

// Right-hand side of the full two-phase system:
//   Ldot_i = omega_i alpha_i(A) - mu_i(v.L) L_i - nu_i L_i
//   Adot_i = nu_i L_i - muhat_i(w.A) A_i
// The birth term is zero when the adult population is empty.
inline TwoPhaseState two_phase_rhs(const TwoPhaseParams& p, const TwoPhaseState& s) {
    GenotypeVector births;  // alpha(A), or 0 for an empty adult pool
    if (s.A.total() >= kZeroTotal) births = mendel_offspring(s.A);

    const double larva_density = dot(p.v, s.L.to_array());
    const double adult_density = dot(p.w, s.A.to_array());

    TwoPhaseState d;
    for (std::size_t i = 0; i < 3; ++i) {
        d.L[i] = p.omega[i] * births[i] - p.mu_larva[i](larva_density) * s.L[i] -
                 p.nu[i] * s.L[i];
        d.A[i] = p.nu[i] * s.L[i] - p.mu_adult[i](adult_density) * s.A[i];
    }
    if (p.scaling == PhaseScaling::AdultFast) {
        for (std::size_t i = 0; i < 3; ++i) d.A[i] /= p.epsilon;
    } else if (p.scaling == PhaseScaling::LarvaFast) {
        for (std::size_t i = 0; i < 3; ++i) d.L[i] /= p.epsilon;
    }
    return d;
}

namespace detail {

// omega nu / inner(z); collapses to the rational family when inner is affine
// with a positive intercept.
inline RateFunction reciprocal_rate(double scale, const RateFunction& inner) {
    if (inner.family() == RateFunction::Family::AffineGrowth &&
        inner.params()[0] > 0.0) {
        const double c = inner.params()[0];
        const double d = inner.params()[1];
        if (d > 0.0) return RateFunction::rational_decay(scale / c, d / c);
        // Constant mortality: a rational decay with vanishing slope is not a
        // valid family member, so fall through to the generic composite.
    }
    return RateFunction::scaled_reciprocal(scale, inner);
}

inline RateFunction shifted_rate(double offset, const RateFunction& inner) {
    if (inner.family() == RateFunction::Family::AffineGrowth)
        return RateFunction::affine_growth(offset + inner.params()[0],
                                           inner.params()[1]);
    if (inner.family() == RateFunction::Family::PowerGrowth)
        return RateFunction::power_growth(offset + inner.params()[0],
                                          inner.params()[1], inner.params()[2]);
    return RateFunction::shifted(offset, inner);
}

}  // namespace detail

// Fast reproductive (adult) phase eliminated.  State: Lhat = L / omega.
//   m_i(b)  = omega_i nu_i / muhat_i(b)     (b solved with weights w)
//   mu_i(z) = nu_i + mu_i(z)                (argument vhat.Lhat, vhat = diag{omega} v)
inline ReducedModel reduce_fast(const TwoPhaseParams& p) {
    std::array<RateFunction, 3> m = {
        detail::reciprocal_rate(p.omega[0] * p.nu[0], p.mu_adult[0]),
        detail::reciprocal_rate(p.omega[1] * p.nu[1], p.mu_adult[1]),
        detail::reciprocal_rate(p.omega[2] * p.nu[2], p.mu_adult[2])};
    std::array<RateFunction, 3> mu = {
        detail::shifted_rate(p.nu[0], p.mu_larva[0]),
        detail::shifted_rate(p.nu[1], p.mu_larva[1]),
        detail::shifted_rate(p.nu[2], p.mu_larva[2])};
    const Vec3 vhat{p.omega[0] * p.v[0], p.omega[1] * p.v[1], p.omega[2] * p.v[2]};
    return ReducedModel{ReductionKind::Fast,
                        RateModel(std::move(m), std::move(mu), p.w, vhat)};
}

// Slow reproductive (adult) phase kept.  State: the adult vector A.
//   m_i(b)  = omega_i nu_i / (nu_i + mu_i(b))   (b solved with weights v_i / nu_i)
//   mu_i(z) = muhat_i(z)                        (argument w.A)
inline ReducedModel reduce_slow(const TwoPhaseParams& p) {
    std::array<RateFunction, 3> m = {
        detail::reciprocal_rate(p.omega[0] * p.nu[0],
                                detail::shifted_rate(p.nu[0], p.mu_larva[0])),
        detail::reciprocal_rate(p.omega[1] * p.nu[1],
                                detail::shifted_rate(p.nu[1], p.mu_larva[1])),
        detail::reciprocal_rate(p.omega[2] * p.nu[2],
                                detail::shifted_rate(p.nu[2], p.mu_larva[2]))};
    std::array<RateFunction, 3> mu = p.mu_adult;
    const Vec3 vr{p.v[0] / p.nu[0], p.v[1] / p.nu[1], p.v[2] / p.nu[2]};
    return ReducedModel{ReductionKind::Slow,
                        RateModel(std::move(m), std::move(mu), vr, p.w)};
}

// xdot = A(M(x) x) - mu(w.x) x, with a zero birth term at x = 0.
inline GenotypeVector fast_rhs(const ReducedModel& model, const GenotypeVector& x) {
    const RateModel& r = model.rates;
    GenotypeVector birth;
    if (x.total() >= kZeroTotal) {
        const double b = solve_bstar(r, x);
        GenotypeVector mx{r.m[0](b) * x.AA, r.m[1](b) * x.Aa, r.m[2](b) * x.aa};
        if (mx.total() >= kZeroTotal) birth = mendel_offspring(mx);
    }
    const double density = dot(r.w, x.to_array());
    return {birth.AA - r.mu[0](density) * x.AA, birth.Aa - r.mu[1](density) * x.Aa,
            birth.aa - r.mu[2](density) * x.aa};
}

// xdot = M(A(x)) A(x) - mu(w.x) x, with a zero birth term at x = 0.
inline GenotypeVector slow_rhs(const ReducedModel& model, const GenotypeVector& x) {
    const RateModel& r = model.rates;
    GenotypeVector birth;
    if (x.total() >= kZeroTotal) {
        const GenotypeVector off = mendel_offspring(x);
        const double b = solve_bstar(r, off);
        birth = {r.m[0](b) * off.AA, r.m[1](b) * off.Aa, r.m[2](b) * off.aa};
    }
    const double density = dot(r.w, x.to_array());
    return {birth.AA - r.mu[0](density) * x.AA, birth.Aa - r.mu[1](density) * x.Aa,
            birth.aa - r.mu[2](density) * x.aa};
}

inline GenotypeVector reduced_rhs(const ReducedModel& model, const GenotypeVector& x) {
    return model.kind == ReductionKind::Fast ? fast_rhs(model, x) : slow_rhs(model, x);
}

// Density argument entering the recruitment rates of a reduced model: b*(x)
// for the fast system, b*(A(x)) for the slow one.
inline double recruitment_density(const ReducedModel& model, const GenotypeVector& x) {
    if (model.kind == ReductionKind::Fast) return solve_bstar(model.rates, x);
    if (x.total() < kZeroTotal) return 0.0;
    return solve_bstar(model.rates, mendel_offspring(x));
}

// Adult population on the fast-reduction manifold: A_i = m_i(b*(Lhat)) Lhat_i.
inline GenotypeVector recover_adults(const TwoPhaseParams& p,
                                     const GenotypeVector& lhat) {
    const ReducedModel model = reduce_fast(p);
    const double b = solve_bstar(model.rates, lhat);
    return {model.rates.m[0](b) * lhat.AA, model.rates.m[1](b) * lhat.Aa,
            model.rates.m[2](b) * lhat.aa};
}

// Rescaled pre-adult population on the slow-reduction manifold:
// Lhat_i = alpha_i(A) / (nu_i + mu_i(b*(A(A)))).
inline GenotypeVector recover_larvae(const TwoPhaseParams& p, const GenotypeVector& a) {
    if (a.total() < kZeroTotal) return {};
    const ReducedModel model = reduce_slow(p);
    const GenotypeVector off = mendel_offspring(a);
    const double b = solve_bstar(model.rates, off);
    GenotypeVector lhat;
    for (std::size_t i = 0; i < 3; ++i)
        lhat[i] = off[i] / (p.nu[i] + p.mu_larva[i](b));
    return lhat;
}

}  // namespace mendel
