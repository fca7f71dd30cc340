// integrate.hpp — ODE integration with nonnegativity preservation,
// equilibrium detection and trajectory recording.
//
// Two steppers: classic fixed-step RK4 and adaptive Dormand-Prince 5(4).
// The exact flow preserves the nonnegative orthant, so components pushed
// into [-1e-12, 0) by roundoff are clamped to zero; larger negatives reject
// the step (adaptive) or abort (fixed).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mendel/errors.hpp"
#include "mendel/genetics.hpp"
#include "mendel/models.hpp"

namespace mendel {

enum class IntegrationMethod { RK4Fixed, RK45Adaptive };

enum class TrajectoryStatus { ReachedHorizon, Equilibrium };

struct SimConfig {
    double t_end = 100.0;
    double dt = 0.01;  // base step (fixed) / initial step (adaptive)
    IntegrationMethod method = IntegrationMethod::RK45Adaptive;
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    double record_every = 1.0;
    double equilibrium_tol = 1e-10;

    void check() const {
        if (!(t_end > 0.0) || !(dt > 0.0) || dt > t_end)
            throw std::invalid_argument("SimConfig: need 0 < dt <= t_end");
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(record_every > 0.0) ||
            !(equilibrium_tol > 0.0))
            throw std::invalid_argument("SimConfig: tolerances must be positive");
    }
};

namespace detail {

inline constexpr double kNegativeClamp = 1e-12;

template <std::size_t N>
using StateVec = std::array<double, N>;

template <std::size_t N>
double inf_norm(const StateVec<N>& y) {
    double m = 0.0;
    for (double c : y) m = std::max(m, std::abs(c));
    return m;
}

// Returns false when a component is too negative to clamp.
template <std::size_t N>
bool clamp_nonnegative(StateVec<N>& y) {
    for (double& c : y) {
        if (c < 0.0) {
            if (c < -kNegativeClamp) return false;
            c = 0.0;
        }
    }
    return true;
}

template <std::size_t N>
struct RawTrajectory {
    std::vector<double> times;
    std::vector<StateVec<N>> states;
    TrajectoryStatus status = TrajectoryStatus::ReachedHorizon;
};

template <std::size_t N, class Field>
StateVec<N> rk4_step(const Field& f, const StateVec<N>& y, double h) {
    const StateVec<N> k1 = f(y);
    StateVec<N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    const StateVec<N> k2 = f(tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    const StateVec<N> k3 = f(tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
    const StateVec<N> k4 = f(tmp);
    StateVec<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// Dormand-Prince 5(4) pair.  Returns the 5th-order solution and the
// embedded error estimate.
template <std::size_t N, class Field>
void dopri_step(const Field& f, const StateVec<N>& y, double h, StateVec<N>& out,
                StateVec<N>& err) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0,
                            b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                            b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                            e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                            e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    StateVec<N> tmp;
    const StateVec<N> k1 = f(y);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    const StateVec<N> k2 = f(tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const StateVec<N> k3 = f(tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const StateVec<N> k4 = f(tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const StateVec<N> k5 = f(tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                             a65 * k5[i]);
    const StateVec<N> k6 = f(tmp);
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                             b6 * k6[i]);
    const StateVec<N> k7 = f(out);
    for (std::size_t i = 0; i < N; ++i)
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                      e6 * k6[i] + e7 * k7[i]);
}

template <std::size_t N, class Field>
bool at_equilibrium(const Field& f, const StateVec<N>& y, double tol) {
    return inf_norm<N>(f(y)) < tol * (1.0 + inf_norm<N>(y));
}

// Generic driver.  Records at t = 0, at multiples of record_every and at the
// final time; steps are clipped to record boundaries so recorded times are
// exact.
template <std::size_t N, class Field>
RawTrajectory<N> integrate_raw(const Field& f, StateVec<N> y, const SimConfig& cfg) {
    cfg.check();
    RawTrajectory<N> traj;
    if (!clamp_nonnegative<N>(y))
        throw std::invalid_argument("integrate: negative initial state");

    double t = 0.0;
    double next_record = 0.0;
    auto record = [&](double time, const StateVec<N>& state) {
        traj.times.push_back(time);
        traj.states.push_back(state);
    };
    record(0.0, y);
    next_record += cfg.record_every;

    if (at_equilibrium<N>(f, y, cfg.equilibrium_tol)) {
        traj.status = TrajectoryStatus::Equilibrium;
        return traj;
    }

    double h = cfg.dt;
    const bool adaptive = cfg.method == IntegrationMethod::RK45Adaptive;

    while (t < cfg.t_end - 1e-14 * cfg.t_end) {
        const double limit = std::min(cfg.t_end, next_record);
        double step = std::min(h, limit - t);
        StateVec<N> ynew;

        if (adaptive) {
            bool accepted = false;
            while (!accepted) {
                StateVec<N> err;
                dopri_step<N>(f, y, step, ynew, err);
                double err_norm = 0.0;
                bool finite = true;
                for (std::size_t i = 0; i < N; ++i) {
                    if (!std::isfinite(ynew[i])) finite = false;
                    const double scale =
                        cfg.abs_tol +
                        cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                    err_norm = std::max(err_norm, std::abs(err[i]) / scale);
                }
                const bool orthant_ok = finite && clamp_nonnegative<N>(ynew);
                if (finite && err_norm <= 1.0 && orthant_ok) {
                    accepted = true;
                    const double grow =
                        err_norm > 0.0
                            ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0)
                            : 5.0;
                    h = step * grow;
                } else {
                    step *= finite && orthant_ok
                                ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.9)
                                : 0.5;
                    if (step < 1e-14)
                        throw IntegrationError("integrate: step size underflow");
                }
            }
        } else {
            ynew = rk4_step<N>(f, y, step);
            for (std::size_t i = 0; i < N; ++i)
                if (!std::isfinite(ynew[i]))
                    throw IntegrationError("integrate: non-finite state");
            if (!clamp_nonnegative<N>(ynew))
                throw IntegrationError("integrate: state left the nonnegative orthant");
        }

        t += step;
        y = ynew;

        const bool done_record = t >= next_record - 1e-12 * std::max(1.0, next_record);
        if (done_record) {
            record(t, y);
            next_record += cfg.record_every;
        }

        if (at_equilibrium<N>(f, y, cfg.equilibrium_tol)) {
            if (!done_record) record(t, y);
            traj.status = TrajectoryStatus::Equilibrium;
            return traj;
        }
    }
    if (traj.times.back() < cfg.t_end - 1e-12 * cfg.t_end) record(cfg.t_end, y);
    return traj;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Per-sample derived quantities; recomputable from the state.
struct DerivedSample {
    double p_A = 0.0;
    double p_a = 0.0;
    double ratio_a_over_A = 0.0;  // +inf when allele A is absent
    double b_star = 0.0;
    double total = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<GenotypeVector> states;
    std::vector<DerivedSample> derived;
    TrajectoryStatus status = TrajectoryStatus::ReachedHorizon;

    const GenotypeVector& back() const { return states.back(); }
};

struct TwoPhaseTrajectory {
    std::vector<double> times;
    std::vector<TwoPhaseState> states;
    TrajectoryStatus status = TrajectoryStatus::ReachedHorizon;
};

inline DerivedSample derive_sample(const ReducedModel& model, const GenotypeVector& x) {
    DerivedSample d;
    d.total = x.total();
    const double ca = allele_count(x, Allele::a);
    const double cA = allele_count(x, Allele::A);
    if (d.total >= kZeroTotal) {
        d.p_A = cA / d.total;
        d.p_a = ca / d.total;
    }
    d.ratio_a_over_A =
        cA > 0.0 ? ca / cA : std::numeric_limits<double>::infinity();
    d.b_star = recruitment_density(model, x);
    return d;
}

inline Trajectory integrate(const ReducedModel& model, const GenotypeVector& x0,
                            const SimConfig& cfg) {
    // Internal RK stages may probe slightly negative states; project them
    // onto the orthant before evaluating the vector field.
    auto field = [&model](detail::StateVec<3> y) {
        for (double& c : y) c = std::max(c, 0.0);
        const GenotypeVector d = reduced_rhs(model, GenotypeVector(y));
        return detail::StateVec<3>{d.AA, d.Aa, d.aa};
    };
    const auto raw = detail::integrate_raw<3>(field, x0.to_array(), cfg);
    Trajectory traj;
    traj.times = raw.times;
    traj.status = raw.status;
    traj.states.reserve(raw.states.size());
    traj.derived.reserve(raw.states.size());
    for (const auto& s : raw.states) {
        const GenotypeVector x(s);
        traj.states.push_back(x);
        traj.derived.push_back(derive_sample(model, x));
    }
    return traj;
}

inline TwoPhaseTrajectory integrate(const TwoPhaseParams& params,
                                    const TwoPhaseState& s0, const SimConfig& cfg) {
    auto field = [&params](detail::StateVec<6> y) {
        for (double& c : y) c = std::max(c, 0.0);
        const TwoPhaseState s{GenotypeVector(y[0], y[1], y[2]),
                              GenotypeVector(y[3], y[4], y[5])};
        const TwoPhaseState d = two_phase_rhs(params, s);
        return detail::StateVec<6>{d.L.AA, d.L.Aa, d.L.aa, d.A.AA, d.A.Aa, d.A.aa};
    };
    const detail::StateVec<6> y0{s0.L.AA, s0.L.Aa, s0.L.aa,
                                 s0.A.AA, s0.A.Aa, s0.A.aa};
    const auto raw = detail::integrate_raw<6>(field, y0, cfg);
    TwoPhaseTrajectory traj;
    traj.times = raw.times;
    traj.status = raw.status;
    traj.states.reserve(raw.states.size());
    for (const auto& s : raw.states)
        traj.states.push_back({GenotypeVector(s[0], s[1], s[2]),
                               GenotypeVector(s[3], s[4], s[5])});
    return traj;
}

// Last state when the vector field residual there is below the equilibrium
// tolerance.
inline std::optional<GenotypeVector> detect_equilibrium(const Trajectory& traj,
                                                        const ReducedModel& model,
                                                        double tol = 1e-10) {
    if (traj.states.empty())
        throw std::invalid_argument("detect_equilibrium: empty trajectory");
    const GenotypeVector& last = traj.states.back();
    const GenotypeVector f = reduced_rhs(model, last);
    const double fn = std::max({std::abs(f.AA), std::abs(f.Aa), std::abs(f.aa)});
    const double xn = std::max({std::abs(last.AA), std::abs(last.Aa), std::abs(last.aa)});
    if (fn < tol * (1.0 + xn)) return last;
    return std::nullopt;
}

// CSV export, 17 significant digits.  Header:
//   t,x1,x2,x3,pA,pa,ratio_a_over_A,b_star,total
inline void write_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x1,x2,x3,pA,pa,ratio_a_over_A,b_star,total\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto& x = traj.states[k];
        const auto& d = traj.derived[k];
        os << detail::format_double(traj.times[k]) << ','
           << detail::format_double(x.AA) << ',' << detail::format_double(x.Aa)
           << ',' << detail::format_double(x.aa) << ','
           << detail::format_double(d.p_A) << ',' << detail::format_double(d.p_a)
           << ',' << detail::format_double(d.ratio_a_over_A) << ','
           << detail::format_double(d.b_star) << ','
           << detail::format_double(d.total) << '\n';
    }
}

// Two-phase export: genotype columns hold the combined L + A population,
// b_star is not defined for the full system and is written as nan.
inline void write_csv(std::ostream& os, const TwoPhaseTrajectory& traj) {
    os << "t,x1,x2,x3,pA,pa,ratio_a_over_A,b_star,total,L1,L2,L3,A1,A2,A3\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const auto& s = traj.states[k];
        const GenotypeVector x{s.L.AA + s.A.AA, s.L.Aa + s.A.Aa, s.L.aa + s.A.aa};
        const double total = x.total();
        const double cA = allele_count(x, Allele::A);
        const double ca = allele_count(x, Allele::a);
        const double pA = total >= kZeroTotal ? cA / total : 0.0;
        const double pa = total >= kZeroTotal ? ca / total : 0.0;
        const double ratio =
            cA > 0.0 ? ca / cA : std::numeric_limits<double>::infinity();
        os << detail::format_double(traj.times[k]) << ','
           << detail::format_double(x.AA) << ',' << detail::format_double(x.Aa)
           << ',' << detail::format_double(x.aa) << ','
           << detail::format_double(pA) << ',' << detail::format_double(pa) << ','
           << detail::format_double(ratio) << ','
           << detail::format_double(std::numeric_limits<double>::quiet_NaN()) << ','
           << detail::format_double(total) << ','
           << detail::format_double(s.L.AA) << ',' << detail::format_double(s.L.Aa)
           << ',' << detail::format_double(s.L.aa) << ','
           << detail::format_double(s.A.AA) << ',' << detail::format_double(s.A.Aa)
           << ',' << detail::format_double(s.A.aa) << '\n';
    }
}

}  // namespace mendel
