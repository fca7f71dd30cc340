// rates.hpp — density-dependent recruitment/mortality rate families and the
// implicit b* solver.
//
// A RateModel carries one recruitment function m_i (decreasing) and one
// mortality function mu_i (increasing) per genotype, plus the positive weight
// vectors v (recruitment-density) and w (mortality-density).  The effective
// competition density b*(x) is the unique fixed point of
//
//   b = sum_i v_i m_i(b) x_i .
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mendel/errors.hpp"
#include "mendel/genetics.hpp"
#include "mendel/rootfind.hpp"

namespace mendel {

class RateFunction {
  public:
    enum class Family {
        RationalDecay,     // a / (1 + beta z)
        ExpDecay,          // a exp(-beta z)
        AffineGrowth,      // c + d z
        PowerGrowth,       // c + d z^p
        Tabulated,         // piecewise linear, declared monotone direction
        ScaledReciprocal,  // k / inner(z)
        Shifted,           // c + inner(z)
    };

    static RateFunction rational_decay(double a, double beta) {
        require(a > 0.0 && beta > 0.0, "rational_decay: a and beta must be positive");
        return RateFunction(Family::RationalDecay, {a, beta});
    }
    static RateFunction exp_decay(double a, double beta) {
        require(a > 0.0 && beta > 0.0, "exp_decay: a and beta must be positive");
        return RateFunction(Family::ExpDecay, {a, beta});
    }
    static RateFunction affine_growth(double c, double d) {
        require(c >= 0.0 && d >= 0.0, "affine_growth: c and d must be nonnegative");
        return RateFunction(Family::AffineGrowth, {c, d});
    }
    static RateFunction power_growth(double c, double d, double p) {
        require(c >= 0.0 && d >= 0.0 && p > 0.0,
                "power_growth: need c >= 0, d >= 0, p > 0");
        return RateFunction(Family::PowerGrowth, {c, d, p});
    }
    static RateFunction tabulated(std::vector<double> z, std::vector<double> f,
                                  bool increasing) {
        require(z.size() >= 2 && z.size() == f.size(),
                "tabulated: need at least two matching knots");
        for (std::size_t i = 1; i < z.size(); ++i) {
            require(z[i] > z[i - 1], "tabulated: abscissae must increase");
            const bool ok = increasing ? f[i] >= f[i - 1] : f[i] <= f[i - 1];
            require(ok, "tabulated: values violate the declared direction");
        }
        RateFunction r(Family::Tabulated, {});
        r.knots_z_ = std::move(z);
        r.knots_f_ = std::move(f);
        r.tab_increasing_ = increasing;
        return r;
    }
    static RateFunction scaled_reciprocal(double k, RateFunction inner) {
        require(k > 0.0, "scaled_reciprocal: scale must be positive");
        require(inner(0.0) > 0.0,
                "scaled_reciprocal: inner function must be positive at 0");
        RateFunction r(Family::ScaledReciprocal, {k});
        r.inner_ = std::make_shared<RateFunction>(std::move(inner));
        return r;
    }
    static RateFunction shifted(double c, RateFunction inner) {
        require(c >= 0.0, "shifted: offset must be nonnegative");
        RateFunction r(Family::Shifted, {c});
        r.inner_ = std::make_shared<RateFunction>(std::move(inner));
        return r;
    }

    double operator()(double z) const {
        switch (family_) {
            case Family::RationalDecay:
                return params_[0] / (1.0 + params_[1] * z);
            case Family::ExpDecay:
                return params_[0] * std::exp(-params_[1] * z);
            case Family::AffineGrowth:
                return params_[0] + params_[1] * z;
            case Family::PowerGrowth:
                return params_[0] + params_[1] * std::pow(z, params_[2]);
            case Family::Tabulated:
                return eval_tabulated(z);
            case Family::ScaledReciprocal:
                return params_[0] / (*inner_)(z);
            case Family::Shifted:
                return params_[0] + (*inner_)(z);
        }
        return 0.0;
    }

    double slope(double z) const {
        switch (family_) {
            case Family::RationalDecay: {
                const double den = 1.0 + params_[1] * z;
                return -params_[0] * params_[1] / (den * den);
            }
            case Family::ExpDecay:
                return -params_[0] * params_[1] * std::exp(-params_[1] * z);
            case Family::AffineGrowth:
                return params_[1];
            case Family::PowerGrowth:
                if (z <= 0.0) return params_[2] >= 1.0 ? (params_[2] == 1.0 ? params_[1] : 0.0)
                                                       : std::numeric_limits<double>::infinity();
                return params_[1] * params_[2] * std::pow(z, params_[2] - 1.0);
            case Family::Tabulated:
                return slope_tabulated(z);
            case Family::ScaledReciprocal: {
                const double g = (*inner_)(z);
                return -params_[0] * inner_->slope(z) / (g * g);
            }
            case Family::Shifted:
                return inner_->slope(z);
        }
        return 0.0;
    }

    bool nonincreasing() const {
        switch (family_) {
            case Family::RationalDecay:
            case Family::ExpDecay:
                return true;
            case Family::AffineGrowth:
            case Family::PowerGrowth:
                return params_[1] == 0.0;
            case Family::Tabulated:
                return !tab_increasing_;
            case Family::ScaledReciprocal:
                return inner_->nondecreasing();
            case Family::Shifted:
                return inner_->nonincreasing();
        }
        return false;
    }

    bool nondecreasing() const {
        switch (family_) {
            case Family::RationalDecay:
            case Family::ExpDecay:
                return false;
            case Family::AffineGrowth:
            case Family::PowerGrowth:
                return true;
            case Family::Tabulated:
                return tab_increasing_;
            case Family::ScaledReciprocal:
                return inner_->nonincreasing();
            case Family::Shifted:
                return inner_->nondecreasing();
        }
        return false;
    }

    Family family() const { return family_; }
    const std::vector<double>& params() const { return params_; }
    const std::vector<double>& knots_z() const { return knots_z_; }
    const std::vector<double>& knots_f() const { return knots_f_; }
    bool tab_increasing() const { return tab_increasing_; }
    const RateFunction* inner() const { return inner_.get(); }

    friend bool operator==(const RateFunction& a, const RateFunction& b) {
        if (a.family_ != b.family_ || a.params_ != b.params_) return false;
        if (a.family_ == Family::Tabulated)
            return a.knots_z_ == b.knots_z_ && a.knots_f_ == b.knots_f_ &&
                   a.tab_increasing_ == b.tab_increasing_;
        if (a.inner_ && b.inner_) return *a.inner_ == *b.inner_;
        return a.inner_ == nullptr && b.inner_ == nullptr;
    }
    friend bool operator!=(const RateFunction& a, const RateFunction& b) {
        return !(a == b);
    }

  private:
    RateFunction(Family f, std::vector<double> p) : family_(f), params_(std::move(p)) {}

    static void require(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    }

    double eval_tabulated(double z) const {
        if (z <= knots_z_.front()) return knots_f_.front();
        if (z >= knots_z_.back()) return knots_f_.back();
        std::size_t hi = 1;
        while (knots_z_[hi] < z) ++hi;
        const double t = (z - knots_z_[hi - 1]) / (knots_z_[hi] - knots_z_[hi - 1]);
        return knots_f_[hi - 1] + t * (knots_f_[hi] - knots_f_[hi - 1]);
    }

    double slope_tabulated(double z) const {
        if (z <= knots_z_.front() || z >= knots_z_.back()) return 0.0;
        std::size_t hi = 1;
        while (knots_z_[hi] < z) ++hi;
        return (knots_f_[hi] - knots_f_[hi - 1]) / (knots_z_[hi] - knots_z_[hi - 1]);
    }

    Family family_;
    std::vector<double> params_;
    std::vector<double> knots_z_, knots_f_;
    bool tab_increasing_ = false;
    std::shared_ptr<const RateFunction> inner_;
};

struct RateModel {
    std::array<RateFunction, 3> m;   // recruitment, per genotype, decreasing
    std::array<RateFunction, 3> mu;  // mortality, per genotype, increasing
    Vec3 v{1.0, 1.0, 1.0};           // recruitment-density weights
    Vec3 w{1.0, 1.0, 1.0};           // mortality-density weights

    RateModel(std::array<RateFunction, 3> m_, std::array<RateFunction, 3> mu_,
              Vec3 v_, Vec3 w_)
        : m(std::move(m_)), mu(std::move(mu_)), v(v_), w(w_) {
        for (int i = 0; i < 3; ++i) {
            if (!(v[i] > 0.0) || !(w[i] > 0.0))
                throw std::invalid_argument("RateModel: weights must be positive");
        }
    }

    bool selectively_neutral() const {
        return m[0] == m[1] && m[1] == m[2] && mu[0] == mu[1] && mu[1] == mu[2];
    }
};

struct ValidationOptions {
    int grid_points = 64;         // geometric density grid
    double grid_lo = 1e-6;
    double grid_hi = 1e6;
    double saturation_probe = 1e6;  // density at which saturation is probed
};

struct ValidationReport {
    bool monotone = false;        // decreasing m, increasing mu, positive weights
    bool ordering = false;        // m1 >= m2 >= m3, mu1 <= mu2 <= mu3 on the grid
    bool strict_gap = false;      // m1 - m3 + mu3 - mu1 > 0 on the grid
    bool selective = false;       // ordering && strict_gap
    bool viable = false;          // m1(0) > mu1(0)
    bool saturating = false;      // m_i < mu_i at the probe density, all i
    std::vector<std::string> failures;

    bool all() const { return monotone && selective && viable && saturating; }
};

inline std::vector<double> geometric_grid(double lo, double hi, int n) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n) + 1);
    g.push_back(0.0);
    const double r = std::pow(hi / lo, 1.0 / (n - 1));
    double z = lo;
    for (int k = 0; k < n; ++k, z *= r) g.push_back(z);
    return g;
}

// Checks Assumptions 0-3 and reports which hold.  Monotonicity is decided
// analytically per family; orderings and the strict gap are sampled on a
// geometric density grid.
inline ValidationReport validate(const RateModel& model,
                                 const ValidationOptions& opt = {}) {
    ValidationReport rep;

    rep.monotone = true;
    for (int i = 0; i < 3; ++i) {
        if (!model.m[i].nonincreasing()) {
            rep.monotone = false;
            rep.failures.push_back("m" + std::to_string(i + 1) + " is not decreasing");
        }
        if (!model.mu[i].nondecreasing()) {
            rep.monotone = false;
            rep.failures.push_back("mu" + std::to_string(i + 1) + " is not increasing");
        }
    }

    const auto grid = geometric_grid(opt.grid_lo, opt.grid_hi, opt.grid_points);
    rep.ordering = true;
    rep.strict_gap = true;
    for (double z : grid) {
        const double m1 = model.m[0](z), m2 = model.m[1](z), m3 = model.m[2](z);
        const double u1 = model.mu[0](z), u2 = model.mu[1](z), u3 = model.mu[2](z);
        if (!(m1 >= m2 && m2 >= m3 && u1 <= u2 && u2 <= u3)) rep.ordering = false;
        if (!(m1 - m3 + u3 - u1 > 0.0)) rep.strict_gap = false;
    }
    if (!rep.ordering) rep.failures.push_back("fitness ordering fails on the grid");
    if (!rep.strict_gap)
        rep.failures.push_back("strict positivity m1-m3+mu3-mu1 fails on the grid");
    rep.selective = rep.ordering && rep.strict_gap;

    rep.viable = model.m[0](0.0) > model.mu[0](0.0);
    if (!rep.viable) rep.failures.push_back("m1(0) <= mu1(0): genotype 1 not viable");

    rep.saturating = true;
    for (int i = 0; i < 3; ++i) {
        if (!(model.m[i](opt.saturation_probe) < model.mu[i](opt.saturation_probe))) {
            rep.saturating = false;
            rep.failures.push_back("saturation fails for genotype " + std::to_string(i + 1));
        }
    }
    return rep;
}

// Unique b >= 0 with b = sum_i v_i m_i(b) x_i.  The gap g(b) = b - sum(...)
// is strictly increasing, g(0) <= 0 and g(B0) >= 0 for B0 = sum v_i m_i(0) x_i,
// so bisection with a Newton polish is globally convergent.
inline double solve_bstar(const RateModel& model, const GenotypeVector& x,
                          double rel_tol = 1e-12) {
    for (int i = 0; i < 3; ++i) {
        if (x[i] < 0.0)
            throw std::invalid_argument("solve_bstar: state must be nonnegative");
    }
    const double b0 = model.v[0] * model.m[0](0.0) * x.AA +
                      model.v[1] * model.m[1](0.0) * x.Aa +
                      model.v[2] * model.m[2](0.0) * x.aa;
    if (b0 < kZeroTotal) return 0.0;

    auto g = [&](double b) {
        return b - (model.v[0] * model.m[0](b) * x.AA +
                    model.v[1] * model.m[1](b) * x.Aa +
                    model.v[2] * model.m[2](b) * x.aa);
    };
    auto gprime = [&](double b) {
        return 1.0 - (model.v[0] * model.m[0].slope(b) * x.AA +
                      model.v[1] * model.m[1].slope(b) * x.Aa +
                      model.v[2] * model.m[2].slope(b) * x.aa);
    };
    const double scale = std::max(1.0, b0);
    const RootResult r = solve_increasing(g, gprime, 0.0, b0, rel_tol * scale,
                                          1e-15 * scale);
    // The bracket tolerance scales with b0, which can far exceed the root
    // when recruitment decays fast; polish until the residual is small
    // relative to the root itself.
    double b = r.root;
    double gb = r.residual;
    for (int k = 0; k < 40 && std::abs(gb) > rel_tol * std::max(1.0, b); ++k) {
        const double d = gprime(b);
        if (!(d > 0.0) || !std::isfinite(d)) break;
        b = std::max(0.0, b - gb / d);
        gb = g(b);
    }
    if (std::abs(gb) > 1e-10 * std::max(1.0, b))
        throw ConvergenceError("solve_bstar: residual above tolerance");
    return b;
}

// Neutral specialisation: b = m(b) s with s = v.x.  Requires all rate
// functions identical.
inline double solve_bstar_neutral(const RateModel& model, double s,
                                  double rel_tol = 1e-12) {
    if (!model.selectively_neutral())
        throw NeutralityError("solve_bstar_neutral: model is not selectively neutral");
    if (s < 0.0) throw std::invalid_argument("solve_bstar_neutral: s must be >= 0");
    const double b0 = model.m[0](0.0) * s;
    if (b0 < kZeroTotal) return 0.0;
    auto g = [&](double b) { return b - model.m[0](b) * s; };
    auto gprime = [&](double b) { return 1.0 - model.m[0].slope(b) * s; };
    const double scale = std::max(1.0, b0);
    const RootResult r =
        solve_increasing(g, gprime, 0.0, b0, rel_tol * scale, 1e-15 * scale);
    return r.root;
}

}  // namespace mendel
