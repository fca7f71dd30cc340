// genetics.hpp — Mendelian heredity operator for a two-allele autosomal locus.
//
// State x = (x1, x2, x3) counts the AA, Aa and aa genotypes.  Random mating
// gives the offspring repartition
//
//   alpha = ( (uA.x)^2, 2 (uA.x)(ua.x), (ua.x)^2 ) / (1.x)
//
// with the allele projectors uA = (1, 1/2, 0), ua = (0, 1/2, 1).  The same
// quantities can be written as quadratic forms x' G_i x / (1.x) with the
// inheritance matrices G_i; both routes are exposed so they can be checked
// against each other.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "mendel/errors.hpp"

namespace mendel {

using Vec3 = std::array<double, 3>;
using Matrix3 = std::array<std::array<double, 3>, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Totals smaller than this are treated as an empty population.
inline constexpr double kZeroTotal = 1e-300;

struct GenotypeVector {
    double AA = 0.0;  // x1, homozygous AA
    double Aa = 0.0;  // x2, heterozygous
    double aa = 0.0;  // x3, homozygous aa

    GenotypeVector() = default;
    GenotypeVector(double x1, double x2, double x3) : AA(x1), Aa(x2), aa(x3) {}
    explicit GenotypeVector(const Vec3& v) : AA(v[0]), Aa(v[1]), aa(v[2]) {}

    double total() const { return AA + Aa + aa; }

    double operator[](std::size_t i) const {
        return i == 0 ? AA : (i == 1 ? Aa : aa);
    }
    double& operator[](std::size_t i) {
        return i == 0 ? AA : (i == 1 ? Aa : aa);
    }

    Vec3 to_array() const { return {AA, Aa, aa}; }

    bool finite() const {
        return std::isfinite(AA) && std::isfinite(Aa) && std::isfinite(aa);
    }
};

enum class Allele { A, a };

enum class StateClass {
    Zero,          // x = 0
    MonomorphicA,  // x = c e1, c > 0
    Monomorphica,  // x = c e3, c > 0
    Polymorphic,   // both alleles present (or mixed boundary), some genotype absent
    Holomorphic,   // all three genotypes present
};

inline Vec3 allele_projector(Allele j) {
    return j == Allele::A ? Vec3{1.0, 0.5, 0.0} : Vec3{0.0, 0.5, 1.0};
}

// u_j . x : number of copies of allele j, divided by ploidy.
inline double allele_count(const GenotypeVector& x, Allele j) {
    return j == Allele::A ? x.AA + 0.5 * x.Aa : x.aa + 0.5 * x.Aa;
}

inline double allele_frequency(const GenotypeVector& x, Allele j) {
    const double total = x.total();
    if (total < kZeroTotal)
        throw ZeroPopulationError("allele_frequency: empty population");
    return allele_count(x, j) / total;
}

// Offspring repartition of a mating pool x (heredity operator A).
inline GenotypeVector mendel_offspring(const GenotypeVector& x) {
    const double total = x.total();
    if (total < kZeroTotal)
        throw ZeroPopulationError("mendel_offspring: empty population");
    const double cA = allele_count(x, Allele::A);
    const double ca = allele_count(x, Allele::a);
    return {cA * cA / total, 2.0 * cA * ca / total, ca * ca / total};
}

inline Matrix3 inheritance_matrix(int i) {
    switch (i) {
        case 1:
            return {{{1.0, 0.5, 0.0}, {0.5, 0.25, 0.0}, {0.0, 0.0, 0.0}}};
        case 2:
            return {{{0.0, 0.5, 1.0}, {0.5, 0.5, 0.5}, {1.0, 0.5, 0.0}}};
        case 3:
            return {{{0.0, 0.0, 0.0}, {0.0, 0.25, 0.5}, {0.0, 0.5, 1.0}}};
        default:
            throw std::invalid_argument("inheritance_matrix: i must be 1, 2 or 3");
    }
}

// Offspring share of genotype i via the quadratic form x' G_i x / (1.x).
// Algebraically identical to mendel_offspring; kept as an independent route.
inline double offspring_share_quadratic(const GenotypeVector& x, int i) {
    const double total = x.total();
    if (total < kZeroTotal)
        throw ZeroPopulationError("offspring_share_quadratic: empty population");
    const Matrix3 g = inheritance_matrix(i);
    const Vec3 v = x.to_array();
    double q = 0.0;
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) q += v[r] * g[r][c] * v[c];
    return q / total;
}

// Components below `tol` count as absent.  Default exact comparison: the
// integrator clamps roundoff negatives to zero.
inline StateClass classify_state(const GenotypeVector& x, double tol = 0.0) {
    const bool has1 = x.AA > tol;
    const bool has2 = x.Aa > tol;
    const bool has3 = x.aa > tol;
    if (!has1 && !has2 && !has3) return StateClass::Zero;
    if (has1 && has2 && has3) return StateClass::Holomorphic;
    if (has1 && !has2 && !has3) return StateClass::MonomorphicA;
    if (!has1 && !has2 && has3) return StateClass::Monomorphica;
    return StateClass::Polymorphic;
}

}  // namespace mendel
