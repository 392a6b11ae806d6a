#pragma once
/*
 * Prototypes of eigenform splittings in genus 2, the L-shaped family, index
 * formulas and the small number-theoretic searches used by the arithmetic
 * criterion.
 *
 * Eigenform prototype (e, l, m):  D = e^2 + 4 l^2 m,  l, m > 0,  gcd(e, l) = 1,
 *   lambda = (e + sqrt D) / 2,  L1 = Z(l m, 0) + Z(0, l),  L2 = lambda Z^2.
 * Split prototype (a, b, c, e):  D = e^2 + 4 b c,  0 <= a < gcd(b, c),
 *   c + e < b,  gcd(a, b, c, e) = 1,  L1 = Z(b, 0) + Z(a, c),  L2 = lambda Z^2,
 *   slit v = (lambda, 0), primitive in L2.
 */
#include "h2lab/splitting.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace h2lab {

struct EigenformPrototype {
    long long e = 0, ell = 1, m = 1;
    long long D() const { return e * e + 4 * ell * ell * m; }
    QuadNum lambda() const;
    friend auto operator<=>(const EigenformPrototype&, const EigenformPrototype&) = default;
};

struct SplitPrototype {
    long long a = 0, b = 1, c = 1, e = 0;
    long long D() const { return e * e + 4 * b * c; }
    QuadNum lambda() const;
    bool is_valid() const;  ///< every defining inequality and gcd condition
    friend auto operator<=>(const SplitPrototype&, const SplitPrototype&) = default;
};

/// Throws DomainError unless D > 0 and D = 0, 1 mod 4.
void check_discriminant(long long D);

/// All eigenform prototypes of discriminant D, sorted lexicographically.
std::vector<EigenformPrototype> enumerate_eigenform_prototypes(long long D);
/// All split prototypes of discriminant D, sorted lexicographically.
std::vector<SplitPrototype> enumerate_split_prototypes(long long D);

LatticePair<QuadNum> prototypical_pair(const EigenformPrototype& p);
SplittingTriple<QuadNum> prototypical_splitting(const SplitPrototype& p);

/// D = d^2 with d even and D > 4:  L1 = Z(d/2, 0) + Z(0, 1),  L2 = Z(1, 0) + Z(0, d/2),  v = (1, 0).
SplittingTriple<QuadNum> lshape_splitting(long long D);

std::vector<long long> prime_divisors(long long n);
/// [SL2(Z) : Gamma0(n)] = n prod_{p | n} (1 + 1/p).
long long gamma0_index(long long n);
/// (3/8) (d - 2) d^2 prod_{p | d} (1 - 1/p^2); requires d >= 3.
Rational veech_index(long long d);

struct RatioApproximation {
    SplitPrototype prototype;   ///< (0, b, 1, e)
    long long D = 0;
    double displayed_ratio = 0;  ///< (sqrt D + e) / (sqrt D - e)
    QuadNum area_ratio;          ///< Area(L1) / Area(L2) of the prototypical splitting = (sqrt D - e) / (sqrt D + e)
    double deviation = 0;        ///< |displayed_ratio - target|
};

/// e = floor((lambda - 1) lambda^{-1/2} b^{1/2}); throws if c + e < b fails.
RatioApproximation approx_ratio_prototype(double lambda_target, long long b);

struct AreaAdjustment {
    long long p = 1, q = 1;
    double epsilon = 0;  ///< p sqrt(k) / q - 1, in [0, eta0)
};

/// Smallest q (then smallest p) with 1 <= p sqrt(k) / q < 1 + eta0.
AreaAdjustment rational_area_adjust(long long k, double eta0);

struct DiscriminantCandidate {
    long long e = 0, ell = 1;
    long long D = 0;           ///< e^2 + 4 l^2 m
    bool equation_holds = false;  ///< l^2 m (q^2 - p^2 k)^2 = e^2 q^2 p^2 k
    bool D_is_square = false;
};

struct DiscriminantReport {
    bool unit_ratio = false;  ///< p sqrt(k) / q = 1: then e = 0, l = 1, D = 4m
    bool k_divides_m = false;
    std::vector<DiscriminantCandidate> candidates;  ///< (e, l) passing l | qp, e^2 | m (q^2 - p^2 k)^2, gcd(e, l) = 1
    long long max_D = 0;                            ///< bound on D over the candidates
    std::string summary;
};

DiscriminantReport discriminant_constraints(long long p, long long q, long long k, long long m);

}  // namespace h2lab
