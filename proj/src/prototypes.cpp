#include "h2lab/prototypes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace h2lab {

namespace {

BigInt big(long long x) { return BigInt(static_cast<long>(x)); }

QuadNum half_plus_sqrt(long long e, long long D) { return QuadNum(Rational(e, 2), Rational(1, 2), D); }

long long gcd4(long long a, long long b, long long c, long long d) {
    return std::gcd(std::gcd(a, b), std::gcd(c, d));
}

std::vector<long long> divisors(long long n) {
    std::vector<long long> out;
    for (long long d = 1; d * d <= n; ++d)
        if (n % d == 0) {
            out.push_back(d);
            if (d * d != n) out.push_back(n / d);
        }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

QuadNum EigenformPrototype::lambda() const { return half_plus_sqrt(e, D()); }
QuadNum SplitPrototype::lambda() const { return half_plus_sqrt(e, D()); }

bool SplitPrototype::is_valid() const {
    if (b <= 0 || c <= 0 || D() <= 0) return false;
    if (a < 0 || a >= std::gcd(b, c)) return false;
    if (!(c + e < b)) return false;
    return gcd4(a, b, c, e) == 1;
}

void check_discriminant(long long D) {
    if (D <= 0) throw DomainError("discriminant must be positive");
    if (D % 4 != 0 && D % 4 != 1) throw DomainError("discriminant must be 0 or 1 mod 4");
}

std::vector<EigenformPrototype> enumerate_eigenform_prototypes(long long D) {
    check_discriminant(D);
    std::vector<EigenformPrototype> out;
    for (long long r = isqrt(big(D)).get_si(), e = -r; e <= r; ++e) {
        if (e * e >= D || (D - e * e) % 4 != 0) continue;
        long long N = (D - e * e) / 4;  // = l^2 m
        for (long long l = 1; l * l <= N; ++l)
            if (N % (l * l) == 0 && std::gcd(e, l) == 1) out.push_back({e, l, N / (l * l)});
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SplitPrototype> enumerate_split_prototypes(long long D) {
    check_discriminant(D);
    std::vector<SplitPrototype> out;
    for (long long r = isqrt(big(D)).get_si(), e = -r; e <= r; ++e) {
        if (e * e >= D || (D - e * e) % 4 != 0) continue;
        long long N = (D - e * e) / 4;  // = b c
        for (long long b : divisors(N)) {
            long long c = N / b;
            for (long long a = 0; a < std::gcd(b, c); ++a) {
                SplitPrototype p{a, b, c, e};
                if (p.is_valid()) out.push_back(p);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

LatticePair<QuadNum> prototypical_pair(const EigenformPrototype& p) {
    if (p.ell <= 0 || p.m <= 0 || std::gcd(p.e, p.ell) != 1)
        throw DomainError("invalid eigenform prototype");
    QuadNum lm(p.ell * p.m), l(p.ell), lam = p.lambda(), z(0);
    return {LatticeBasis<QuadNum>(Mat2<QuadNum>{lm, z, z, l}), LatticeBasis<QuadNum>(Mat2<QuadNum>{lam, z, z, lam})};
}

SplittingTriple<QuadNum> prototypical_splitting(const SplitPrototype& p) {
    if (!p.is_valid()) throw DomainError("invalid split prototype");
    QuadNum lam = p.lambda(), z(0);
    SplittingTriple<QuadNum> t{LatticeBasis<QuadNum>(Mat2<QuadNum>{QuadNum(p.b), QuadNum(p.a), z, QuadNum(p.c)}),
                               LatticeBasis<QuadNum>(Mat2<QuadNum>{lam, z, z, lam}),
                               {lam, z},
                               PrimitiveIn::Second};
    ValidationReport rep = validate_splitting(t);
    if (!rep.valid || rep.primitive_in != PrimitiveIn::Second)
        throw DomainError("prototypical splitting failed validation: " + rep.reason);
    return t;
}

SplittingTriple<QuadNum> lshape_splitting(long long D) {
    if (D <= 4) throw DomainError("L-shape discriminant must exceed 4");
    if (!is_perfect_square(big(D))) throw DomainError("L-shape discriminant must be a square");
    long long d = isqrt(big(D)).get_si();
    if (d % 2 != 0) throw DomainError("L-shape discriminant must be an even square");
    QuadNum h(d / 2), one(1), z(0);
    SplittingTriple<QuadNum> t{LatticeBasis<QuadNum>(Mat2<QuadNum>{h, z, z, one}),
                               LatticeBasis<QuadNum>(Mat2<QuadNum>{one, z, z, h}),
                               {one, z},
                               PrimitiveIn::Second};
    if (!validate_splitting(t).valid) throw DomainError("L-shape splitting failed validation");
    return t;
}

std::vector<long long> prime_divisors(long long n) {
    if (n < 1) throw DomainError("prime_divisors requires n >= 1");
    std::vector<long long> out;
    for (long long p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    if (n > 1) out.push_back(n);
    return out;
}

long long gamma0_index(long long n) {
    long long idx = n;
    for (long long p : prime_divisors(n)) idx = idx / p * (p + 1);
    return idx;
}

Rational veech_index(long long d) {
    if (d <= 2) throw DomainError("veech_index requires d >= 3 (the formula degenerates at d = 2)");
    Rational v = Rational(3, 8) * Rational(d - 2) * Rational(d) * Rational(d);
    for (long long p : prime_divisors(d)) v = v * (Rational(1) - Rational(1, p * p));
    return v;
}

RatioApproximation approx_ratio_prototype(double lambda_target, long long b) {
    if (!(lambda_target > 0)) throw DomainError("target ratio must be positive");
    if (b < 1) throw DomainError("b must be positive");
    long long e = static_cast<long long>(std::floor((lambda_target - 1) / std::sqrt(lambda_target) * std::sqrt(double(b))));
    SplitPrototype p{0, b, 1, e};
    if (!(p.c + p.e < p.b)) {
        std::ostringstream os;
        os << "c + e < b fails for b = " << b << " (e = " << e << "); use a larger b";
        throw DomainError(os.str());
    }
    if (!p.is_valid()) throw DomainError("approximating prototype is invalid");
    RatioApproximation r;
    r.prototype = p;
    r.D = p.D();
    double s = std::sqrt(double(r.D));
    r.displayed_ratio = (s + e) / (s - e);
    QuadNum sq = QuadNum::sqrt_of(r.D);
    r.area_ratio = (sq - QuadNum(e)) / (sq + QuadNum(e));
    r.deviation = std::fabs(r.displayed_ratio - lambda_target);
    return r;
}

AreaAdjustment rational_area_adjust(long long k, double eta0) {
    if (k < 1) throw DomainError("k must be positive");
    if (!(eta0 > 0 && eta0 < 1)) throw DomainError("eta0 must lie in (0, 1)");
    double rk = std::sqrt(double(k));
    // Exact lower side: p^2 k >= q^2; upper side 1 + eta0 is a float bound.
    for (long long q = 1;; ++q) {
        long long p = isqrt(big(q) * big(q) / big(k)).get_si();
        while (big(p) * big(p) * big(k) < big(q) * big(q)) ++p;
        double eps = p * rk / q - 1;
        if (eps < eta0) return {p, q, std::max(0.0, eps)};
        if (q > 1'000'000'000) throw DomainError("rational_area_adjust: search failed");
    }
}

DiscriminantReport discriminant_constraints(long long p, long long q, long long k, long long m) {
    if (p < 1 || q < 1 || k < 1 || m < 1) throw DomainError("discriminant_constraints requires positive inputs");
    if (squarefree_part(k).second != 1) throw DomainError("k must be square-free");
    DiscriminantReport r;
    BigInt P = big(p), Q = big(q), K = big(k), M = big(m);
    BigInt diff = Q * Q - P * P * K;
    std::ostringstream os;
    if (diff == 0) {
        r.unit_ratio = true;
        r.k_divides_m = (m % k == 0);
        DiscriminantCandidate c{0, 1, 4 * m, true, is_perfect_square(big(4 * m))};
        r.candidates.push_back(c);
        r.max_D = c.D;
        os << "e=0, l=1, D=4m=" << c.D;
        r.summary = os.str();
        return r;
    }
    r.k_divides_m = (m % k == 0);
    int sign = diff > 0 ? 1 : -1;  // ratio < 1 forces e > 0
    BigInt target = M * diff * diff;
    BigInt qp = Q * P;
    if (!qp.fits_slong_p()) throw DomainError("p q too large");
    std::vector<long long> ells = divisors(qp.get_si());
    if (r.k_divides_m) {
        for (long long e = 1; big(e) * big(e) <= target; ++e) {
            if (target % (big(e) * big(e)) != 0) continue;
            for (long long l : ells) {
                if (std::gcd(e, l) != 1) continue;
                DiscriminantCandidate c;
                c.e = sign * e;
                c.ell = l;
                c.D = e * e + 4 * l * l * m;
                c.equation_holds = big(l) * big(l) * M * diff * diff == big(e) * big(e) * Q * Q * P * P * K;
                c.D_is_square = is_perfect_square(big(c.D));
                r.max_D = std::max(r.max_D, c.D);
                r.candidates.push_back(c);
            }
        }
    }
    os << (r.k_divides_m ? "k | m" : "k does not divide m: no square-D solutions") << "; " << r.candidates.size()
       << " candidate (e, l)";
    r.summary = os.str();
    return r;
}

}  // namespace h2lab
