#pragma once
/*
 * Arithmetic criterion for Teichmueller curves in H(2).
 *
 * Input is a pair of lattices over a common Q(sqrt k0) presented as
 *   L1 = Z r v* + Z v,   L2 = Z v* + Z w,
 * with v* primitive in L2 and r v* primitive in L1.  A closed diagonal
 * orbit forces the relations
 *   t w = m r v* + n v,   s v = i v* + j w          (i, j, m, n integers)
 * and the area identities  s A1/A2 = j r,  n A1/A2 = r t  (equivalently
 * s' = j r', n = r' t' with r = h r', t = h t', s = s'/h, h^2 = A1/A2).
 * k is the square-free part of r'^2.  If r is rational the pair and its
 * factor mix  T1 = Z(r v* + w) + Z v,  T2 = Z(v* + v) + Z w  are both
 * isogenous, which certifies a Teichmueller curve.  The check is one-sided:
 * failure yields "undetermined", never a negative claim.
 */
#include "h2lab/prototypes.hpp"

#include <optional>
#include <string>

namespace h2lab {

using QMat = Mat2<QuadNum>;
using RMat = Mat2<Rational>;

/// Default bound on the numerators and denominators searched.
inline constexpr long long kDefaultSearchBound = 1'000'000;

/// Smallest positive rational tau (numerator and denominator <= bound) with
/// tau L1 contained in L2, or nothing.  Throws DomainError on mixed fields.
std::optional<Rational> isogeny_scalar(const LatticeBasis<QuadNum>& L1, const LatticeBasis<QuadNum>& L2,
                                       long long bound = kDefaultSearchBound);

/// Smallest positive rational tau with tau * x integral for every entry
/// (entries must be rational; zero entries impose nothing).
Rational clearing_scalar(const RMat& m);

struct Presentation {
    Vec2<QuadNum> v_star, v, w;
    QuadNum r;  ///< r v* is primitive in L1
    LatticeBasis<QuadNum> lambda1;  ///< columns (r v*, v)
    LatticeBasis<QuadNum> lambda2;  ///< columns (v*, w)
};

/// Builds the presentation from a pair and a primitive vector v* of L2.
/// Throws DomainError if v* is not primitive in L2.  Returns nothing if no
/// multiple of v* lies in L1 (the direction of v* is irrational for L1).
std::optional<Presentation> present(const LatticePair<QuadNum>& pair, const Vec2<QuadNum>& v_star);
/// Same with v* = first generator of L2.
std::optional<Presentation> present(const LatticePair<QuadNum>& pair);

struct RelationData {
    Presentation pres;
    QuadNum r, s, t;
    long long i = 0, j = 0, m = 0, n = 0;
    long long k = 1;           ///< square-free part of r'^2
    QuadNum area_ratio;              ///< h^2 = A1 / A2
    Rational r_prime_sq, s_prime_sq, t_prime_sq;
};

struct RelationResult {
    bool solved = false;
    std::string reason;  ///< why the relations could not be solved
    RelationData data;
};

RelationResult solve_relations(const Presentation& pres, long long search_bound = kDefaultSearchBound);
RelationResult solve_relations(const LatticePair<QuadNum>& pair, long long search_bound = kDefaultSearchBound);

struct RelationResiduals {
    Vec2<QuadNum> tw, sv;  ///< t w - (m r v* + n v),  s v - (i v* + j w)
    QuadNum s_area, n_area;  ///< s A1/A2 - j r,  n A1/A2 - r t
    bool all_zero() const;
};
RelationResiduals relation_residuals(const RelationData& rel);

/// T1 = Z(r v* + w) + Z v,  T2 = Z(v* + v) + Z w.  Throws DomainError when w
/// lies in Z(v* + v) (T2 degenerates) or a certificate denominator vanishes.
LatticePair<QuadNum> mixed_splitting(const RelationData& rel);

/// M1 with tau (r v*, v) = (v*, w) tau M1:  [[r, i/s], [0, j/s]].
QMat isogeny_matrix(const RelationData& rel);
/// M2 with (r v* + w, v) = (v* + v, w) M2:
///   [[r s/(s+i), m r/(m r - n)], [1 - r j/(s+i), t/(n - m r)]].
QMat mixed_isogeny_matrix(const RelationData& rel);

enum class Verdict { Curve, Undetermined };

struct Certificate {
    Rational tau;
    RMat matrix;     ///< tau * M, integral
    LatticePair<QuadNum> bases;  ///< (source, target) bases the matrix relates
};

struct CriterionResult {
    Verdict verdict = Verdict::Undetermined;
    std::string reason;
    long long k = 0;
    long long p = 0, q = 0;  ///< sqrt(A1/A2) = (p/q) sqrt k for the certified pair
    double epsilon = 0;      ///< area deformation used (0 if none)
    LatticePair<QuadNum> certified_pair;  ///< the pair the verdict refers to (after deformation)
    std::optional<RelationData> relations;
    std::optional<Certificate> first, second;  ///< the two isogenous algebraic sums
    std::string d_bound_branch;  ///< "D=4m" (unit ratio) or "square"
};

/// Runs the criterion.  If r is irrational, the areas are equal and
/// eta0 > 0, the ratio A1/A2 is deformed to (1 + eps)^2 with
/// (1 + eps) = (p/q) sqrt k and 0 <= eps < eta0; the deformed pair is
/// represented (up to a common scalar) as ((1 + eps) L1, L2).
CriterionResult teichmuller_criterion(const LatticePair<QuadNum>& pair, double eta0 = 0.0,
                                      long long search_bound = kDefaultSearchBound);

/// Serialized verdict: {verdict, k, p, q, epsilon, tau1, tau2, D_bound_branch, reason}.
std::string criterion_json(const CriterionResult& r);

/// The L-shaped presentation for even d >= 4: L1 = Z(d/2, 0) + Z(0, 1),
/// L2 = Z(1, 0) + Z(0, d/2).
LatticePair<QuadNum> lshape_pair(long long d);

}  // namespace h2lab
