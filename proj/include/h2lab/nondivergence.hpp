#pragma once
/*
 * Length functions along the horocycle flow, (C, alpha)-good checks, sparse
 * covers for pairs of lattices and for surfaces, sublevel statistics of
 * a_t u_r orbits, and the interval gadgets used to build large intervals.
 *
 * For a vector v = (x0, y0) the horocycle u_t (x, y) = (x + t y, y) gives the
 * sup-norm length function
 *   l_v(t) = max(|x0 + t y0|, |y0|) = max(c, c |t - t0|),  c = |y0|, t0 = -x0/y0,
 * or the constant |x0| when y0 = 0.  Exact objects use QuadNum so that
 * lattices over a real quadratic field are handled without rounding.
 */
#include "h2lab/surface.hpp"

#include <optional>
#include <string>
#include <vector>

namespace h2lab {

// ------------------------------------------------------------- intervals

template <class T>
struct Interval {
    T lo{}, hi{};
    T length() const { return hi - lo; }
    T midpoint() const { return (lo + hi) / T(2); }
    bool contains(const T& t) const { return lo <= t && t <= hi; }
    bool meets(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
    /// r I = [a - r b, a + r b] for I = [a - b, a + b].
    Interval scaled(const T& r) const {
        T a = midpoint(), b = length() / T(2);
        return {a - r * b, a + r * b};
    }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    friend bool operator==(const Interval& p, const Interval& q) { return p.lo == q.lo && p.hi == q.hi; }
};

/// Sorted pairwise-disjoint intervals.  Sublevel sets {f < eps} are open; the
/// set stores their closures, which have the same measure.
template <class T>
struct IntervalSet {
    std::vector<Interval<T>> parts;

    /// Adds an interval, merging with any part it meets.
    void add(const Interval<T>& iv) {
        if (iv.hi < iv.lo) return;
        std::vector<Interval<T>> out;
        Interval<T> cur = iv;
        bool placed = false;
        for (const auto& p : parts) {
            if (p.hi < cur.lo) {
                out.push_back(p);
            } else if (cur.hi < p.lo) {
                if (!placed) { out.push_back(cur); placed = true; }
                out.push_back(p);
            } else {
                if (p.lo < cur.lo) cur.lo = p.lo;
                if (cur.hi < p.hi) cur.hi = p.hi;
            }
        }
        if (!placed) out.push_back(cur);
        parts = std::move(out);
    }
    void add(const IntervalSet& s) {
        for (const auto& p : s.parts) add(p);
    }
    T measure() const {
        T m(0);
        for (const auto& p : parts) m += p.length();
        return m;
    }
    bool empty() const { return parts.empty(); }
    bool contains(const T& t) const {
        for (const auto& p : parts)
            if (p.contains(t)) return true;
        return false;
    }
    /// Closure of I minus this set, as closed pieces.
    IntervalSet complement_in(const Interval<T>& I) const {
        IntervalSet out;
        T cur = I.lo;
        for (const auto& p : parts) {
            if (p.hi < I.lo || I.hi < p.lo) continue;
            if (cur < p.lo) out.parts.push_back({cur, p.lo});
            if (cur < p.hi) cur = p.hi;
        }
        if (cur < I.hi) out.parts.push_back({cur, I.hi});
        return out;
    }
};

using ExactInterval = Interval<QuadNum>;
using ExactIntervalSet = IntervalSet<QuadNum>;

// ------------------------------------------------------- length functions

enum class LengthKind { Vee, Constant };

template <class T>
struct LengthFn {
    LengthKind kind = LengthKind::Constant;
    T c{};   ///< positive
    T t0{};  ///< vee only

    T value(const T& t) const {
        if (kind == LengthKind::Constant) return c;
        T d = t - t0;
        if (scalar::sign(d) < 0) d = -d;
        T v = c * d;
        return v < c ? c : v;
    }
    /// ||f||_I = sup over I (attained at an endpoint).
    T sup_on(const Interval<T>& I) const {
        T a = value(I.lo), b = value(I.hi);
        return a < b ? b : a;
    }
};

using ExactLengthFn = LengthFn<QuadNum>;

/// Length function of v under the horocycle flow.  Throws DomainError for v = 0.
template <class T> LengthFn<T> length_fn_of_vector(const Vec2<T>& v);

/// {t in I : f(t) < eps} (as the closure of one interval, or empty).
/// Throws DomainError unless eps > 0.
template <class T> IntervalSet<T> sublevel_set(const LengthFn<T>& f, const Interval<T>& I, const T& eps);

struct GoodCheck {
    bool holds = false;
    QuadNum lhs;  ///< |I_f(eps)| / |I|
    QuadNum rhs;  ///< C (eps / ||f||_I)^alpha
};

/// The (C, alpha)-good inequality |I_f(eps)|/|I| <= C (eps/||f||_I)^alpha,
/// both sides exact.  alpha is a positive integer.  Throws for |I| <= 0.
GoodCheck verify_good(const ExactLengthFn& f, const ExactInterval& I, const QuadNum& eps,
                      const QuadNum& C = QuadNum(2), int alpha = 1);

// ----------------------------------------------------- sparse cover for X

struct FamilyMember {
    ExactLengthFn f;
    int lattice = 0;           ///< 1 or 2
    Vec2<QuadNum> vector;      ///< primitive, sign normalized (y > 0, or y = 0 and x > 0)
};

struct GoodFamily {
    std::vector<FamilyMember> members;

    /// #{f : f(t) < threshold}.
    int count_below(const QuadNum& t, const QuadNum& threshold) const;
    /// I_F(theta) = union of the members' sublevel sets.
    ExactIntervalSet sublevel(const ExactInterval& I, const QuadNum& theta) const;
};

/// Primitive vectors of L (one of each +-pair) in the open box |x| < X, |y| < Y.
std::vector<Vec2<QuadNum>> primitive_vectors_in_box(const LatticeBasis<QuadNum>& L, const QuadNum& X,
                                                    const QuadNum& Y);

/// F''(L1, L2): per lattice, the length functions of all primitive vectors
/// (+-v identified) that drop below 1 somewhere on I.  Throws DomainError
/// unless 0 < eta < 1 and |I| > 0.  eta only enters the audit.
GoodFamily sparse_cover_X(const LatticePair<QuadNum>& pair, const ExactInterval& I, const QuadNum& eta);

struct CoverXAudit {
    int max_multiplicity = 0;          ///< max over t in I of #{f : f(t) < 1}, exact
    QuadNum worst_point;               ///< a point attaining it
    int per_lattice_max[2] = {0, 0};   ///< the same count restricted to each lattice
    bool multiplicity_ok = false;      ///< max_multiplicity <= 2
    int coverage_violations = 0;       ///< oracle vectors entering V_0(eta) outside I_F(eta)
    bool coverage_ok = false;
    QuadNum v0_cover_measure;          ///< |I_F(eta)|
    std::size_t oracle_vectors = 0;
};

/// Exact audit.  Multiplicity: the count only changes where some member
/// equals 1, so it is evaluated at every such breakpoint and between
/// consecutive ones.  Coverage: an independent enumeration of all lattice
/// vectors of Euclidean length < eta somewhere along u_I (from the input
/// basis, without reduction) must keep |u_r v| >= eta on every closed piece
/// of I outside I_F(eta).
CoverXAudit audit_sparse_cover_X(const LatticePair<QuadNum>& pair, const ExactInterval& I, const QuadNum& eta,
                                 const GoodFamily& family);

// ----------------------------------------------- flow sublevel statistics

struct FlowMeasure {
    double measure = 0;          ///< |{r in I : l(a_t u_r pair) < eps^2}|
    bool exact = true;           ///< false when the grid fallback was used
    double grid_error = 0;       ///< fallback only: one cell per observed boundary crossing
    std::size_t vectors = 0;     ///< primitive vectors whose sublevel interval was used
};

/// l is the Euclidean systole (min over both factors).  Each primitive
/// vector v gives the interval {r : |a_t u_r v| < eps^2}; the measure of
/// their union is computed in closed form.  If the candidate box holds more
/// than max_vectors coefficient pairs, falls back to a midpoint grid of step
/// 1e-4 |I|.  Throws DomainError unless t >= 0, 0 < eps < 1 and |I| > 0.
FlowMeasure flow_sublevel_measure(const Pair& pair, double t, double eps, const Interval<double>& I,
                                  std::size_t max_vectors = 2'000'000);

// --------------------------------------------------------- interval gadgets

struct GadgetParams {
    QuadNum A, B, D, E;
};

struct GadgetResult {
    ExactInterval J_prime;
    bool mirrored = false;  ///< built on the left of J
};

/// Large interval J' with 2J' ⊇ 2J, |J'| >= (E/2)(|I| + |J|), J' ⊂ I' \ I,
/// built as [a + |J| + 2B, a + B + DA/2] for J = [a, a + |J|] (or its mirror
/// on the left of J when that does not fit in I').  Throws DomainError
/// naming the first failed hypothesis; the conclusions are re-checked
/// exactly and a failure there throws std::logic_error.
GadgetResult interval_gadget_1(const GadgetParams& p, const ExactInterval& I, const ExactInterval& I_prime,
                               const ExactInterval& J);

/// J' = [a + |J|, a + |J| + E|J|] when the right endpoint a + |J| of J lies
/// outside I (mirrored [a - E|J|, a] when only the left one does), so that
/// 2J' ⊇ 2J, |J'| = E|J| and J' ⊂ I' \ I.  Hypotheses: A, B, D, E >= 10,
/// A <= B, D >= 6BE/A, I and I' concentric, 2D|I| <= |I'|, |J| <= B,
/// A <= |I|, J meets I, an endpoint of J outside I.
GadgetResult interval_gadget_2(const GadgetParams& p, const ExactInterval& I, const ExactInterval& I_prime,
                               const ExactInterval& J);
/// The bare construction of interval_gadget_2 (no hypotheses checked).
ExactInterval gadget_2_construction(const ExactInterval& J, const QuadNum& E, bool mirrored);

// --------------------------------------------------- sparse cover (surface)

struct SurfaceCoverOptions {
    int R = 9;                   ///< disjointness bound used in the thresholds (9 edges triangulate H(2))
    int grid_points = 2001;
    TraceOptions trace;
};

struct CoverConnection {
    Vec2d holonomy;                        ///< sign normalized
    LengthFn<double> f;
    std::array<std::int64_t, 4> basis_coeffs{};
};

struct SurfaceCoverReport {
    double C = 0;
    int R = 0;
    std::vector<double> thresholds;          ///< L_1, ..., L_{R+1} with L_k = C^{(R-k)/(R-1)} C
    std::vector<CoverConnection> connections;  ///< every connection below C somewhere on I
    std::vector<std::vector<int>> families;  ///< F_0(k) for k = 1..R, indices into connections
    double Lmax = 0, Lmax_needed = 0;        ///< completeness requires Lmax >= Lmax_needed
    bool complete = false;                   ///< false: every clause below is conditional on Lmax
    int grid_points = 0;
    int v_points = 0;                        ///< grid points in V(C^2)
    int uncovered_points = 0;                ///< grid points of V(C^2) outside every I_{F_0(k)}(L_k)
    int unclaimed_points = 0;                ///< points of V_k in no H_k(delta)
    int top_level_points = 0;                ///< points with r(t) = R (impossible for small C)
    int max_multiplicity = 0;                ///< max over grid and k of #{f in F_0(k): f <= (sqrt2/9) L_{k+1}}
    int observed_disjoint = 0;               ///< R-hat: largest pairwise disjoint set among the connections
    bool covered() const { return uncovered_points == 0; }
    bool multiplicity_within_observed() const { return max_multiplicity <= observed_disjoint; }
    std::vector<std::string> notes;
};

/// Builds F_0(k) by the dip/neighbour rules on a grid over I: with
/// alpha_k(t) the least max-length of k pairwise disjoint connections,
/// r(t) = max{k : alpha_k(t) < L_k} on V(C^2) = {alpha_1 < C^2},
/// H_k(delta) = {l_delta < L_k and l_delta' >= (sqrt2/3) L_{k+1} for every
/// delta' != delta meeting delta}, and F_0(k) = {delta : V_k ∩ H_k(delta) ≠ ∅}.
/// Connections are enumerated up to min(Lmax, Lmax_needed).  Throws
/// DomainError unless 0 < C < 1, R >= 2 and |I| > 0.
SurfaceCoverReport sparse_cover_surface(const Surface& s, const Interval<double>& I, double C, double Lmax,
                                        const SurfaceCoverOptions& opt = {});

/// JSON report with the thresholds, the audit counts and every family
/// member's holonomy and homology class.
std::string surface_cover_json(const SurfaceCoverReport& r);

}  // namespace h2lab
