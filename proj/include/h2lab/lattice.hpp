#pragma once
/*
 * Two-dimensional lattices and the linear action on them.
 *
 * Vectors, matrices and bases are templated over the scalar type; the
 * library instantiates them with double (flows, statistics) and QuadNum
 * (exact constructions).  Matrices act on column vectors; a LatticeBasis
 * stores its generators as the columns of a Mat2.
 */
#include "h2lab/exactnum.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace h2lab {

template <class T>
struct Vec2 {
    T x{}, y{};

    friend Vec2 operator+(const Vec2& p, const Vec2& q) { return {p.x + q.x, p.y + q.y}; }
    friend Vec2 operator-(const Vec2& p, const Vec2& q) { return {p.x - q.x, p.y - q.y}; }
    friend Vec2 operator-(const Vec2& p) { return {-p.x, -p.y}; }
    friend Vec2 operator*(const T& s, const Vec2& p) { return {s * p.x, s * p.y}; }
    friend bool operator==(const Vec2& p, const Vec2& q) { return p.x == q.x && p.y == q.y; }
    Vec2& operator+=(const Vec2& q) { x += q.x; y += q.y; return *this; }
    Vec2& operator-=(const Vec2& q) { x -= q.x; y -= q.y; return *this; }
};

template <class T> T dot(const Vec2<T>& p, const Vec2<T>& q) { return p.x * q.x + p.y * q.y; }
template <class T> T cross(const Vec2<T>& p, const Vec2<T>& q) { return p.x * q.y - p.y * q.x; }
template <class T> T norm2(const Vec2<T>& p) { return dot(p, p); }
template <class T> double norm(const Vec2<T>& p) { return std::sqrt(scalar::to_double(norm2(p))); }

template <class T> Vec2<double> to_double(const Vec2<T>& p) {
    return {scalar::to_double(p.x), scalar::to_double(p.y)};
}

/// [[a, b], [c, d]]
template <class T>
struct Mat2 {
    T a{}, b{}, c{}, d{};

    static Mat2 identity() { return {T(1), T(0), T(0), T(1)}; }
    static Mat2 from_columns(const Vec2<T>& p, const Vec2<T>& q) { return {p.x, q.x, p.y, q.y}; }

    T det() const { return a * d - b * c; }
    Vec2<T> col(int i) const { return i == 0 ? Vec2<T>{a, c} : Vec2<T>{b, d}; }
    Mat2 inverse() const {
        T dt = det();
        if (scalar::sign(dt) == 0) throw DomainError("singular matrix");
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
    Mat2 transpose() const { return {a, c, b, d}; }

    friend Mat2 operator*(const Mat2& p, const Mat2& q) {
        return {p.a * q.a + p.b * q.c, p.a * q.b + p.b * q.d, p.c * q.a + p.d * q.c,
                p.c * q.b + p.d * q.d};
    }
    friend Vec2<T> operator*(const Mat2& m, const Vec2<T>& v) {
        return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
    }
    friend Mat2 operator*(const T& s, const Mat2& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
    friend Mat2 operator-(const Mat2& p, const Mat2& q) {
        return {p.a - q.a, p.b - q.b, p.c - q.c, p.d - q.d};
    }
    friend bool operator==(const Mat2& p, const Mat2& q) {
        return p.a == q.a && p.b == q.b && p.c == q.c && p.d == q.d;
    }
};

using IntMat2 = Mat2<std::int64_t>;
using Mat2d = Mat2<double>;
using Vec2d = Vec2<double>;

template <class T> Mat2<T> to_scalar_matrix(const IntMat2& m) {
    return {scalar::from_int<T>(m.a), scalar::from_int<T>(m.b), scalar::from_int<T>(m.c),
            scalar::from_int<T>(m.d)};
}

template <class T> Mat2d to_double(const Mat2<T>& m) {
    return {scalar::to_double(m.a), scalar::to_double(m.b), scalar::to_double(m.c),
            scalar::to_double(m.d)};
}

/// Largest absolute entry.
double max_abs_entry(const Mat2d& m);
/// max_ij{|g_ij|, |(g^{-1})_ij|}, the matrix size used for group elements.
double group_norm(const Mat2d& g);

/// a_t = diag(e^{t/2}, e^{-t/2}).
Mat2d geodesic(double t);
/// u_r = [[1, r], [0, 1]].
template <class T> Mat2<T> horocycle(const T& r) { return {T(1), r, T(0), T(1)}; }
/// Rotation by angle theta.
Mat2d rotation(double theta);

template <class T>
struct LatticeBasis {
    Mat2<T> basis;  ///< columns are the generators

    LatticeBasis() = default;
    explicit LatticeBasis(const Mat2<T>& m) : basis(m) {
        if (scalar::sign(m.det()) == 0) throw DomainError("degenerate lattice basis");
    }
    static LatticeBasis from_vectors(const Vec2<T>& p, const Vec2<T>& q) {
        return LatticeBasis(Mat2<T>::from_columns(p, q));
    }
    Vec2<T> gen(int i) const { return basis.col(i); }
    T area() const {
        T d = basis.det();
        return scalar::sign(d) < 0 ? -d : d;
    }
    /// Coordinates of p in the basis (exact for exact scalars).
    Vec2<T> coords(const Vec2<T>& p) const { return basis.inverse() * p; }
};

template <class T>
struct LatticePair {
    LatticeBasis<T> first, second;
};

using Lattice = LatticeBasis<double>;
using Pair = LatticePair<double>;

template <class T> LatticeBasis<double> to_double(const LatticeBasis<T>& L) {
    return LatticeBasis<double>(to_double(L.basis));
}
template <class T> LatticePair<double> to_double(const LatticePair<T>& P) {
    return {to_double(P.first), to_double(P.second)};
}

/// Lagrange-Gauss reduction.  The result has a shortest vector first, a
/// shortest independent vector second, and positive orientation.  If
/// `change` is given it receives the unimodular integer matrix with
/// reduced.basis = L.basis * change.
template <class T> LatticeBasis<T> reduce_basis(const LatticeBasis<T>& L, IntMat2* change = nullptr);

/// Squared length of the shortest nonzero vector (exact for exact scalars).
template <class T> T systole_sq(const LatticeBasis<T>& L);
/// Length of the shortest nonzero vector.
template <class T> double systole_lattice(const LatticeBasis<T>& L) {
    return std::sqrt(scalar::to_double(systole_sq(L)));
}
/// min of the two factor systoles, each factor rescaled to area 1.
double systole_pair(const Pair& P);

template <class T> LatticeBasis<T> act(const Mat2<T>& g, const LatticeBasis<T>& L) {
    if (scalar::sign(g.det()) <= 0) throw DomainError("act requires det(g) > 0");
    return LatticeBasis<T>(g * L.basis);
}
template <class T> LatticePair<T> act(const Mat2<T>& g, const LatticePair<T>& P) {
    return {act(g, P.first), act(g, P.second)};
}

/// Scales a lattice to covolume 1.
Lattice normalize_lattice(const Lattice& L);
Pair normalize_pair(const Pair& P);

/// Whether two bases generate the same lattice (exact for exact scalars,
/// tolerance 1e-9 on the change-of-basis entries for doubles).
template <class T> bool same_lattice(const LatticeBasis<T>& L1, const LatticeBasis<T>& L2);

struct FundamentalDomainResult {
    Mat2d g0;        ///< reduced representative, det 1, columns Lagrange-Gauss reduced
    IntMat2 gamma;   ///< integral, det 1, with g = g0 * gamma
};

/// Moves g in SL2(R) to a reduced representative of the coset g SL2(Z).
FundamentalDomainResult fundamental_domain_reduce(const Mat2d& g);

struct DistResult {
    double value = 0;        ///< max over the two factors
    bool bound_hit = false;  ///< the minimizing gamma reached the search bound
};

/// Distance proxy on X: per factor, min over gamma in SL2(Z) (entries of
/// the gamma relating the reduced representatives bounded by search_bound)
/// of max(|N - I|_max, |N^{-1} - I|_max) with N = g_Q gamma g_P^{-1};
/// the result is the max over both factors.  Inputs must have area 1.
DistResult dist_X(const Pair& P, const Pair& Q, int search_bound = 10);
/// Single-factor version of dist_X.
DistResult dist_lattice(const Lattice& P, const Lattice& Q, int search_bound = 10);

constexpr double kFloatTol = 1e-9;

}  // namespace h2lab
