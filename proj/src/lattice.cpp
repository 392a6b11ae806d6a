#include "h2lab/lattice.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace h2lab {

double max_abs_entry(const Mat2d& m) {
    return std::max({std::fabs(m.a), std::fabs(m.b), std::fabs(m.c), std::fabs(m.d)});
}

double group_norm(const Mat2d& g) { return std::max(max_abs_entry(g), max_abs_entry(g.inverse())); }

Mat2d geodesic(double t) { return {std::exp(t / 2), 0.0, 0.0, std::exp(-t / 2)}; }

Mat2d rotation(double theta) {
    return {std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)};
}

template <class T>
LatticeBasis<T> reduce_basis(const LatticeBasis<T>& L, IntMat2* change) {
    Vec2<T> b1 = L.gen(0), b2 = L.gen(1);
    IntMat2 C = IntMat2::identity();  // columns: coordinates of b1, b2 in the input basis
    for (int iter = 0;; ++iter) {
        if (iter > 10000) throw DomainError("basis reduction did not terminate");
        if (scalar::sign(norm2(b2) - norm2(b1)) < 0) {
            std::swap(b1, b2);
            std::swap(C.a, C.b);
            std::swap(C.c, C.d);
        }
        T mu = scalar::round(dot(b1, b2) / norm2(b1));
        if (scalar::sign(mu) == 0) break;
        long long m = scalar::to_int(mu);
        b2 = b2 - mu * b1;
        C.b -= m * C.a;
        C.d -= m * C.c;
    }
    if (scalar::sign(cross(b1, b2)) < 0) {
        b2 = -b2;
        C.b = -C.b;
        C.d = -C.d;
    }
    if (change) *change = C;
    return LatticeBasis<T>::from_vectors(b1, b2);
}

template <class T>
T systole_sq(const LatticeBasis<T>& L) {
    return norm2(reduce_basis(L).gen(0));
}

template <class T>
bool same_lattice(const LatticeBasis<T>& L1, const LatticeBasis<T>& L2) {
    Mat2<T> M = L1.basis.inverse() * L2.basis;
    if constexpr (std::is_same_v<T, double>) {
        for (double e : {M.a, M.b, M.c, M.d})
            if (std::fabs(e - std::round(e)) > kFloatTol * (1 + std::fabs(e))) return false;
        return std::fabs(std::fabs(M.det()) - 1) <= kFloatTol;
    } else {
        for (const T& e : {M.a, M.b, M.c, M.d})
            if (!e.is_rational() || !e.a().is_integer()) return false;
        T dt = M.det();
        return dt == T(1) || dt == T(-1);
    }
}

template LatticeBasis<double> reduce_basis(const LatticeBasis<double>&, IntMat2*);
template LatticeBasis<QuadNum> reduce_basis(const LatticeBasis<QuadNum>&, IntMat2*);
template double systole_sq(const LatticeBasis<double>&);
template QuadNum systole_sq(const LatticeBasis<QuadNum>&);
template bool same_lattice(const LatticeBasis<double>&, const LatticeBasis<double>&);
template bool same_lattice(const LatticeBasis<QuadNum>&, const LatticeBasis<QuadNum>&);

Lattice normalize_lattice(const Lattice& L) {
    double s = 1.0 / std::sqrt(L.area());
    return Lattice(s * L.basis);
}

Pair normalize_pair(const Pair& P) { return {normalize_lattice(P.first), normalize_lattice(P.second)}; }

double systole_pair(const Pair& P) {
    Pair N = normalize_pair(P);
    return std::min(systole_lattice(N.first), systole_lattice(N.second));
}

FundamentalDomainResult fundamental_domain_reduce(const Mat2d& g) {
    if (std::fabs(g.det() - 1) > kFloatTol) throw DomainError("fundamental_domain_reduce requires det(g) = 1");
    IntMat2 C;
    Lattice R = reduce_basis(Lattice(g), &C);
    FundamentalDomainResult out;
    out.g0 = R.basis;
    out.gamma = {C.d, -C.b, -C.c, C.a};  // C^{-1}, det C = 1
    return out;
}

namespace {

long long ext_gcd(long long a, long long b, long long& x, long long& y) {
    if (b == 0) {
        x = (a >= 0) ? 1 : -1;
        y = 0;
        return std::llabs(a);
    }
    long long x1, y1;
    long long g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

double gamma_distance(const Mat2d& p0, const Mat2d& q0inv, const Mat2d& q0, const Mat2d& p0inv,
                      const IntMat2& gm) {
    Mat2d G = to_scalar_matrix<double>(gm);
    Mat2d Gi = to_scalar_matrix<double>(IntMat2{gm.d, -gm.b, -gm.c, gm.a});
    Mat2d N = q0 * G * p0inv;
    Mat2d Ni = p0 * Gi * q0inv;
    return std::max(max_abs_entry(N - Mat2d::identity()), max_abs_entry(Ni - Mat2d::identity()));
}

}  // namespace

DistResult dist_lattice(const Lattice& P, const Lattice& Q, int bound) {
    if (std::fabs(P.area() - 1) > kFloatTol || std::fabs(Q.area() - 1) > kFloatTol)
        throw DomainError("dist_X requires area-normalized lattices");
    const Mat2d p0 = reduce_basis(P).basis, q0 = reduce_basis(Q).basis;
    const Mat2d p0inv = p0.inverse(), q0inv = q0.inverse();
    const Vec2d pc[2] = {p0.col(0), p0.col(1)};
    const double pn[2] = {norm(pc[0]), norm(pc[1])};

    double best = std::numeric_limits<double>::infinity();
    IntMat2 best_g = IntMat2::identity();
    auto consider = [&](const IntMat2& gm) {
        double d = gamma_distance(p0, q0inv, q0, p0inv, gm);
        if (d < best) {
            best = d;
            best_g = gm;
        }
    };

    // Seed with integer matrices near q0^{-1} p0.
    Mat2d M = q0inv * p0;
    long long ra = std::llround(M.a), rb = std::llround(M.b), rc = std::llround(M.c),
              rd = std::llround(M.d);
    for (int da = -1; da <= 1; ++da)
        for (int db = -1; db <= 1; ++db)
            for (int dc = -1; dc <= 1; ++dc)
                for (int dd = -1; dd <= 1; ++dd) {
                    IntMat2 gm{ra + da, rb + db, rc + dc, rd + dd};
                    if (gm.det() != 1) continue;
                    if (std::max({std::llabs(gm.a), std::llabs(gm.b), std::llabs(gm.c), std::llabs(gm.d)}) > bound)
                        continue;
                    consider(gm);
                }

    // Pruned exhaustive search: |q0 gamma e_j - p0 e_j| <= 2 d |p0 e_j| is
    // necessary for max|N - I| <= d.
    const double slack = 1 + 1e-12;
    for (long long a = -bound; a <= bound; ++a)
        for (long long c = -bound; c <= bound; ++c) {
            if (std::gcd(a, c) != 1) continue;
            Vec2d col1 = q0 * Vec2d{double(a), double(c)};
            if (norm(col1 - pc[0]) > 2 * best * pn[0] * slack) continue;
            long long x, y;
            ext_gcd(a, c, x, y);  // a x + c y = 1 -> (b, d) = (-y, x) has a d - b c = 1
            long long b0 = -y, d0 = x;
            // all solutions: (b0 + k a, d0 + k c)
            long long kmin = -4 * bound - 4, kmax = 4 * bound + 4;
            for (long long k = kmin; k <= kmax; ++k) {
                long long b = b0 + k * a, d = d0 + k * c;
                if (std::llabs(b) > bound || std::llabs(d) > bound) continue;
                Vec2d col2 = q0 * Vec2d{double(b), double(d)};
                if (norm(col2 - pc[1]) > 2 * best * pn[1] * slack) continue;
                consider(IntMat2{a, b, c, d});
            }
        }

    DistResult r;
    r.value = best;
    r.bound_hit = std::max({std::llabs(best_g.a), std::llabs(best_g.b), std::llabs(best_g.c),
                            std::llabs(best_g.d)}) >= bound;
    return r;
}

DistResult dist_X(const Pair& P, const Pair& Q, int bound) {
    DistResult r1 = dist_lattice(P.first, Q.first, bound);
    DistResult r2 = dist_lattice(P.second, Q.second, bound);
    return {std::max(r1.value, r2.value), r1.bound_hit || r2.bound_hit};
}

}  // namespace h2lab
