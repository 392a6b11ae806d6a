#include "h2lab/nondivergence.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace h2lab {

namespace {

using Q = QuadNum;

template <class T> T abs_of(const T& x) { return scalar::sign(x) < 0 ? -x : x; }
template <class T> const T& max_of(const T& a, const T& b) { return a < b ? b : a; }
template <class T> const T& min_of(const T& a, const T& b) { return b < a ? b : a; }

long long floor_int(double x) { return static_cast<long long>(std::floor(x)); }
long long floor_int(const Q& x) {
    BigInt f = x.floor();
    if (!f.fits_slong_p()) throw BudgetExceeded("coefficient bound does not fit in 64 bits");
    return f.get_si();
}

// Sign-normalized representative of {v, -v}.
template <class T> bool is_canonical(const Vec2<T>& v) {
    return scalar::sign(v.y) > 0 || (scalar::sign(v.y) == 0 && scalar::sign(v.x) > 0);
}

// Coefficient bounds n0, n1 such that every lattice vector in the open box
// |x| < X, |y| < Y is c0 b0 + c1 b1 with |ci| <= ni (b = reduced basis).
template <class T>
std::pair<long long, long long> box_coefficient_bounds(const LatticeBasis<T>& R, const T& X, const T& Y) {
    Mat2<T> inv = R.basis.inverse();
    T n0 = abs_of(inv.a) * X + abs_of(inv.b) * Y;
    T n1 = abs_of(inv.c) * X + abs_of(inv.d) * Y;
    return {floor_int(n0), floor_int(n1)};
}

// Calls visit(v, c0, c1) for every nonzero lattice vector with |x| < X, |y| < Y.
template <class T, class F>
void scan_box(const LatticeBasis<T>& R, const T& X, const T& Y, F&& visit) {
    auto [n0, n1] = box_coefficient_bounds(R, X, Y);
    Vec2<T> b0 = R.gen(0), b1 = R.gen(1);
    for (long long c0 = -n0; c0 <= n0; ++c0)
        for (long long c1 = -n1; c1 <= n1; ++c1) {
            if (c0 == 0 && c1 == 0) continue;
            Vec2<T> v = scalar::from_int<T>(c0) * b0 + scalar::from_int<T>(c1) * b1;
            if (abs_of(v.x) < X && abs_of(v.y) < Y) visit(v, c0, c1);
        }
}

long long gcd_ll(long long a, long long b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

void check_interval(const ExactInterval& I, const char* who) {
    if (!(I.lo < I.hi)) throw DomainError(std::string(who) + ": interval must have positive length");
}

}  // namespace

// ------------------------------------------------------- length functions

template <class T> LengthFn<T> length_fn_of_vector(const Vec2<T>& v) {
    if (scalar::sign(v.x) == 0 && scalar::sign(v.y) == 0)
        throw DomainError("length_fn_of_vector: zero vector");
    LengthFn<T> f;
    if (scalar::sign(v.y) == 0) {
        f.kind = LengthKind::Constant;
        f.c = abs_of(v.x);
        return f;
    }
    f.kind = LengthKind::Vee;
    f.c = abs_of(v.y);
    f.t0 = -v.x / v.y;
    return f;
}

template <class T> IntervalSet<T> sublevel_set(const LengthFn<T>& f, const Interval<T>& I, const T& eps) {
    if (scalar::sign(eps) <= 0) throw DomainError("sublevel_set: eps must be positive");
    IntervalSet<T> out;
    if (!(f.c < eps)) return out;
    if (f.kind == LengthKind::Constant) {
        out.parts.push_back(I);
        return out;
    }
    T w = eps / f.c;
    T lo = max_of(I.lo, T(f.t0 - w)), hi = min_of(I.hi, T(f.t0 + w));
    if (lo < hi) out.parts.push_back({lo, hi});
    return out;
}

template LengthFn<double> length_fn_of_vector(const Vec2<double>&);
template LengthFn<Q> length_fn_of_vector(const Vec2<Q>&);
template IntervalSet<double> sublevel_set(const LengthFn<double>&, const Interval<double>&, const double&);
template IntervalSet<Q> sublevel_set(const LengthFn<Q>&, const Interval<Q>&, const Q&);

GoodCheck verify_good(const ExactLengthFn& f, const ExactInterval& I, const Q& eps, const Q& C, int alpha) {
    check_interval(I, "verify_good");
    if (alpha < 1) throw DomainError("verify_good: alpha must be a positive integer");
    GoodCheck g;
    g.lhs = sublevel_set(f, I, eps).measure() / I.length();
    Q ratio = eps / f.sup_on(I), power(1);
    for (int i = 0; i < alpha; ++i) power *= ratio;
    g.rhs = C * power;
    g.holds = g.lhs <= g.rhs;
    return g;
}

// ----------------------------------------------------- sparse cover for X

int GoodFamily::count_below(const Q& t, const Q& threshold) const {
    int n = 0;
    for (const auto& m : members)
        if (m.f.value(t) < threshold) ++n;
    return n;
}

ExactIntervalSet GoodFamily::sublevel(const ExactInterval& I, const Q& theta) const {
    ExactIntervalSet s;
    for (const auto& m : members) s.add(sublevel_set(m.f, I, theta));
    return s;
}

std::vector<Vec2<Q>> primitive_vectors_in_box(const LatticeBasis<Q>& L, const Q& X, const Q& Y) {
    std::vector<Vec2<Q>> out;
    LatticeBasis<Q> R = reduce_basis(L);
    scan_box(R, X, Y, [&](const Vec2<Q>& v, long long c0, long long c1) {
        if (gcd_ll(c0, c1) == 1 && is_canonical(v)) out.push_back(v);
    });
    return out;
}

GoodFamily sparse_cover_X(const LatticePair<Q>& pair, const ExactInterval& I, const Q& eta) {
    check_interval(I, "sparse_cover_X");
    if (!(Q(0) < eta && eta < Q(1))) throw DomainError("sparse_cover_X: eta must lie in (0, 1)");
    Q M = max_of(I.lo.abs(), I.hi.abs());
    GoodFamily fam;
    const LatticeBasis<Q>* lat[2] = {&pair.first, &pair.second};
    for (int i = 0; i < 2; ++i)
        for (const auto& v : primitive_vectors_in_box(*lat[i], Q(1) + M, Q(1))) {
            ExactLengthFn f = length_fn_of_vector(v);
            if (sublevel_set(f, I, Q(1)).empty()) continue;
            fam.members.push_back({f, i + 1, v});
        }
    return fam;
}

CoverXAudit audit_sparse_cover_X(const LatticePair<Q>& pair, const ExactInterval& I, const Q& eta,
                                 const GoodFamily& family) {
    check_interval(I, "audit_sparse_cover_X");
    CoverXAudit a;

    // Multiplicity at threshold 1: the count is constant between breakpoints.
    std::vector<Q> pts{I.lo, I.hi};
    for (const auto& m : family.members)
        for (const auto& p : sublevel_set(m.f, I, Q(1)).parts) {
            pts.push_back(p.lo);
            pts.push_back(p.hi);
        }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Q> probes = pts;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) probes.push_back((pts[i] + pts[i + 1]) / Q(2));
    a.worst_point = I.lo;
    for (const Q& t : probes) {
        int per[2] = {0, 0};
        for (const auto& m : family.members)
            if (m.f.value(t) < Q(1)) ++per[m.lattice - 1];
        a.per_lattice_max[0] = std::max(a.per_lattice_max[0], per[0]);
        a.per_lattice_max[1] = std::max(a.per_lattice_max[1], per[1]);
        if (per[0] + per[1] > a.max_multiplicity) {
            a.max_multiplicity = per[0] + per[1];
            a.worst_point = t;
        }
    }
    a.multiplicity_ok = a.max_multiplicity <= 2;

    // Coverage: every lattice vector with Euclidean |u_r v| < eta for some r
    // in I has |y| < eta and |x| < eta (1 + M), so its coefficients in the
    // input basis are bounded by the row norms of the inverse basis.
    ExactIntervalSet cover = family.sublevel(I, eta);
    a.v0_cover_measure = cover.measure();
    ExactIntervalSet outside = cover.complement_in(I);
    double M = std::max(std::fabs(I.lo.to_double()), std::fabs(I.hi.to_double()));
    double etad = eta.to_double();
    double vmax = etad * std::sqrt((1 + M) * (1 + M) + 1);
    Q eta2 = eta * eta;
    const LatticeBasis<Q>* lat[2] = {&pair.first, &pair.second};
    for (const auto* L : lat) {
        Mat2d inv = to_double(L->basis).inverse();
        long long n0 = floor_int(std::hypot(inv.a, inv.b) * vmax) + 1;
        long long n1 = floor_int(std::hypot(inv.c, inv.d) * vmax) + 1;
        Vec2<Q> b0 = L->gen(0), b1 = L->gen(1);
        for (long long c0 = -n0; c0 <= n0; ++c0)
            for (long long c1 = -n1; c1 <= n1; ++c1) {
                if (c0 == 0 && c1 == 0) continue;
                Vec2<Q> v = Q(c0) * b0 + Q(c1) * b1;
                if (!(v.y.abs() < eta)) continue;
                ++a.oracle_vectors;
                for (const auto& K : outside.parts) {
                    Q r = K.lo;
                    if (!v.y.is_zero()) r = min_of(max_of(-v.x / v.y, K.lo), K.hi);
                    Q x = v.x + r * v.y;
                    if (x * x + v.y * v.y < eta2) ++a.coverage_violations;
                }
            }
    }
    a.coverage_ok = a.coverage_violations == 0;
    return a;
}

// ----------------------------------------------- flow sublevel statistics

FlowMeasure flow_sublevel_measure(const Pair& pair, double t, double eps, const Interval<double>& I,
                                  std::size_t max_vectors) {
    if (!(t >= 0)) throw DomainError("flow_sublevel_measure: t must be >= 0");
    if (!(eps > 0 && eps < 1)) throw DomainError("flow_sublevel_measure: eps must lie in (0, 1)");
    if (!(I.hi > I.lo)) throw DomainError("flow_sublevel_measure: interval must have positive length");
    FlowMeasure out;
    const double e4 = eps * eps * eps * eps, et = std::exp(t), eh = std::exp(t / 2);
    const double M = std::max(std::fabs(I.lo), std::fabs(I.hi));
    // |a_t u_r v|^2 = e^t (x + r y)^2 + e^{-t} y^2 < eps^4 forces
    // |y| < eps^2 e^{t/2} and |x| < eps^2 e^{-t/2} + M |y|.
    const double Y = eps * eps * eh, X = eps * eps / eh + M * Y;

    Lattice R[2] = {reduce_basis(pair.first), reduce_basis(pair.second)};
    double cells = 0;
    for (const auto& L : R) {
        auto [n0, n1] = box_coefficient_bounds(L, X, Y);
        cells += (2.0 * n0 + 1) * (2.0 * n1 + 1);
    }

    if (cells <= static_cast<double>(max_vectors)) {
        std::vector<std::pair<double, double>> ivs;
        for (const auto& L : R)
            scan_box(L, X, Y, [&](const Vec2d& v, long long c0, long long c1) {
                if (gcd_ll(c0, c1) != 1 || !is_canonical(v)) return;
                double rest = e4 - v.y * v.y / et;
                if (rest <= 0) return;
                if (v.y == 0) {
                    if (et * v.x * v.x < e4) ivs.emplace_back(I.lo, I.hi);
                    return;
                }
                double center = -v.x / v.y, hw = std::sqrt(rest) / (eh * std::fabs(v.y));
                double lo = std::max(I.lo, center - hw), hi = std::min(I.hi, center + hw);
                if (lo < hi) ivs.emplace_back(lo, hi);
            });
        out.vectors = ivs.size();
        std::sort(ivs.begin(), ivs.end());
        double cur_lo = 0, cur_hi = 0;
        bool open = false;
        for (const auto& [lo, hi] : ivs) {
            if (open && lo <= cur_hi) {
                cur_hi = std::max(cur_hi, hi);
                continue;
            }
            if (open) out.measure += cur_hi - cur_lo;
            cur_lo = lo;
            cur_hi = hi;
            open = true;
        }
        if (open) out.measure += cur_hi - cur_lo;
        return out;
    }

    // Grid fallback: midpoint rule on cells of width 1e-4 |I|.
    out.exact = false;
    const int N = 10000;
    const double h = (I.hi - I.lo) / N;
    const Mat2d at = geodesic(t);
    int hits = 0, crossings = 0;
    bool prev = false;
    for (int i = 0; i < N; ++i) {
        double r = I.lo + (i + 0.5) * h;
        Mat2d g = at * horocycle(r);
        bool in = false;
        for (const auto& L : R)
            if (systole_sq(LatticeBasis<double>(g * L.basis)) < e4) in = true;
        if (in) ++hits;
        if (i > 0 && in != prev) ++crossings;
        prev = in;
    }
    out.measure = hits * h;
    out.grid_error = (crossings + 1) * h;
    return out;
}

// --------------------------------------------------------- interval gadgets

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("interval gadget: hypothesis fails: ") + what);
}

void check_common(const GadgetParams& p, const ExactInterval& I, const ExactInterval& Ip) {
    require(p.A >= Q(10) && p.B >= Q(10) && p.D >= Q(10) && p.E >= Q(10), "A, B, D, E >= 10");
    require(p.A <= p.B, "A <= B");
    require(p.D >= Q(6) * p.B * p.E / p.A, "D >= 6BE/A");
    require(I.lo < I.hi && Ip.lo < Ip.hi, "I, I' have positive length");
    require(I.midpoint() == Ip.midpoint(), "I and I' concentric");
    require(Q(2) * p.D * I.length() <= Ip.length(), "2D|I| <= |I'|");
}

bool outside_I_inside_Ip(const ExactInterval& Jp, const ExactInterval& I, const ExactInterval& Ip) {
    return Ip.contains(Jp) && !Jp.meets(I);
}

}  // namespace

GadgetResult interval_gadget_1(const GadgetParams& p, const ExactInterval& I, const ExactInterval& Ip,
                               const ExactInterval& J) {
    check_common(p, I, Ip);
    require(J.lo <= J.hi, "J is an interval");
    require(J.length() <= p.B, "|J| <= B");
    require(p.A <= I.length() && I.length() <= p.B, "A <= |I| <= B");
    require(J.meets(I), "J meets I");

    const Q half_DA = p.D * p.A / Q(2);
    const Q min_len = p.E / Q(2) * (I.length() + J.length());
    auto ok = [&](const ExactInterval& Jp) {
        return Jp.scaled(Q(2)).contains(J.scaled(Q(2))) && Jp.length() >= min_len &&
               outside_I_inside_Ip(Jp, I, Ip);
    };
    GadgetResult r;
    const Q a = J.lo;
    r.J_prime = {a + J.length() + Q(2) * p.B, a + p.B + half_DA};
    if (ok(r.J_prime)) return r;
    const Q b = J.hi;
    r.J_prime = {b - p.B - half_DA, b - J.length() - Q(2) * p.B};
    r.mirrored = true;
    if (ok(r.J_prime)) return r;
    throw std::logic_error("interval_gadget_1: neither construction satisfies the conclusions");
}

ExactInterval gadget_2_construction(const ExactInterval& J, const Q& E, bool mirrored) {
    const Q len = J.length();
    if (mirrored) return {J.lo - E * len, J.lo};
    return {J.hi, J.hi + E * len};
}

GadgetResult interval_gadget_2(const GadgetParams& p, const ExactInterval& I, const ExactInterval& Ip,
                               const ExactInterval& J) {
    check_common(p, I, Ip);
    require(J.lo <= J.hi, "J is an interval");
    require(J.length() <= p.B, "|J| <= B");
    require(p.A <= I.length(), "A <= |I|");
    require(J.meets(I), "J meets I");
    const bool right_out = I.hi < J.hi, left_out = J.lo < I.lo;
    require(right_out || left_out, "an endpoint of J lies outside I");

    GadgetResult r;
    r.mirrored = !right_out;
    r.J_prime = gadget_2_construction(J, p.E, r.mirrored);
    if (!(r.J_prime.scaled(Q(2)).contains(J.scaled(Q(2))) && r.J_prime.length() == p.E * J.length() &&
          outside_I_inside_Ip(r.J_prime, I, Ip)))
        throw std::logic_error("interval_gadget_2: construction violates the conclusions");
    return r;
}

// --------------------------------------------------- sparse cover (surface)

namespace {

// Largest pairwise non-intersecting subset of `items` (indices into adj),
// stopping once `cap` is reached.
struct DisjointSearch {
    const std::vector<std::vector<char>>& meets;
    int cap;
    int best = 0;

    void run(const std::vector<int>& cand, int size) {
        if (size > best) best = size;
        if (best >= cap) return;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (size + static_cast<int>(cand.size() - i) <= best) return;
            std::vector<int> next;
            for (std::size_t j = i + 1; j < cand.size(); ++j)
                if (!meets[cand[i]][cand[j]]) next.push_back(cand[j]);
            run(next, size + 1);
            if (best >= cap) return;
        }
    }
};

constexpr int kMaxDisjointH2 = 9;  // a maximal disjoint family triangulates: 6g - 6 + 3 = 9 edges

int max_disjoint(const std::vector<std::vector<char>>& meets, const std::vector<int>& items, int cap) {
    DisjointSearch s{meets, cap};
    s.run(items, 0);
    return s.best;
}

}  // namespace

SurfaceCoverReport sparse_cover_surface(const Surface& s, const Interval<double>& I, double C, double Lmax,
                                        const SurfaceCoverOptions& opt) {
    if (!(C > 0 && C < 1)) throw DomainError("sparse_cover_surface: C must lie in (0, 1)");
    if (opt.R < 2) throw DomainError("sparse_cover_surface: R must be >= 2");
    if (!(I.hi > I.lo)) throw DomainError("sparse_cover_surface: interval must have positive length");
    if (opt.grid_points < 2) throw DomainError("sparse_cover_surface: need at least 2 grid points");

    SurfaceCoverReport rep;
    rep.C = C;
    rep.R = opt.R;
    rep.grid_points = opt.grid_points;
    const int R = opt.R;
    for (int k = 1; k <= R + 1; ++k)
        rep.thresholds.push_back(std::pow(C, static_cast<double>(R - k) / (R - 1)) * C);
    auto L = [&](int k) { return rep.thresholds[k - 1]; };

    // l(r) < C on I forces |y| < C and |x| < C (1 + M).
    const double M = std::max(std::fabs(I.lo), std::fabs(I.hi));
    rep.Lmax = Lmax;
    rep.Lmax_needed = C * std::sqrt((1 + M) * (1 + M) + 1);
    rep.complete = Lmax >= rep.Lmax_needed;
    if (!rep.complete)
        rep.notes.push_back("Lmax below the completeness bound: coverage and multiplicity are conditional");

    const Triangulation<double> tr = tracing_triangulation(s);
    std::vector<std::vector<Piece>> pieces;
    for (const auto& sc : enumerate_saddle_connections(s, std::min(Lmax, rep.Lmax_needed), opt.trace)) {
        const double tol = 1e-12 * std::max(1.0, sc.length);
        bool canonical = sc.holonomy.y > tol || (std::fabs(sc.holonomy.y) <= tol && sc.holonomy.x > 0);
        if (!canonical) continue;
        CoverConnection cc;
        cc.holonomy = sc.holonomy;
        cc.f = length_fn_of_vector(sc.holonomy);
        cc.basis_coeffs = sc.basis_coeffs;
        if (sublevel_set(cc.f, I, C).empty()) continue;
        rep.connections.push_back(cc);
        pieces.push_back(connection_pieces(tr, sc));
    }
    const int n = static_cast<int>(rep.connections.size());
    std::vector<std::vector<char>> meets(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            meets[i][j] = meets[j][i] = connections_intersect(pieces[i], pieces[j], tr) ? 1 : 0;
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    rep.observed_disjoint = max_disjoint(meets, all, kMaxDisjointH2);

    const double inf = std::numeric_limits<double>::infinity();
    const double s2 = std::sqrt(2.0);
    rep.families.assign(R, {});
    std::vector<std::vector<char>> in_family(R, std::vector<char>(n, 0));
    std::vector<double> vals(n);
    std::vector<int> level(opt.grid_points, 0);  // r(t) on V(C^2), 0 outside
    auto grid_t = [&](int j) { return I.lo + (I.hi - I.lo) * j / (opt.grid_points - 1); };

    for (int j = 0; j < opt.grid_points; ++j) {
        const double t = grid_t(j);
        for (int i = 0; i < n; ++i) vals[i] = rep.connections[i].f.value(t);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });

        // alpha_k(t): the value at which the sorted prefix first holds k disjoint connections.
        std::vector<double> alpha(R + 1, inf);
        std::vector<int> prefix;
        int have = 0;
        for (int idx : order) {
            if (vals[idx] >= C || have >= R) break;
            prefix.push_back(idx);
            int now = max_disjoint(meets, prefix, R);
            for (int k = have + 1; k <= now; ++k) alpha[k] = vals[idx];
            have = now;
        }
        if (!(alpha[1] < L(1))) continue;  // t not in V(C^2)
        ++rep.v_points;
        int r = 1;
        for (int k = 1; k <= R; ++k)
            if (alpha[k] < L(k)) r = k;
        if (r == R) ++rep.top_level_points;
        level[j] = r;

        bool claimed = false;
        const double guard = s2 / 3 * L(r + 1);
        for (int i = 0; i < n; ++i) {
            if (!(vals[i] < L(r))) continue;
            bool isolated = true;
            for (int q = 0; q < n && isolated; ++q)
                if (q != i && meets[i][q] && vals[q] < guard) isolated = false;
            if (!isolated) continue;
            claimed = true;
            if (!in_family[r - 1][i]) {
                in_family[r - 1][i] = 1;
                rep.families[r - 1].push_back(i);
            }
        }
        if (!claimed) ++rep.unclaimed_points;
    }
    for (auto& f : rep.families) std::sort(f.begin(), f.end());

    for (int j = 0; j < opt.grid_points; ++j) {
        const double t = grid_t(j);
        if (level[j] > 0) {
            bool covered = false;
            for (int k = 1; k <= R && !covered; ++k)
                for (int i : rep.families[k - 1])
                    if (rep.connections[i].f.value(t) < L(k)) {
                        covered = true;
                        break;
                    }
            if (!covered) ++rep.uncovered_points;
        }
        for (int k = 1; k <= R; ++k) {
            const double bound = s2 / 9 * L(k + 1);
            int cnt = 0;
            for (int i : rep.families[k - 1])
                if (rep.connections[i].f.value(t) <= bound) ++cnt;
            rep.max_multiplicity = std::max(rep.max_multiplicity, cnt);
        }
    }
    if (rep.top_level_points > 0)
        rep.notes.push_back("some points have r(t) = R: C is not small enough for the disjointness argument");
    if (rep.unclaimed_points > 0)
        rep.notes.push_back("some points of V_k lie in no H_k(delta): C is above the smallness threshold");
    return rep;
}

std::string surface_cover_json(const SurfaceCoverReport& r) {
    nlohmann::ordered_json j;
    j["C"] = r.C;
    j["R"] = r.R;
    j["thresholds"] = r.thresholds;
    j["Lmax"] = r.Lmax;
    j["Lmax_needed"] = r.Lmax_needed;
    j["complete"] = r.complete;
    j["grid_points"] = r.grid_points;
    j["v_points"] = r.v_points;
    j["uncovered_points"] = r.uncovered_points;
    j["unclaimed_points"] = r.unclaimed_points;
    j["top_level_points"] = r.top_level_points;
    j["max_multiplicity"] = r.max_multiplicity;
    j["observed_disjoint"] = r.observed_disjoint;
    nlohmann::ordered_json fams = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < r.families.size(); ++k) {
        nlohmann::ordered_json members = nlohmann::ordered_json::array();
        for (int i : r.families[k]) {
            const auto& c = r.connections[i];
            nlohmann::ordered_json m;
            m["holonomy"] = {c.holonomy.x, c.holonomy.y};
            m["class"] = c.basis_coeffs;
            members.push_back(m);
        }
        fams.push_back({{"k", k + 1}, {"members", members}});
    }
    j["families"] = fams;
    j["notes"] = r.notes;
    return j.dump(2);
}

}  // namespace h2lab
