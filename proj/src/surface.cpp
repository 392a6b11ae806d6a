#include "h2lab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace h2lab {

namespace {

long long ext_gcd(long long a, long long b, long long& x, long long& y) {
    if (b == 0) {
        x = a >= 0 ? 1 : -1;
        y = 0;
        return a >= 0 ? a : -a;
    }
    long long x1, y1;
    long long g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

template <class T> bool is_negligible(const T& x, const T& scale) {
    if constexpr (std::is_same_v<T, double>) return std::fabs(x) <= kFloatTol * std::max(1.0, std::fabs(scale));
    else {
        (void)scale;
        return x.is_zero();
    }
}

template <class T> T tabs(const T& x) { return scalar::sign(x) < 0 ? -x : x; }

template <class T> Polygon<T> parallelogram(const Vec2<T>& origin, const Vec2<T>& p, const Vec2<T>& q) {
    return Polygon<T>{{origin, origin + p, origin + p + q, origin + q}};
}

}  // namespace

template <class T>
SurfaceH2<T> connected_sum(const SplittingTriple<T>& t) {
    ValidationReport rep = validate_splitting(t);
    if (!rep.valid) throw DomainError("connected_sum: invalid splitting: " + rep.reason);
    // A: the lattice [0, v] meets only at 0 (slit torus); B: v is primitive in it.
    const LatticeBasis<T>& A = rep.primitive_in == PrimitiveIn::Second ? t.lambda1 : t.lambda2;
    const LatticeBasis<T>& B = rep.primitive_in == PrimitiveIn::Second ? t.lambda2 : t.lambda1;
    const Vec2<T> v = t.v;
    const T one(1), zero(0);

    // Euclid on the coordinates of v in A, with matching column operations on
    // the basis, so that v = basis * u throughout.
    Mat2<T> basis = A.basis;
    Vec2<T> u = A.coords(v);
    bool parallel = false;
    for (int iter = 0;; ++iter) {
        if (iter > 100000) throw DomainError("connected_sum: slit reduction did not terminate");
        T scale = tabs(u.x) + tabs(u.y);
        if (is_negligible(u.y, scale)) {
            u.y = zero;
            parallel = true;
            break;
        }
        if (is_negligible(u.x, scale)) {
            u = Vec2<T>{-u.y, zero};  // S = [[0,-1],[1,0]]
            basis = basis * Mat2<T>{zero, one, -one, zero};
            parallel = true;
            break;
        }
        if (scalar::sign(tabs(u.x) - one) < 0 && scalar::sign(tabs(u.y) - one) < 0) break;
        if (scalar::sign(tabs(u.x) - tabs(u.y)) >= 0) {
            T k = scalar::trunc(u.x / u.y);
            u.x = u.x - k * u.y;
            basis = basis * Mat2<T>{one, k, zero, one};
        } else {
            T k = scalar::trunc(u.y / u.x);
            u.y = u.y - k * u.x;
            basis = basis * Mat2<T>{one, zero, k, one};
        }
    }

    // b2 completes v to a basis of B, oriented so that det(v, b2) > 0.
    Vec2<T> z = B.coords(v);
    long long p = scalar::to_int(scalar::round(z.x)), q = scalar::to_int(scalar::round(z.y));
    long long gx, gy;
    if (ext_gcd(p, q, gx, gy) != 1) throw DomainError("connected_sum: v is not primitive");
    Vec2<T> b2 = B.basis * Vec2<T>{scalar::from_int<T>(-gy), scalar::from_int<T>(gx)};
    if (scalar::sign(cross(v, b2)) < 0) b2 = -b2;

    SurfaceH2<T> s;
    const Vec2<T> O{zero, zero};
    if (parallel) {
        if (scalar::sign(u.x) < 0) basis = T(-1) * basis;
        Vec2<T> a1 = basis.col(0), b1 = basis.col(1);
        if (scalar::sign(cross(a1, b1)) < 0) b1 = -b1;
        // P1 = v x b2, P2 = v x b1, P3 = (a1 - v) x b1 (P3 placed next to P2).
        s.polygons = {parallelogram(O, v, b2), parallelogram(O, v, b1), parallelogram(v, a1 - v, b1)};
        s.gluings = {
            {{0, 1}, {0, 3}},  // P1 right - left
            {{1, 0}, {0, 2}},  // slit: bottom of P2 to top of P1
            {{1, 2}, {0, 0}},  // slit: top of P2 to bottom of P1
            {{1, 1}, {2, 3}},  // P2 right - P3 left
            {{2, 1}, {1, 3}},  // P3 right - P2 left
            {{2, 0}, {2, 2}},  // P3 bottom - top
        };
        return s;
    }

    // Generic: the slit runs from a corner of the cell spanned by a, b to the
    // interior point v; cut the cell into four triangles around v.
    Vec2<T> a = scalar::sign(u.x) > 0 ? basis.col(0) : -basis.col(0);
    Vec2<T> b = scalar::sign(u.y) > 0 ? basis.col(1) : -basis.col(1);
    if (scalar::sign(cross(a, b)) < 0) std::swap(a, b);
    s.polygons = {
        parallelogram(O, v, b2),          // 0: cylinder v x b2
        Polygon<T>{{O, a, v}},            // 1
        Polygon<T>{{a, a + b, v}},        // 2
        Polygon<T>{{a + b, b, v}},        // 3
        Polygon<T>{{b, O, v}},            // 4
    };
    s.gluings = {
        {{0, 1}, {0, 3}},  // cylinder right - left
        {{1, 0}, {3, 0}},  // cell side a
        {{2, 0}, {4, 0}},  // cell side b
        {{1, 1}, {2, 2}},  // spoke a - v
        {{2, 1}, {3, 2}},  // spoke a+b - v
        {{3, 1}, {4, 2}},  // spoke b - v
        {{1, 2}, {0, 0}},  // slit, right side - cylinder bottom
        {{0, 2}, {4, 1}},  // cylinder top - slit, left side
    };
    return s;
}

template <class T>
SurfaceH2<T> act(const Mat2<T>& g, const SurfaceH2<T>& s) {
    if (scalar::sign(g.det()) <= 0) throw DomainError("act requires det(g) > 0");
    SurfaceH2<T> out = s;
    for (auto& p : out.polygons)
        for (auto& v : p.vertices) v = g * v;
    return out;
}

template <class T>
T surface_area(const SurfaceH2<T>& s) {
    T total(0);
    for (const auto& p : s.polygons) {
        int n = static_cast<int>(p.vertices.size());
        for (int i = 0; i < n; ++i) total = total + cross(p.vertices[i], p.vertices[(i + 1) % n]);
    }
    return total / T(2);
}

template <class T>
SurfaceAudit audit_surface(const SurfaceH2<T>& s) {
    SurfaceAudit au;
    std::vector<int> offset;
    int nv = 0;
    for (const auto& p : s.polygons) {
        offset.push_back(nv);
        nv += static_cast<int>(p.vertices.size());
    }
    std::vector<int> parent(nv);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    auto vid = [&](int poly, int i) {
        int n = static_cast<int>(s.polygons[poly].vertices.size());
        return offset[poly] + ((i % n) + n) % n;
    };
    std::vector<int> uses(nv, 0);
    bool ok = true;
    for (const auto& [e, f] : s.gluings) {
        uses[vid(e.polygon, e.edge)]++;
        uses[vid(f.polygon, f.edge)]++;
        Vec2<T> he = s.edge_vector(e), hf = s.edge_vector(f);
        if constexpr (std::is_same_v<T, double>) {
            if (norm(he + hf) > kFloatTol * std::max(1.0, norm(he))) ok = false;
        } else {
            if (!(he + hf == Vec2<T>{T(0), T(0)})) ok = false;
        }
        parent[find(vid(e.polygon, e.edge))] = find(vid(f.polygon, f.edge + 1));
        parent[find(vid(e.polygon, e.edge + 1))] = find(vid(f.polygon, f.edge));
    }
    for (int x : uses)
        if (x != 1) ok = false;
    au.gluings_consistent = ok;
    for (int i = 0; i < nv; ++i)
        if (find(i) == i) ++au.vertex_classes;
    au.euler_characteristic = au.vertex_classes - static_cast<int>(s.gluings.size()) +
                              static_cast<int>(s.polygons.size());
    au.genus = (2 - au.euler_characteristic) / 2;
    for (const auto& p : s.polygons) {
        int n = static_cast<int>(p.vertices.size());
        for (int i = 0; i < n; ++i) {
            Vec2d out = to_double(p.edge(i)), in = -to_double(p.edge((i + n - 1) % n));
            au.cone_angle += std::atan2(cross(out, in), dot(out, in));
        }
    }
    return au;
}

// ------------------------------------------------------------ triangulations

template <class T>
void Triangulation<T>::finalize() {
    const int E = num_edges(), F = num_triangles();
    sides_of_edge.assign(E, {std::pair{-1, -1}, std::pair{-1, -1}});
    for (int t = 0; t < F; ++t)
        for (int s = 0; s < 3; ++s) {
            const TriSide& sd = triangles[t][s];
            auto& slot = sides_of_edge.at(sd.edge)[sd.forward ? 0 : 1];
            if (slot.first >= 0) throw DomainError("triangulation: edge side used twice");
            slot = {t, s};
        }
    for (int e = 0; e < E; ++e)
        if (sides_of_edge[e][0].first < 0 || sides_of_edge[e][1].first < 0)
            throw DomainError("triangulation: edge not glued on both sides");

    // Tree-cotree: a breadth-first spanning tree of the dual graph; the
    // remaining edges form a basis of H_1 (one vertex).
    std::vector<bool> seen(F, false), tree(E, false);
    std::vector<int> queue{0};
    seen[0] = true;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        int t = queue[qi];
        for (int s = 0; s < 3; ++s) {
            int e = triangles[t][s].edge;
            int other = triangles[t][s].forward ? sides_of_edge[e][1].first : sides_of_edge[e][0].first;
            if (!seen[other]) {
                seen[other] = true;
                tree[e] = true;
                queue.push_back(other);
            }
        }
    }
    if (static_cast<int>(queue.size()) != F) throw DomainError("triangulation: dual graph disconnected");
    std::vector<int> basis;
    for (int e = 0; e < E; ++e)
        if (!tree[e]) basis.push_back(e);
    if (basis.size() != 4) throw DomainError("triangulation: expected a rank-4 period basis");
    std::copy(basis.begin(), basis.end(), period_basis.begin());

    // Tree edges from the triangle relations, peeling leaves of the dual tree.
    in_basis.assign(E, {0, 0, 0, 0});
    std::vector<bool> solved(E, false);
    for (int j = 0; j < 4; ++j) {
        in_basis[basis[j]][j] = 1;
        solved[basis[j]] = true;
    }
    for (bool progress = true; progress;) {
        progress = false;
        for (int t = 0; t < F; ++t) {
            int unknown = -1, count = 0;
            for (int s = 0; s < 3; ++s)
                if (!solved[triangles[t][s].edge]) ++count, unknown = s;
            if (count != 1) continue;
            std::array<std::int64_t, 4> acc{0, 0, 0, 0};
            for (int s = 0; s < 3; ++s) {
                if (s == unknown) continue;
                int sg = triangles[t][s].forward ? 1 : -1;
                for (int j = 0; j < 4; ++j) acc[j] += sg * in_basis[triangles[t][s].edge][j];
            }
            int su = triangles[t][unknown].forward ? 1 : -1;
            int e = triangles[t][unknown].edge;
            for (int j = 0; j < 4; ++j) in_basis[e][j] = -su * acc[j];
            solved[e] = true;
            progress = true;
        }
    }
    for (int e = 0; e < E; ++e)
        if (!solved[e]) throw DomainError("triangulation: could not express every edge in the basis");
    for (int j = 0; j < 4; ++j) {
        reference_basis[j] = {0, 0, 0, 0};
        reference_basis[j][j] = 1;
        reference_periods[j] = holonomy[basis[j]];
    }
}

template <class T>
std::array<std::int64_t, 4> Triangulation<T>::reference_class(int edge) const {
    std::array<std::int64_t, 4> c{0, 0, 0, 0};
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) c[k] += in_basis[edge][j] * reference_basis[j][k];
    return c;
}

namespace {

template <class T> void check_triangles(const Triangulation<T>& tr) {
    for (int t = 0; t < tr.num_triangles(); ++t) {
        if (scalar::sign(cross(tr.side_vector(t, 0), tr.side_vector(t, 1))) <= 0) {
            std::ostringstream os;
            os << "triangle " << t << " is degenerate or negatively oriented";
            throw DomainError(os.str());
        }
        Vec2<T> sum = tr.side_vector(t, 0) + tr.side_vector(t, 1) + tr.side_vector(t, 2);
        if constexpr (std::is_same_v<T, double>) {
            if (norm(sum) > kFloatTol * (1 + norm(tr.side_vector(t, 0))))
                throw DomainError("triangle sides do not close up");
        } else if (!(sum == Vec2<T>{T(0), T(0)})) {
            throw DomainError("triangle sides do not close up");
        }
    }
}

}  // namespace

template <class T>
Triangulation<T> geodesic_triangulation(const SurfaceH2<T>& s) {
    Triangulation<T> tr;
    // Edge classes: glued pairs first (in gluing order), then diagonals.
    std::map<std::pair<int, int>, TriSide> polygon_side;  // (polygon, edge) -> side
    for (std::size_t i = 0; i < s.gluings.size(); ++i) {
        const auto& [e, f] = s.gluings[i];
        polygon_side[{e.polygon, e.edge}] = {static_cast<int>(i), true};
        polygon_side[{f.polygon, f.edge}] = {static_cast<int>(i), false};
        tr.holonomy.push_back(s.edge_vector(e));
    }
    for (int p = 0; p < static_cast<int>(s.polygons.size()); ++p) {
        const auto& V = s.polygons[p].vertices;
        int n = static_cast<int>(V.size());
        if (n < 3) throw DomainError("degenerate polygon");
        auto side = [&](int i) {
            auto it = polygon_side.find({p, i});
            if (it == polygon_side.end()) throw DomainError("polygon edge without gluing");
            return it->second;
        };
        // Fan from vertex 0: triangles (0, i, i+1).
        TriSide prev_diag{};
        for (int i = 1; i + 1 < n; ++i) {
            std::array<TriSide, 3> tri;
            tri[0] = i == 1 ? side(0) : TriSide{prev_diag.edge, true};
            tri[1] = side(i);
            if (i + 2 == n) {
                tri[2] = side(n - 1);
            } else {
                int d = static_cast<int>(tr.holonomy.size());
                tr.holonomy.push_back(V[i + 1] - V[0]);
                tri[2] = {d, false};
                prev_diag = {d, true};
            }
            tr.triangles.push_back(tri);
        }
    }
    try {
        check_triangles(tr);
    } catch (const DomainError& e) {
        throw DomainError(std::string("degenerate parallelogram: ") + e.what());
    }
    tr.finalize();
    return tr;
}

template <class T>
SurfaceH2<T> surface_from_triangulation(const Triangulation<T>& tr) {
    SurfaceH2<T> s;
    for (int t = 0; t < tr.num_triangles(); ++t) {
        Vec2<T> a{T(0), T(0)};
        Vec2<T> b = tr.side_vector(t, 0);
        Vec2<T> c = b + tr.side_vector(t, 1);
        s.polygons.push_back(Polygon<T>{{a, b, c}});
    }
    for (int e = 0; e < tr.num_edges(); ++e) {
        auto [tf, sf] = tr.sides_of_edge[e][0];
        auto [tb, sb] = tr.sides_of_edge[e][1];
        s.gluings.push_back({{tf, sf}, {tb, sb}});
    }
    return s;
}

template <class T>
Triangulation<T> act(const Mat2<T>& g, const Triangulation<T>& tr) {
    if (scalar::sign(g.det()) <= 0) throw DomainError("act requires det(g) > 0");
    Triangulation<T> out = tr;
    for (auto& h : out.holonomy) h = g * h;
    for (auto& h : out.reference_periods) h = g * h;
    return out;
}

template <class T>
PeriodVectorT<T> periods(const Triangulation<T>& tr) {
    PeriodVectorT<T> p;
    for (int j = 0; j < 4; ++j) p[j] = tr.holonomy[tr.period_basis[j]];
    return p;
}

template <class T>
Triangulation<T> rebuild_triangulation(const Triangulation<T>& tr, const PeriodVectorT<T>& p) {
    Triangulation<T> out = tr;
    for (int e = 0; e < tr.num_edges(); ++e) {
        Vec2<T> h{T(0), T(0)};
        for (int j = 0; j < 4; ++j)
            if (tr.in_basis[e][j] != 0) h = h + scalar::from_int<T>(tr.in_basis[e][j]) * p[j];
        out.holonomy[e] = h;
    }
    for (int j = 0; j < 4; ++j) {
        out.holonomy[tr.period_basis[j]] = p[j];
        out.reference_basis[j] = {0, 0, 0, 0};
        out.reference_basis[j][j] = 1;
        out.reference_periods[j] = p[j];
    }
    check_triangles(out);
    return out;
}

template <class T>
SurfaceH2<T> rebuild_from_periods(const Triangulation<T>& tr, const PeriodVectorT<T>& p) {
    return surface_from_triangulation(rebuild_triangulation(tr, p));
}

#define H2LAB_SURFACE_INSTANTIATE(T)                                                        \
    template SurfaceH2<T> connected_sum(const SplittingTriple<T>&);                         \
    template SurfaceH2<T> act(const Mat2<T>&, const SurfaceH2<T>&);                         \
    template T surface_area(const SurfaceH2<T>&);                                           \
    template SurfaceAudit audit_surface(const SurfaceH2<T>&);                               \
    template struct Triangulation<T>;                                                       \
    template Triangulation<T> geodesic_triangulation(const SurfaceH2<T>&);                  \
    template SurfaceH2<T> surface_from_triangulation(const Triangulation<T>&);              \
    template Triangulation<T> act(const Mat2<T>&, const Triangulation<T>&);                 \
    template PeriodVectorT<T> periods(const Triangulation<T>&);                             \
    template Triangulation<T> rebuild_triangulation(const Triangulation<T>&, const PeriodVectorT<T>&); \
    template SurfaceH2<T> rebuild_from_periods(const Triangulation<T>&, const PeriodVectorT<T>&);

H2LAB_SURFACE_INSTANTIATE(double)
H2LAB_SURFACE_INSTANTIATE(QuadNum)
#undef H2LAB_SURFACE_INSTANTIATE

// ------------------------------------------------------------------ Delaunay

namespace {

struct Quad {
    int t1, s1, t2, s2;
    Vec2d A, B, C, D;  // t1 = (A, B, C), t2 = (B, A, D), both counter-clockwise
};

Quad develop_edge(const Triangulation<double>& tr, int e) {
    Quad q;
    std::tie(q.t1, q.s1) = tr.sides_of_edge[e][0];
    std::tie(q.t2, q.s2) = tr.sides_of_edge[e][1];
    q.A = {0, 0};
    q.B = tr.side_vector(q.t1, q.s1);
    q.C = q.B + tr.side_vector(q.t1, (q.s1 + 1) % 3);
    q.D = q.A + tr.side_vector(q.t2, (q.s2 + 1) % 3);
    return q;
}

// Positive when D lies strictly inside the circumcircle of the counter-clockwise triangle ABC.
double incircle(const Vec2d& A, const Vec2d& B, const Vec2d& C, const Vec2d& D, double* scale) {
    Vec2d a = A - D, b = B - D, c = C - D;
    double la = norm2(a), lb = norm2(b), lc = norm2(c);
    if (scale) *scale = std::max({la, lb, lc}) * std::max({la, lb, lc});
    return la * cross(b, c) - lb * cross(a, c) + lc * cross(a, b);
}

}  // namespace

bool edge_is_delaunay(const Triangulation<double>& tr, int e) {
    Quad q = develop_edge(tr, e);
    double scale;
    double det = incircle(q.A, q.B, q.C, q.D, &scale);
    return det <= 1e-12 * scale;
}

Triangulation<double> delaunay_refine(const Triangulation<double>& input, DelaunayStats* stats, int max_flips) {
    Triangulation<double> tr = input;
    const int E = tr.num_edges();
    const int cap = max_flips >= 0 ? max_flips : 10 * E * E;
    int flips = 0;
    std::vector<std::array<std::int64_t, 4>> ref(E);
    for (int e = 0; e < E; ++e) ref[e] = tr.reference_class(e);
    auto signed_ref = [&](const TriSide& sd) {
        std::array<std::int64_t, 4> c = ref[sd.edge];
        if (!sd.forward)
            for (auto& x : c) x = -x;
        return c;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (int e = 0; e < E; ++e) {
            if (edge_is_delaunay(tr, e)) continue;
            if (++flips > cap) throw DomainError("delaunay_refine: flip limit exceeded (numeric cycling?)");
            Quad q = develop_edge(tr, e);
            TriSide x1 = tr.triangles[q.t1][(q.s1 + 1) % 3], y1 = tr.triangles[q.t1][(q.s1 + 2) % 3];
            TriSide x2 = tr.triangles[q.t2][(q.s2 + 1) % 3], y2 = tr.triangles[q.t2][(q.s2 + 2) % 3];
            // New triangles (C, A, D) and (D, B, C); the edge now runs from C to D.
            tr.holonomy[e] = q.D - q.C;
            std::array<std::int64_t, 4> cy = signed_ref(y1), cx = signed_ref(x2);
            for (int j = 0; j < 4; ++j) ref[e][j] = cy[j] + cx[j];
            tr.triangles[q.t1] = {y1, x2, TriSide{e, false}};
            tr.triangles[q.t2] = {y2, x1, TriSide{e, true}};
            tr.sides_of_edge[e] = {std::pair{q.t2, 2}, std::pair{q.t1, 2}};
            for (int t : {q.t1, q.t2})
                for (int s = 0; s < 3; ++s) {
                    const TriSide& sd = tr.triangles[t][s];
                    tr.sides_of_edge[sd.edge][sd.forward ? 0 : 1] = {t, s};
                }
            if (cross(tr.side_vector(q.t1, 0), tr.side_vector(q.t1, 1)) <= 0 ||
                cross(tr.side_vector(q.t2, 0), tr.side_vector(q.t2, 1)) <= 0)
                throw DomainError("delaunay_refine: flip produced a degenerate triangle");
            changed = true;
        }
    }
    PeriodVector reference = tr.reference_periods;
    tr.finalize();
    for (int j = 0; j < 4; ++j) tr.reference_basis[j] = ref[tr.period_basis[j]];
    tr.reference_periods = reference;
    if (stats) stats->flips = flips;
    return tr;
}

// -------------------------------------------------------- saddle connections

namespace {

struct Tracer {
    const Triangulation<double>& tr;
    double Lmax;
    long long budget;
    std::vector<SaddleConnection>& out;

    using Hom = std::vector<int>;

    // One window still to explore: cross side s of triangle t, which runs from
    // R to L as seen from the cone point at the origin; directions in the open
    // window (lo, hi) are unobstructed so far.
    struct Task {
        int t, s, depth;
        Vec2d R, L, lo, hi;
        Hom HR, HL;
    };

    static bool strictly_left(const Vec2d& a, const Vec2d& b) {
        // b is strictly counter-clockwise from a (within a half-turn)
        return cross(a, b) > 1e-12 * norm(a) * norm(b);
    }

    // Distance from the origin to the part of segment [R, L] seen inside the window.
    static double window_distance(const Vec2d& R, const Vec2d& L, const Vec2d& lo, const Vec2d& hi) {
        Vec2d d = L - R;
        auto hit = [&](const Vec2d& dir, double fallback) {
            double den = cross(dir, d);
            if (std::fabs(den) <= 1e-15 * norm(dir) * norm(d)) return fallback;
            return std::clamp(-cross(dir, R) / den, 0.0, 1.0);
        };
        double s0 = std::max(0.0, hit(lo, 0.0) - 1e-9), s1 = std::min(1.0, hit(hi, 1.0) + 1e-9);
        if (s1 < s0) std::swap(s0, s1);
        double len2 = norm2(d);
        double s = len2 > 0 ? std::clamp(-dot(R, d) / len2, s0, s1) : s0;
        return norm(R + s * d);
    }

    static Vec2d corner0(int s, const Vec2d& P0, const Vec2d& P1, const Vec2d& P2) {
        // P0, P1, P2 are corners s, s+1, s+2
        const Vec2d* pos[3];
        pos[s % 3] = &P0;
        pos[(s + 1) % 3] = &P1;
        pos[(s + 2) % 3] = &P2;
        return *pos[0];
    }

    void record(const Vec2d& V, const Hom& H, int t0, int c0, const std::vector<PathStep>& path) {
        SaddleConnection sc;
        sc.holonomy = V;
        sc.length = norm(V);
        sc.start_triangle = t0;
        sc.start_corner = c0;
        sc.path = path;
        sc.edge_coeffs = H;
        for (int e = 0; e < tr.num_edges(); ++e) {
            if (H[e] == 0) continue;
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k)
                    sc.basis_coeffs[k] += static_cast<std::int64_t>(H[e]) * tr.in_basis[e][j] * tr.reference_basis[j][k];
        }
        out.push_back(std::move(sc));
    }

    void run() {
        const int E = tr.num_edges();
        long long visits = 0;
        std::vector<Task> stack;
        std::vector<PathStep> path;
        for (int t0 = 0; t0 < tr.num_triangles(); ++t0)
            for (int c0 = 0; c0 < 3; ++c0) {
                Vec2d R = tr.side_vector(t0, c0);
                Vec2d L = -tr.side_vector(t0, (c0 + 2) % 3);
                Hom HR(E, 0), HL(E, 0);
                const TriSide& sr = tr.triangles[t0][c0];
                const TriSide& sl = tr.triangles[t0][(c0 + 2) % 3];
                HR[sr.edge] += sr.forward ? 1 : -1;
                HL[sl.edge] -= sl.forward ? 1 : -1;
                path.assign(1, PathStep{t0, -1, corner0(c0, Vec2d{0, 0}, R, L)});
                if (norm(R) <= Lmax) record(R, HR, t0, c0, path);
                stack.push_back({t0, (c0 + 1) % 3, 1, R, L, R, L, HR, HL});
                while (!stack.empty()) {
                    Task k = std::move(stack.back());
                    stack.pop_back();
                    if (window_distance(k.R, k.L, k.lo, k.hi) > Lmax) continue;
                    if (++visits > budget) throw BudgetExceeded("saddle-connection tracing budget exceeded");
                    const TriSide& sd = tr.triangles[k.t][k.s];
                    auto [t2, s2] = tr.sides_of_edge[sd.edge][sd.forward ? 1 : 0];
                    // In t2 side s2 runs from L to R; the third corner V follows R.
                    int sR = (s2 + 1) % 3, sV = (s2 + 2) % 3;
                    const TriSide& next = tr.triangles[t2][sR];
                    Vec2d V = k.R + tr.side_vector(t2, sR);
                    Hom HV = k.HR;
                    HV[next.edge] += next.forward ? 1 : -1;
                    path.resize(k.depth);
                    path.push_back({t2, sd.edge, corner0(s2, k.L, k.R, V)});
                    bool after_lo = strictly_left(k.lo, V), before_hi = strictly_left(V, k.hi);
                    if (after_lo && before_hi) {
                        if (norm(V) <= Lmax) record(V, HV, t0, c0, path);
                        stack.push_back({t2, sV, k.depth + 1, V, k.L, V, k.hi, HV, k.HL});
                        stack.push_back({t2, sR, k.depth + 1, k.R, V, k.lo, V, k.HR, HV});
                    } else if (!after_lo) {
                        stack.push_back({t2, sV, k.depth + 1, V, k.L, k.lo, k.hi, HV, k.HL});
                    } else {
                        stack.push_back({t2, sR, k.depth + 1, k.R, V, k.lo, k.hi, k.HR, HV});
                    }
                }
            }
    }
};

}  // namespace

std::vector<SaddleConnection> enumerate_saddle_connections(const Triangulation<double>& tr, double Lmax,
                                                           const TraceOptions& opt) {
    if (!(Lmax > 0)) throw DomainError("enumerate_saddle_connections requires Lmax > 0");
    std::vector<SaddleConnection> out;
    Tracer tracer{tr, Lmax, opt.max_visits, out};
    tracer.run();
    std::sort(out.begin(), out.end(), [](const SaddleConnection& a, const SaddleConnection& b) {
        if (a.length != b.length) return a.length < b.length;
        return std::atan2(a.holonomy.y, a.holonomy.x) < std::atan2(b.holonomy.y, b.holonomy.x);
    });
    return out;
}

Triangulation<double> tracing_triangulation(const Surface& s) {
    Triangulation<double> tr = geodesic_triangulation(s);
    try {
        return delaunay_refine(tr, nullptr, 1'000'000);
    } catch (const DomainError&) {
        return tr;
    }
}

std::vector<SaddleConnection> enumerate_saddle_connections(const Surface& s, double Lmax, const TraceOptions& opt) {
    return enumerate_saddle_connections(tracing_triangulation(s), Lmax, opt);
}

std::vector<Piece> connection_pieces(const Triangulation<double>& tr, const SaddleConnection& sc) {
    std::vector<Piece> pieces;
    const Vec2d h = sc.holonomy;
    for (const PathStep& st : sc.path) {
        Vec2d P[3];
        P[0] = st.corner0;
        P[1] = P[0] + tr.side_vector(st.triangle, 0);
        P[2] = P[1] + tr.side_vector(st.triangle, 1);
        double lo = 0, hi = 1;
        for (int i = 0; i < 3; ++i) {
            Vec2d e = P[(i + 1) % 3] - P[i];
            // cross(e, tau h - P_i) >= -tol, linear in tau
            double c0 = -cross(e, P[i]), c1 = cross(e, h);
            double tol = 1e-12 * norm(e) * (norm(h) + norm(P[i]));
            if (std::fabs(c1) <= tol) {
                if (c0 < -tol) lo = 1, hi = 0;
                continue;
            }
            double tau = (-tol - c0) / c1;
            if (c1 > 0) lo = std::max(lo, tau);
            else hi = std::min(hi, tau);
        }
        if (lo > hi) continue;
        pieces.push_back({st.triangle, lo * h - st.corner0, hi * h - st.corner0});
    }
    return pieces;
}

namespace {

bool segments_meet_off_corners(const Piece& a, const Piece& b, const Vec2d corners[3]) {
    double scale = std::max({norm(a.p1 - a.p0), norm(b.p1 - b.p0), 1e-300});
    double tol = 1e-9 * scale;
    auto away = [&](const Vec2d& p) {
        for (int i = 0; i < 3; ++i)
            if (norm(p - corners[i]) <= tol) return false;
        return true;
    };
    Vec2d r = a.p1 - a.p0, s = b.p1 - b.p0, w = b.p0 - a.p0;
    double den = cross(r, s);
    if (std::fabs(den) > 1e-12 * norm(r) * norm(s)) {
        double ta = cross(w, s) / den, tb = cross(w, r) / den;
        double ea = tol / norm(r), eb = tol / norm(s);
        if (ta < -ea || ta > 1 + ea || tb < -eb || tb > 1 + eb) return false;
        return away(a.p0 + ta * r);
    }
    // Parallel: they meet only if collinear and overlapping.
    if (std::fabs(cross(r, w)) > tol * norm(r)) return false;
    double rr = norm2(r);
    double t0 = dot(w, r) / rr, t1 = dot(w + s, r) / rr;
    double lo = std::max(0.0, std::min(t0, t1)), hi = std::min(1.0, std::max(t0, t1));
    if (hi < lo - tol / norm(r)) return false;
    for (double t : {lo, hi, (lo + hi) / 2})
        if (away(a.p0 + t * r)) return true;
    return false;
}

}  // namespace

bool connections_intersect(const std::vector<Piece>& a, const std::vector<Piece>& b,
                           const Triangulation<double>& tr) {
    for (const Piece& pa : a)
        for (const Piece& pb : b) {
            if (pa.triangle != pb.triangle) continue;
            Vec2d corners[3];
            corners[0] = {0, 0};
            corners[1] = tr.side_vector(pa.triangle, 0);
            corners[2] = corners[1] + tr.side_vector(pa.triangle, 1);
            if (segments_meet_off_corners(pa, pb, corners)) return true;
        }
    return false;
}

double systole_surface(const Triangulation<double>& tr) {
    double Lmax = std::numeric_limits<double>::infinity();
    for (const auto& h : tr.holonomy) Lmax = std::min(Lmax, norm(h));
    auto sc = enumerate_saddle_connections(tr, Lmax * (1 + 1e-12));
    if (sc.empty()) throw DomainError("systole: no saddle connection found up to the shortest edge");
    return sc.front().length;
}

double systole_surface(const Surface& s) { return systole_surface(tracing_triangulation(s)); }

Vec2d evaluate_cocycle(const PeriodVector& c, const std::array<std::int64_t, 4>& cls) {
    Vec2d v{0, 0};
    for (int j = 0; j < 4; ++j) v = v + static_cast<double>(cls[j]) * c[j];
    return v;
}

double agy_over_classes(const PeriodVector& x, const PeriodVector& c,
                        const std::vector<std::array<std::int64_t, 4>>& classes) {
    double best = 0;
    for (const auto& cls : classes) {
        double denom = norm(evaluate_cocycle(x, cls));
        if (denom == 0) throw DomainError("agy norm: class with zero holonomy");
        best = std::max(best, norm(evaluate_cocycle(c, cls)) / denom);
    }
    return best;
}

AgyEstimate agy_norm_trunc(const Surface& s, const PeriodVector& c, double Lmax) {
    Triangulation<double> tr = tracing_triangulation(s);
    auto sc = enumerate_saddle_connections(tr, Lmax);
    if (sc.empty()) throw DomainError("agy_norm_trunc: Lmax is below the systole");
    std::vector<std::array<std::int64_t, 4>> classes;
    for (const auto& x : sc) classes.push_back(x.basis_coeffs);
    return {agy_over_classes(tr.reference_periods, c, classes), Lmax, sc.size()};
}

double default_agy_cutoff(const Surface& s) { return std::max(10.0, 4.0 / systole_surface(s)); }

PeriodVector act_periods(const Mat2d& g, const PeriodVector& p) {
    PeriodVector out;
    for (int j = 0; j < 4; ++j) out[j] = g * p[j];
    return out;
}

}  // namespace h2lab
