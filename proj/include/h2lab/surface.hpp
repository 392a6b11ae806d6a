#pragma once
/*
 * Genus-2 translation surfaces with a single cone point of angle 6 pi,
 * assembled from connected-sum data.
 *
 * A SurfaceH2 is a list of convex polygons (absolute vertex coordinates,
 * counter-clockwise) plus a pairing of their edges by translation.  Every
 * polygon vertex is the cone point.  A Triangulation is the same surface cut
 * into 6 triangles with 9 edge classes; it carries a basis of 4 edges for
 * H_1 (one vertex, so relative and absolute homology agree) together with
 * the integer coordinates of every edge in that basis.
 */
#include "h2lab/splitting.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace h2lab {

template <class T>
struct Polygon {
    std::vector<Vec2<T>> vertices;  ///< counter-clockwise; edge i runs from vertex i to vertex i+1
    Vec2<T> edge(int i) const {
        int n = static_cast<int>(vertices.size());
        return vertices[(i + 1) % n] - vertices[i];
    }
};

struct EdgeRef {
    int polygon = 0;
    int edge = 0;
    friend bool operator==(const EdgeRef& a, const EdgeRef& b) { return a.polygon == b.polygon && a.edge == b.edge; }
};

template <class T>
struct SurfaceH2 {
    std::vector<Polygon<T>> polygons;
    std::vector<std::pair<EdgeRef, EdgeRef>> gluings;  ///< glued edges have opposite edge vectors

    Vec2<T> edge_vector(const EdgeRef& r) const { return polygons[r.polygon].edge(r.edge); }
};

using Surface = SurfaceH2<double>;

template <class T> SurfaceH2<double> to_double(const SurfaceH2<T>& s) {
    SurfaceH2<double> out;
    out.gluings = s.gluings;
    for (const auto& p : s.polygons) {
        Polygon<double> q;
        for (const auto& v : p.vertices) q.vertices.push_back(to_double(v));
        out.polygons.push_back(q);
    }
    return out;
}

/// The connected sum of a valid splitting.  If v is parallel to a vector of
/// the lattice it does not belong to, the result is three parallelograms
/// P1 = v x b2, P2 = v x b1, P3 = (a1 - v) x b1; otherwise it is the slit
/// torus cut into four triangles around the slit plus the cylinder v x b2.
template <class T> SurfaceH2<T> connected_sum(const SplittingTriple<T>& t);

template <class T> SurfaceH2<T> act(const Mat2<T>& g, const SurfaceH2<T>& s);

template <class T> T surface_area(const SurfaceH2<T>& s);

struct SurfaceAudit {
    int vertex_classes = 0;
    int euler_characteristic = 0;
    int genus = 0;
    double cone_angle = 0;       ///< total angle around the cone point(s)
    bool gluings_consistent = false;  ///< every edge glued once, to an opposite vector
};

template <class T> SurfaceAudit audit_surface(const SurfaceH2<T>& s);

// ------------------------------------------------------------ triangulations

struct TriSide {
    int edge = 0;
    bool forward = true;  ///< the side runs along the edge's holonomy (not its negative)
};

using PeriodVector = std::array<Vec2d, 4>;
template <class T> using PeriodVectorT = std::array<Vec2<T>, 4>;

template <class T>
struct Triangulation {
    std::vector<std::array<TriSide, 3>> triangles;  ///< side i runs from corner i to corner i+1
    std::vector<Vec2<T>> holonomy;                  ///< per edge class
    std::array<int, 4> period_basis{};
    std::vector<std::array<std::int64_t, 4>> in_basis;  ///< integer coordinates of each edge in the basis
    /// For each edge: {triangle, side} of its forward side and of its backward side.
    std::vector<std::array<std::pair<int, int>, 2>> sides_of_edge;
    /// Row j: the class of period-basis edge j in a reference basis.  The
    /// reference is the triangulation's own basis unless it was obtained by
    /// edge flips, in which case it is the basis of the flipped-from
    /// triangulation (so homology classes stay comparable).
    std::array<std::array<std::int64_t, 4>, 4> reference_basis{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
    PeriodVectorT<T> reference_periods{};  ///< holonomies of the reference classes

    int num_edges() const { return static_cast<int>(holonomy.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    Vec2<T> side_vector(int t, int s) const {
        const TriSide& sd = triangles[t][s];
        return sd.forward ? holonomy[sd.edge] : -holonomy[sd.edge];
    }
    /// Recomputes sides_of_edge, the period basis and in_basis from the
    /// combinatorics, and resets the reference to the new basis.
    void finalize();
    /// Class of an edge in the reference basis.
    std::array<std::int64_t, 4> reference_class(int edge) const;
};

template <class T> Triangulation<double> to_double(const Triangulation<T>& tr) {
    Triangulation<double> out;
    out.triangles = tr.triangles;
    for (const auto& h : tr.holonomy) out.holonomy.push_back(to_double(h));
    out.period_basis = tr.period_basis;
    out.in_basis = tr.in_basis;
    out.sides_of_edge = tr.sides_of_edge;
    out.reference_basis = tr.reference_basis;
    for (int j = 0; j < 4; ++j) out.reference_periods[j] = to_double(tr.reference_periods[j]);
    return out;
}

/// Splits every polygon along diagonals from its first vertex.
template <class T> Triangulation<T> geodesic_triangulation(const SurfaceH2<T>& s);
/// The triangles as a polygonal surface (inverse of geodesic_triangulation).
template <class T> SurfaceH2<T> surface_from_triangulation(const Triangulation<T>& tr);
template <class T> Triangulation<T> act(const Mat2<T>& g, const Triangulation<T>& tr);

template <class T> PeriodVectorT<T> periods(const Triangulation<T>& tr);
/// Same combinatorics, holonomies recomputed from new periods; throws naming
/// the first triangle that becomes degenerate or negatively oriented.
template <class T> Triangulation<T> rebuild_triangulation(const Triangulation<T>& tr, const PeriodVectorT<T>& p);
template <class T> SurfaceH2<T> rebuild_from_periods(const Triangulation<T>& tr, const PeriodVectorT<T>& p);

struct DelaunayStats {
    int flips = 0;
};

/// Edge flips until every edge satisfies the empty-circumdisk condition.
/// The result keeps the input's reference basis.  Throws after max_flips
/// flips (default 10 E^2).  Strongly sheared triangulations legitimately need
/// more (the flip sequence follows a subtractive Euclidean algorithm).
Triangulation<double> delaunay_refine(const Triangulation<double>& tr, DelaunayStats* stats = nullptr,
                                      int max_flips = -1);
/// Whether the edge violates the empty-circumdisk condition (tolerance 1e-12 relative).
bool edge_is_delaunay(const Triangulation<double>& tr, int edge);

// ------------------------------------------------------- saddle connections

struct PathStep {
    int triangle = 0;
    int entered_through = -1;  ///< edge class crossed to enter this triangle (-1 for the first)
    Vec2d corner0;             ///< developed position of the triangle's corner 0 (start point at 0)
};

struct SaddleConnection {
    Vec2d holonomy;
    double length = 0;
    int start_triangle = 0, start_corner = 0;
    std::vector<PathStep> path;                 ///< triangles traversed, in order
    std::vector<int> edge_coeffs;               ///< homology class as a combination of edge classes
    std::array<std::int64_t, 4> basis_coeffs{};  ///< homology class in the reference basis
};

struct TraceOptions {
    long long max_visits = 50'000'000;  ///< tracing budget (triangle visits)
};

/// All saddle connections of length <= Lmax, sorted by length then angle.
/// Each oriented connection appears once, so the list is closed under
/// reversal.  Throws BudgetExceeded instead of truncating.  The Surface
/// overload traces on the Delaunay refinement of geodesic_triangulation(s)
/// (falling back to the unrefined one if refinement fails); classes are in
/// the period basis of geodesic_triangulation(s) and paths refer to the
/// triangulation returned by tracing_triangulation(s).
std::vector<SaddleConnection> enumerate_saddle_connections(const Triangulation<double>& tr, double Lmax,
                                                           const TraceOptions& opt = {});
std::vector<SaddleConnection> enumerate_saddle_connections(const Surface& s, double Lmax,
                                                           const TraceOptions& opt = {});
Triangulation<double> tracing_triangulation(const Surface& s);

/// Straight pieces of a connection inside each triangle, in the triangle's
/// local frame (corner 0 at the origin).
struct Piece {
    int triangle = 0;
    Vec2d p0, p1;
};
std::vector<Piece> connection_pieces(const Triangulation<double>& tr, const SaddleConnection& sc);
/// Whether two connections meet at a point other than the cone point.
bool connections_intersect(const std::vector<Piece>& a, const std::vector<Piece>& b,
                           const Triangulation<double>& tr);

double systole_surface(const Surface& s);
double systole_surface(const Triangulation<double>& tr);

/// Value of a cocycle (given on the period basis) on a homology class.
Vec2d evaluate_cocycle(const PeriodVector& c, const std::array<std::int64_t, 4>& cls);

struct AgyEstimate {
    double value = 0;
    double Lmax = 0;
    std::size_t connections = 0;
};

/// max over connections of length <= Lmax of |c(gamma)| / |x(gamma)|.
AgyEstimate agy_norm_trunc(const Surface& s, const PeriodVector& c, double Lmax);
/// Same supremum over a fixed list of homology classes, with x given by its periods.
double agy_over_classes(const PeriodVector& x, const PeriodVector& c,
                        const std::vector<std::array<std::int64_t, 4>>& classes);
/// Default cutoff max(10, 4 / systole).
double default_agy_cutoff(const Surface& s);

PeriodVector act_periods(const Mat2d& g, const PeriodVector& p);

/// (L1, L2) each rescaled to area 1.
template <class T> Pair absolute_periods(const SplittingTriple<T>& t) {
    return normalize_pair(Pair{to_double(t.lambda1), to_double(t.lambda2)});
}

}  // namespace h2lab
