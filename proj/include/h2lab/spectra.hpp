#pragma once
/*
 * Coset tables of Gamma0(m), Schreier graphs, square-tiled (origami) orbits,
 * Cheeger constants and spectral gaps.
 *
 * Generators S = {T, L} with T = [[1,1],[0,1]] and L = [[1,0],[1,1]].
 * Graph convention: every generator contributes one undirected edge
 * {x, g(x)} at every vertex x.  A fixed point gives a loop, which counts 2
 * toward the degree, so Schreier graphs are 4-regular.  Laplacians are the
 * normalized I - D^{-1/2} A D^{-1/2} with A[x][x] = 2 per loop.
 */
#include "h2lab/exactnum.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace h2lab {

using Perm = std::vector<int>;

struct CosetTable {
    long long m = 1;
    std::vector<std::pair<long long, long long>> points;  ///< canonical (c : d) in P^1(Z/m), sorted
    Perm T, L;  ///< action of the generators on point indices
    int size() const { return static_cast<int>(points.size()); }
};

/// Gamma0(m) \ SL2(Z) as the bottom-row action on P^1(Z/m):
/// T: (c : d) -> (c : c + d),  L: (c : d) -> (c + d : d).
CosetTable gamma0_cosets(long long m);

struct GraphEdge {
    int u = 0, v = 0;
    int label = -1;  ///< generator index (0 = T, 1 = L) or -1
};

struct Graph {
    int n = 0;
    std::vector<GraphEdge> edges;  ///< undirected, with multiplicity; u == v is a loop
    std::vector<int> degrees() const;  ///< loops count 2
    bool connected() const;
};
using SchreierGraph = Graph;

/// One edge {x, g(x)} per vertex and generator.  Throws std::logic_error if
/// the result is disconnected.
Graph schreier_graph(const std::vector<Perm>& generators);
Graph schreier_graph(const CosetTable& table);

/// Plain adjacency-list text: a header "n <vertices>" then one line per
/// vertex "<v>: <neighbour> ..." (a loop lists the vertex twice).
void write_adjacency(std::ostream& os, const Graph& g);

/// Exact min over bipartitions of |E(A, B)| / min(|A|, |B|); requires 2 <= n <= 22.
Rational cheeger_exact(const Graph& g);

struct CheegerBounds {
    double lower = 0;  ///< d_min * lambda1 / 2 (the easy Cheeger direction)
    double upper = 0;  ///< value of the best sweep cut of the Fiedler vector
    double lambda1 = 0;
};
CheegerBounds cheeger_bound(const Graph& g);

/// Smallest nonzero eigenvalue of the normalized Laplacian (dense below
/// 2000 vertices, Lanczos above).  Requires a connected graph with n >= 2.
double spectral_gap(const Graph& g);

// ----------------------------------------------------------------- origamis

/// Squares 0..n-1; h[i] is the square right of i, v[i] the square above i.
struct Origami {
    Perm h, v;
    int squares() const { return static_cast<int>(h.size()); }
    friend bool operator==(const Origami&, const Origami&) = default;
    friend auto operator<=>(const Origami&, const Origami&) = default;
};

/// The L-shaped table P(1 + d/2, d/2) tiled by d unit squares: the bottom
/// row holds squares 0..d/2 left to right, the column above square 0 holds
/// d/2+1..d-1 bottom to top.  For d = 4 (1-based): h = (1 2 3)(4), v = (1 4)(2)(3).
Origami lshape_origami(long long d);

bool is_transitive(const Origami& o);
/// Genus from the commutator: 2 - 2g = #cycles([h, v]) - n.
int origami_genus(const Origami& o);
/// Lexicographically least relabeling (canonical under simultaneous conjugation).
Origami canonical_form(const Origami& o);

/// T: (h, v) -> (h, v h^{-1}),  L: (h, v) -> (h v^{-1}, v),  S: (h, v) -> (v^{-1}, h),
/// products composed as functions (p q)(x) = p(q(x)).
Origami act_T(const Origami& o);
Origami act_L(const Origami& o);
Origami act_S(const Origami& o);

struct OrigamiOrbit {
    std::vector<Origami> members;  ///< canonical forms in BFS order from the input
    Graph graph;                   ///< Schreier graph of {T, L} on the members
};
/// Throws BudgetExceeded beyond max_size members.
OrigamiOrbit origami_orbit(const Origami& o, int max_size = 200000);

// -------------------------------------------------------- expansion probe

struct ExpansionRow {
    long long d = 0, D = 0;
    std::string model;  ///< "gamma0" or "origami"
    long long index = 0;
    double h_lower = 0, h_upper = 0, lambda1 = 0, lambda1_D6 = 0;
    bool exact_h = false;  ///< h was also computed exhaustively (|V| <= 22)
    Rational h_exact;
};

/// One row per even d >= 4 (Gamma0(D/4) model, plus the origami orbit if
/// requested).  Checks h >= 1/|V|, h_lower <= h <= h_upper and
/// lambda1 <= 2 h_upper on every row; throws std::logic_error otherwise.
std::vector<ExpansionRow> expansion_probe(const std::vector<long long>& d_list, bool with_origami = false,
                                          int workers = 1);
/// CSV with header d,D,model,index,h_lower,h_upper,lambda1,lambda1_D6.
std::string expansion_csv(const std::vector<ExpansionRow>& rows);

}  // namespace h2lab
