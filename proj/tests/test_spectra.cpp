#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "h2lab/prototypes.hpp"
#include "h2lab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

using namespace h2lab;

namespace {

Graph make_graph(int n, const std::vector<std::pair<int, int>>& e) {
    Graph g;
    g.n = n;
    for (auto [u, v] : e) g.edges.push_back({u, v, -1});
    return g;
}

Graph cycle(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    return make_graph(n, e);
}

Graph complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.push_back({i, j});
    return make_graph(n, e);
}

// Plain bitmask enumeration of all bipartitions.
Rational brute_cheeger(const Graph& g) {
    std::optional<Rational> best;
    for (unsigned mask = 1; mask + 1 < (1u << g.n); ++mask) {
        long long cut = 0;
        for (const auto& e : g.edges) cut += ((mask >> e.u) & 1) != ((mask >> e.v) & 1);
        int a = __builtin_popcount(mask);
        Rational r(cut, std::min(a, g.n - a));
        if (!best || r < *best) best = r;
    }
    return *best;
}

Graph random_connected(std::mt19937_64& rng, int n) {
    for (;;) {
        std::uniform_int_distribution<int> V(0, n - 1);
        std::vector<std::pair<int, int>> e;
        for (int i = 1; i < n; ++i) e.push_back({i, std::uniform_int_distribution<int>(0, i - 1)(rng)});  // spanning tree
        int extra = std::uniform_int_distribution<int>(0, 2 * n)(rng);
        for (int k = 0; k < extra; ++k) e.push_back({V(rng), V(rng)});
        Graph g = make_graph(n, e);
        if (g.connected()) return g;
    }
}

// ---- characteristic-polynomial oracle (exact, Faddeev-LeVerrier + Sturm)

using Poly = std::vector<Rational>;  // coefficients, lowest degree first

Poly charpoly(const std::vector<std::vector<Rational>>& A) {
    int n = static_cast<int>(A.size());
    std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n)), AM(n, std::vector<Rational>(n));
    Poly c(n + 1);
    c[n] = 1;
    for (int k = 1; k <= n; ++k) {
        // M_k = A M_{k-1} + c_{n-k+1} I, with M_0 = 0
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Rational s = 0;
                for (int l = 0; l < n; ++l) s += A[i][l] * M[l][j];
                AM[i][j] = s + (i == j ? c[n - k + 1] : Rational(0));
            }
        M = AM;
        Rational tr = 0;
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) tr += A[i][l] * M[l][i];
        c[n - k] = -tr / Rational(k);
    }
    return c;
}

void trim(Poly& p) {
    while (p.size() > 1 && p.back().is_zero()) p.pop_back();
}

Poly poly_rem(Poly a, const Poly& b) {
    trim(a);
    while (a.size() >= b.size() && !(a.size() == 1 && a[0].is_zero())) {
        Rational f = a.back() / b.back();
        std::size_t shift = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] -= f * b[i];
        a.pop_back();
        if (a.empty()) return Poly{Rational(0)};
        trim(a);
    }
    return a;
}

Rational eval(const Poly& p, const Rational& x) {
    Rational r = 0;
    for (std::size_t i = p.size(); i-- > 0;) r = r * x + p[i];
    return r;
}

Poly derivative(const Poly& p) {
    Poly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * Rational(static_cast<long long>(i)));
    if (d.empty()) d.push_back(0);
    return d;
}

int sign_changes(const std::vector<Poly>& seq, const Rational& x) {
    int changes = 0, last = 0;
    for (const auto& p : seq) {
        int s = eval(p, x).sign();
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

// Largest real root of p strictly below `below`, to within tol, by Sturm bisection.
double largest_root_below(const Poly& p, double lo, double below, double tol) {
    std::vector<Poly> seq{p, derivative(p)};
    while (seq.back().size() > 1 || !seq.back()[0].is_zero()) {
        Poly r = poly_rem(seq[seq.size() - 2], seq.back());
        for (auto& x : r) x = -x;
        if (r.size() == 1 && r[0].is_zero()) break;
        seq.push_back(r);
    }
    Rational L = Rational::from_double(lo), H = Rational::from_double(below);
    // count of distinct roots in (L, H]
    auto count = [&](const Rational& a, const Rational& b) { return sign_changes(seq, a) - sign_changes(seq, b); };
    REQUIRE(count(L, H) > 0);
    while ((H - L).to_double() > tol) {
        Rational mid = (L + H) / Rational(2);
        if (count(mid, H) > 0) L = mid;
        else H = mid;
    }
    return ((L + H) / Rational(2)).to_double();
}

// lambda1 of a 4-regular multigraph from exact char-poly roots of A.
double oracle_gap(const Graph& g) {
    std::vector<std::vector<Rational>> A(g.n, std::vector<Rational>(g.n, Rational(0)));
    for (const auto& e : g.edges) {
        A[e.u][e.v] += 1;
        A[e.v][e.u] += 1;
    }
    Poly p = charpoly(A);
    // second largest distinct eigenvalue of A: largest root below 4 (4 is simple)
    double mu = largest_root_below(p, -4.5, 4.0 - 1e-12, 1e-12);
    return 1.0 - mu / 4.0;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Orbit size by brute-force isomorphism testing (all n! relabelings).
int brute_orbit_size(const Origami& o) {
    const int n = o.squares();
    auto iso = [&](const Origami& a, const Origami& b) {
        std::vector<int> p(n);
        std::iota(p.begin(), p.end(), 0);
        do {
            bool ok = true;
            for (int x = 0; x < n && ok; ++x) ok = p[a.h[x]] == b.h[p[x]] && p[a.v[x]] == b.v[p[x]];
            if (ok) return true;
        } while (std::next_permutation(p.begin(), p.end()));
        return false;
    };
    std::vector<Origami> seen{o};
    for (std::size_t i = 0; i < seen.size(); ++i)
        for (const Origami& img : {act_T(seen[i]), act_L(seen[i])}) {
            bool found = false;
            for (const auto& s : seen)
                if (iso(s, img)) {
                    found = true;
                    break;
                }
            if (!found) seen.push_back(img);
        }
    return static_cast<int>(seen.size());
}

}  // namespace

TEST_CASE("gamma0 coset tables") {
    CosetTable t1 = gamma0_cosets(1);
    CHECK(t1.size() == 1);
    CosetTable t2 = gamma0_cosets(2);
    REQUIRE(t2.size() == 3);
    using P = std::pair<long long, long long>;
    CHECK(t2.points == std::vector<P>{{0, 1}, {1, 0}, {1, 1}});
    CHECK(t2.T == Perm{0, 2, 1});  // fixes (0:1), swaps (1:0), (1:1)
    CHECK(t2.L == Perm{2, 1, 0});  // fixes (1:0), swaps (0:1), (1:1)
    for (long long m = 1; m <= 100; ++m) {
        CosetTable t = gamma0_cosets(m);
        CHECK(t.size() == gamma0_index(m));
        std::set<int> ti(t.T.begin(), t.T.end()), li(t.L.begin(), t.L.end());
        CHECK(static_cast<int>(ti.size()) == t.size());
        CHECK(static_cast<int>(li.size()) == t.size());
        CHECK(schreier_graph(t).connected());
    }
    CHECK_THROWS_AS(gamma0_cosets(0), DomainError);
}

TEST_CASE("Schreier graphs are connected and 4-regular") {
    Graph g1 = schreier_graph(gamma0_cosets(1));
    CHECK(g1.n == 1);
    CHECK(g1.edges.size() == 2);
    CHECK(g1.degrees() == std::vector<int>{4});
    Graph g2 = schreier_graph(gamma0_cosets(2));
    CHECK(g2.n == 3);
    CHECK(g2.connected());
    for (long long m = 1; m <= 60; ++m) {
        Graph g = schreier_graph(gamma0_cosets(m));
        CHECK(g.n == gamma0_index(m));
        for (int d : g.degrees()) CHECK(d == 4);
    }
    std::ostringstream os;
    write_adjacency(os, g2);
    CHECK(os.str() == "n 3\n0: 0 0 2 2\n1: 1 1 2 2\n2: 0 0 1 1\n");
    CHECK_THROWS_AS(schreier_graph(std::vector<Perm>{{0, 1}, {0, 1}}), std::logic_error);
}

TEST_CASE("exact Cheeger constant") {
    CHECK(cheeger_exact(make_graph(2, {{0, 1}})) == Rational(1));
    CHECK(cheeger_exact(cycle(4)) == Rational(1));
    CHECK(cheeger_exact(complete(4)) == Rational(2));
    std::mt19937_64 rng(3);
    for (int it = 0; it < 200; ++it) {
        Graph g = random_connected(rng, 2 + it % 11);
        CHECK(cheeger_exact(g) == brute_cheeger(g));
        CHECK(cheeger_exact(g) >= Rational(1, g.n));
    }
    CHECK_THROWS_AS(cheeger_exact(cycle(23)), DomainError);
}

TEST_CASE("Cheeger bounds bracket the exact value") {
    CheegerBounds k2 = cheeger_bound(make_graph(2, {{0, 1}}));
    CHECK(k2.lower <= 1.0 + 1e-12);
    CHECK(k2.upper >= 1.0 - 1e-12);
    std::mt19937_64 rng(5);
    for (int it = 0; it < 300; ++it) {
        Graph g = random_connected(rng, 2 + it % 11);
        CheegerBounds b = cheeger_bound(g);
        double h = cheeger_exact(g).to_double();
        CHECK(b.lower <= h + 1e-9);
        CHECK(h <= b.upper + 1e-12);
        CHECK(b.lower <= b.upper + 1e-12);
        CHECK(b.lambda1 <= 2 * h + 1e-9);
    }
}

TEST_CASE("spectral gap") {
    CHECK(spectral_gap(make_graph(2, {{0, 1}})) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(spectral_gap(cycle(4)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_gap(schreier_graph(gamma0_cosets(2))) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(spectral_gap(schreier_graph(gamma0_cosets(1))), DomainError);
    // 4-regular graphs with <= 8 vertices against exact characteristic-polynomial roots
    std::mt19937_64 rng(9);
    int checked = 0;
    for (int it = 0; it < 400 && checked < 80; ++it) {
        int n = 2 + it % 7;
        Perm a(n), b(n);
        std::iota(a.begin(), a.end(), 0);
        std::iota(b.begin(), b.end(), 0);
        std::shuffle(a.begin(), a.end(), rng);
        std::shuffle(b.begin(), b.end(), rng);
        Graph g;
        g.n = n;
        for (int x = 0; x < n; ++x) g.edges.push_back({x, a[x], 0}), g.edges.push_back({x, b[x], 1});
        if (!g.connected()) continue;
        CHECK(std::abs(spectral_gap(g) - oracle_gap(g)) < 1e-8);
        ++checked;
    }
    for (long long m = 2; m <= 7; ++m) {
        Graph g = schreier_graph(gamma0_cosets(m));
        if (g.n <= 8) CHECK(std::abs(spectral_gap(g) - oracle_gap(g)) < 1e-8);
    }
    CHECK(checked >= 80);
}

TEST_CASE("iterative solver above the dense threshold") {
    // torus grid C_a x C_b: normalized adjacency spectrum (cos(2 pi j/a) + cos(2 pi k/b)) / 2
    const int a = 50, b = 48;
    Graph g;
    g.n = a * b;
    for (int x = 0; x < a; ++x)
        for (int y = 0; y < b; ++y) {
            g.edges.push_back({x * b + y, ((x + 1) % a) * b + y, 0});
            g.edges.push_back({x * b + y, x * b + (y + 1) % b, 1});
        }
    REQUIRE(g.n >= 2000);
    const double pi = std::acos(-1.0);
    double expected = 1.0 - (std::cos(2 * pi / a) + 1.0) / 2.0;
    CHECK(std::abs(spectral_gap(g) - expected) < 1e-8);
    // cycle C_n: 1 - cos(2 pi / n)
    Graph c = cycle(2100);
    CHECK(std::abs(spectral_gap(c) - (1.0 - std::cos(2 * pi / 2100))) < 1e-8);
    // a Gamma0 graph above the threshold: relabeling leaves the gap unchanged
    Graph h = schreier_graph(gamma0_cosets(2003));  // prime: index 2004
    REQUIRE(h.n == 2004);
    double gap = spectral_gap(h);
    CheegerBounds bnd = cheeger_bound(h);
    CHECK(bnd.lambda1 == gap);
    CHECK(gap <= 2 * bnd.upper);
    Graph r = h;
    std::vector<int> p(h.n);
    std::iota(p.begin(), p.end(), 0);
    std::mt19937_64 rng(1);
    std::shuffle(p.begin(), p.end(), rng);
    for (auto& e : r.edges) e.u = p[e.u], e.v = p[e.v];
    CHECK(std::abs(spectral_gap(r) - gap) < 1e-8);
}

TEST_CASE("L-shaped origamis") {
    Origami o = lshape_origami(4);
    // 1-based (1 2 3)(4) and (1 4)(2)(3)
    CHECK(o.h == Perm{1, 2, 0, 3});
    CHECK(o.v == Perm{3, 1, 2, 0});
    for (long long d = 4; d <= 30; d += 2) {
        Origami l = lshape_origami(d);
        CHECK(l.squares() == d);
        CHECK(is_transitive(l));
        CHECK(origami_genus(l) == 2);
    }
    CHECK_THROWS_AS(lshape_origami(5), DomainError);
    CHECK_FALSE(canonical_form(o) == canonical_form(Origami{Perm{1, 2, 3, 0}, Perm{0, 1, 2, 3}}));  // a 4-cycle torus
    // relabeling invariance
    Perm p{2, 0, 3, 1};
    Origami r;
    r.h.resize(4);
    r.v.resize(4);
    for (int x = 0; x < 4; ++x) r.h[p[x]] = p[o.h[x]], r.v[p[x]] = p[o.v[x]];
    CHECK(canonical_form(r) == canonical_form(o));
}

TEST_CASE("origami orbits") {
    for (long long d = 4; d <= 6; d += 2) {
        OrigamiOrbit orb = origami_orbit(lshape_origami(d));
        CHECK(static_cast<int>(orb.members.size()) == brute_orbit_size(lshape_origami(d)));
        for (int deg : orb.graph.degrees()) CHECK(deg == 4);
        for (const auto& m : orb.members) {
            CHECK(m.squares() == d);
            CHECK(origami_genus(m) == 2);
        }
    }
    OrigamiOrbit o4 = origami_orbit(lshape_origami(4));
    CHECK(o4.members.size() == 9);  // golden
    // the orbit is closed under S as well (T and L generate SL2(Z))
    std::set<Origami> members(o4.members.begin(), o4.members.end());
    for (const auto& m : o4.members) CHECK(members.count(canonical_form(act_S(m))) == 1);
    for (long long d = 4; d <= 12; d += 2)
        CHECK(Rational(static_cast<long long>(origami_orbit(lshape_origami(d)).members.size())) == veech_index(d));
    CHECK_THROWS_AS(origami_orbit(lshape_origami(12), 100), BudgetExceeded);
}

TEST_CASE("expansion probe") {
    std::vector<long long> ds;
    for (long long d = 4; d <= 30; d += 2) ds.push_back(d);
    auto rows = expansion_probe(ds, false, 1);
    REQUIRE(rows.size() == ds.size());
    CHECK(rows[0].index == 6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].d == ds[i]);
        CHECK(rows[i].h_lower <= rows[i].h_upper);
        CHECK(rows[i].lambda1 <= 2 * rows[i].h_upper);
        if (rows[i].exact_h) CHECK(rows[i].h_exact >= Rational(1, rows[i].index));
    }
    std::string csv = expansion_csv(rows);
    CHECK(csv == expansion_csv(expansion_probe(ds, false, 4)));
    CHECK(csv == read_file(std::string(H2LAB_GOLDEN_DIR) + "/expansion_gamma0.csv"));
    auto both = expansion_probe({4, 6}, true, 2);
    REQUIRE(both.size() == 4);
    CHECK(both[1].model == "origami");
    CHECK(both[1].index == 9);
    CHECK_THROWS_AS(expansion_probe({5}), DomainError);
}
