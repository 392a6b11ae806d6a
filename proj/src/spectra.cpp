#include "h2lab/spectra.hpp"

#include "h2lab/prototypes.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <thread>

namespace h2lab {

// ------------------------------------------------------------ coset tables

CosetTable gamma0_cosets(long long m) {
    if (m < 1) throw DomainError("gamma0_cosets requires m >= 1");
    std::vector<long long> units;
    for (long long u = 0; u < m; ++u)
        if (std::gcd(u, m) == 1) units.push_back(u);
    if (m == 1) units = {0};
    // Each unit orbit of admissible pairs is one point; its least pair is the
    // canonical representative.  Scanning pairs in increasing order visits
    // every orbit first at that representative.
    std::vector<int> id(static_cast<std::size_t>(m * m), -1);
    CosetTable t;
    t.m = m;
    for (long long c = 0; c < m; ++c)
        for (long long d = 0; d < m; ++d) {
            if (id[c * m + d] >= 0 || std::gcd(std::gcd(c, d), m) != 1) continue;
            int k = static_cast<int>(t.points.size());
            t.points.push_back({c, d});
            for (long long u : units) id[(u * c % m) * m + u * d % m] = k;
        }
    t.T.resize(t.points.size());
    t.L.resize(t.points.size());
    for (std::size_t i = 0; i < t.points.size(); ++i) {
        auto [c, d] = t.points[i];
        t.T[i] = id[c * m + (c + d) % m];
        t.L[i] = id[((c + d) % m) * m + d];
    }
    return t;
}

// ------------------------------------------------------------------ graphs

std::vector<int> Graph::degrees() const {
    std::vector<int> deg(n, 0);
    for (const auto& e : edges) {
        ++deg[e.u];
        ++deg[e.v];
    }
    return deg;
}

bool Graph::connected() const {
    if (n == 0) return false;
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y : adj[x])
            if (!seen[y]) {
                seen[y] = 1;
                ++count;
                stack.push_back(y);
            }
    }
    return count == n;
}

Graph schreier_graph(const std::vector<Perm>& generators) {
    if (generators.empty()) throw DomainError("schreier_graph needs generators");
    Graph g;
    g.n = static_cast<int>(generators[0].size());
    for (std::size_t k = 0; k < generators.size(); ++k) {
        if (static_cast<int>(generators[k].size()) != g.n) throw DomainError("generator sizes differ");
        for (int x = 0; x < g.n; ++x) g.edges.push_back({x, generators[k][x], static_cast<int>(k)});
    }
    if (!g.connected()) throw std::logic_error("Schreier graph is disconnected: the generators do not act transitively");
    return g;
}

Graph schreier_graph(const CosetTable& table) { return schreier_graph(std::vector<Perm>{table.T, table.L}); }

void write_adjacency(std::ostream& os, const Graph& g) {
    std::vector<std::vector<int>> adj(g.n);
    for (const auto& e : g.edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    os << "n " << g.n << "\n";
    for (int x = 0; x < g.n; ++x) {
        std::sort(adj[x].begin(), adj[x].end());
        os << x << ":";
        for (int y : adj[x]) os << " " << y;
        os << "\n";
    }
}

Rational cheeger_exact(const Graph& g) {
    if (g.n < 2 || g.n > 22) throw DomainError("cheeger_exact covers 2 <= |V| <= 22; use cheeger_bound for larger graphs");
    std::vector<std::vector<int>> adj(g.n);
    for (const auto& e : g.edges)
        if (e.u != e.v) {
            adj[e.u].push_back(e.v);
            adj[e.v].push_back(e.u);
        }
    // Gray-code walk over subsets A of {0..n-2}; vertex n-1 stays in B.
    const int free = g.n - 1;
    std::vector<char> inA(g.n, 0);
    long long cut = 0, best_num = 0, best_den = 0;
    int sizeA = 0;
    for (std::uint64_t step = 1; step < (std::uint64_t{1} << free); ++step) {
        int x = __builtin_ctzll(step);
        for (int y : adj[x]) cut += (inA[y] == inA[x]) ? 1 : -1;
        inA[x] = !inA[x];
        sizeA += inA[x] ? 1 : -1;
        if (sizeA == 0) continue;
        long long den = std::min(sizeA, g.n - sizeA);
        if (best_den == 0 || cut * best_den < best_num * den) {
            best_num = cut;
            best_den = den;
        }
    }
    return Rational(best_num, best_den);
}

namespace {

struct Fiedler {
    double lambda1 = 0;
    std::vector<double> vec;  ///< eigenvector of the normalized Laplacian
};

// y = D^{-1/2} A D^{-1/2} x
struct NormalizedAdjacency {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;
    explicit NormalizedAdjacency(const Graph& g) : n(g.n), rows(g.n) {
        std::vector<int> deg = g.degrees();
        for (const auto& e : g.edges) {
            double w = 1.0 / std::sqrt(double(deg[e.u]) * deg[e.v]);
            rows[e.u].push_back({e.v, w});
            rows[e.v].push_back({e.u, w});
        }
    }
    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        y.setZero(n);
        for (int i = 0; i < n; ++i)
            for (auto [j, w] : rows[i]) y[i] += w * x[j];
    }
};

Fiedler fiedler_dense(const Graph& g) {
    std::vector<int> deg = g.degrees();
    Eigen::MatrixXd Lap = Eigen::MatrixXd::Identity(g.n, g.n);
    for (const auto& e : g.edges) {
        double w = 1.0 / std::sqrt(double(deg[e.u]) * deg[e.v]);
        Lap(e.u, e.v) -= w;
        Lap(e.v, e.u) -= w;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Lap);
    Fiedler f;
    f.lambda1 = std::max(0.0, es.eigenvalues()[1]);
    f.vec.assign(es.eigenvectors().col(1).data(), es.eigenvectors().col(1).data() + g.n);
    return f;
}

// Largest eigenvalue of the normalized adjacency on the complement of its
// Perron vector, by restarted Lanczos with full reorthogonalization.
Fiedler fiedler_lanczos(const Graph& g) {
    NormalizedAdjacency M(g);
    const int n = g.n;
    std::vector<int> deg = g.degrees();
    Eigen::VectorXd perron(n);
    for (int i = 0; i < n; ++i) perron[i] = std::sqrt(double(deg[i]));
    perron.normalize();
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> N01;
    Eigen::VectorXd start(n);
    for (int i = 0; i < n; ++i) start[i] = N01(rng);
    const int kmax = std::min(n - 1, 160);
    Fiedler f;
    for (int restart = 0; restart < 200; ++restart) {
        Eigen::MatrixXd Vb(n, kmax + 1);
        std::vector<double> alpha, beta;
        Eigen::VectorXd q = start - perron.dot(start) * perron;
        q.normalize();
        Vb.col(0) = q;
        Eigen::VectorXd w(n);
        int k = 0;
        for (; k < kmax; ++k) {
            M.apply(Vb.col(k), w);
            alpha.push_back(Vb.col(k).dot(w));
            // full reorthogonalization (twice) against the basis and the Perron vector
            for (int pass = 0; pass < 2; ++pass) {
                w -= perron.dot(w) * perron;
                w -= Vb.leftCols(k + 1) * (Vb.leftCols(k + 1).transpose() * w);
            }
            double b = w.norm();
            if (b < 1e-14) {
                ++k;
                break;
            }
            beta.push_back(b);
            Vb.col(k + 1) = w / b;
        }
        int dim = static_cast<int>(alpha.size());
        Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) {
            Tm(i, i) = alpha[i];
            if (i + 1 < dim) Tm(i, i + 1) = Tm(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
        Eigen::VectorXd y = es.eigenvectors().col(dim - 1);
        double mu = es.eigenvalues()[dim - 1];
        Eigen::VectorXd ritz = Vb.leftCols(dim) * y;
        ritz.normalize();
        Eigen::VectorXd r(n);
        M.apply(ritz, r);
        double residual = (r - mu * ritz).norm();
        f.lambda1 = std::max(0.0, 1.0 - mu);
        f.vec.assign(ritz.data(), ritz.data() + n);
        if (residual < 1e-10 || dim < kmax) return f;
        start = ritz;
    }
    throw BudgetExceeded("spectral_gap: Lanczos did not converge");
}

Fiedler fiedler(const Graph& g) {
    if (g.n < 2) throw DomainError("spectral gap needs at least 2 vertices");
    if (!g.connected()) throw DomainError("spectral gap needs a connected graph");
    return g.n < 2000 ? fiedler_dense(g) : fiedler_lanczos(g);
}

}  // namespace

double spectral_gap(const Graph& g) { return fiedler(g).lambda1; }

CheegerBounds cheeger_bound(const Graph& g) {
    Fiedler f = fiedler(g);
    std::vector<int> deg = g.degrees();
    std::vector<double> x(g.n);
    for (int i = 0; i < g.n; ++i) x[i] = f.vec[i] / std::sqrt(double(deg[i]));
    std::vector<int> order(g.n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x[a] < x[b]; });
    std::vector<std::vector<int>> adj(g.n);
    for (const auto& e : g.edges)
        if (e.u != e.v) {
            adj[e.u].push_back(e.v);
            adj[e.v].push_back(e.u);
        }
    std::vector<char> inS(g.n, 0);
    long long cut = 0, best_num = 0, best_den = 0;
    for (int s = 0; s + 1 < g.n; ++s) {
        int v = order[s];
        for (int y : adj[v]) cut += inS[y] ? -1 : 1;
        inS[v] = 1;
        long long den = std::min(s + 1, g.n - s - 1);
        if (best_den == 0 || cut * best_den < best_num * den) {
            best_num = cut;
            best_den = den;
        }
    }
    CheegerBounds b;
    b.lambda1 = f.lambda1;
    b.lower = *std::min_element(deg.begin(), deg.end()) * f.lambda1 / 2;
    b.upper = double(best_num) / double(best_den);
    return b;
}

// ---------------------------------------------------------------- origamis

namespace {

Perm inverse(const Perm& p) {
    Perm q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[p[i]] = static_cast<int>(i);
    return q;
}

// (p q)(x) = p(q(x))
Perm compose(const Perm& p, const Perm& q) {
    Perm r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) r[i] = p[q[i]];
    return r;
}

int cycle_count(const Perm& p) {
    std::vector<char> seen(p.size(), 0);
    int c = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (seen[i]) continue;
        ++c;
        for (int j = static_cast<int>(i); !seen[j]; j = p[j]) seen[j] = 1;
    }
    return c;
}

}  // namespace

Origami lshape_origami(long long d) {
    if (d < 4 || d % 2 != 0) throw DomainError("lshape_origami needs even d >= 4");
    int n = static_cast<int>(d), row = static_cast<int>(d / 2 + 1);
    Origami o;
    o.h.resize(n);
    o.v.resize(n);
    std::iota(o.h.begin(), o.h.end(), 0);
    std::iota(o.v.begin(), o.v.end(), 0);
    for (int i = 0; i < row; ++i) o.h[i] = (i + 1) % row;
    // column above square 0: 0 -> row -> row+1 -> ... -> n-1 -> 0
    std::vector<int> col{0};
    for (int i = row; i < n; ++i) col.push_back(i);
    for (std::size_t i = 0; i < col.size(); ++i) o.v[col[i]] = col[(i + 1) % col.size()];
    return o;
}

bool is_transitive(const Origami& o) {
    if (o.h.size() != o.v.size() || o.h.empty()) return false;
    Graph g;
    g.n = o.squares();
    for (int x = 0; x < g.n; ++x) {
        g.edges.push_back({x, o.h[x], 0});
        g.edges.push_back({x, o.v[x], 1});
    }
    return g.connected();
}

int origami_genus(const Origami& o) {
    Perm c = compose(compose(o.h, o.v), compose(inverse(o.h), inverse(o.v)));
    int chi = cycle_count(c) - o.squares();
    return (2 - chi) / 2;
}

Origami canonical_form(const Origami& o) {
    const int n = o.squares();
    Origami best;
    bool have = false;
    std::vector<int> label(n);
    std::vector<int> queue(n);
    for (int s = 0; s < n; ++s) {
        std::fill(label.begin(), label.end(), -1);
        int head = 0, tail = 0;
        label[s] = tail;
        queue[tail++] = s;
        while (head < tail) {
            int x = queue[head++];
            for (int y : {o.h[x], o.v[x]})
                if (label[y] < 0) {
                    label[y] = tail;
                    queue[tail++] = y;
                }
        }
        if (tail != n) throw DomainError("canonical_form needs a transitive origami");
        Origami c;
        c.h.resize(n);
        c.v.resize(n);
        for (int x = 0; x < n; ++x) {
            c.h[label[x]] = label[o.h[x]];
            c.v[label[x]] = label[o.v[x]];
        }
        if (!have || c < best) {
            best = std::move(c);
            have = true;
        }
    }
    return best;
}

Origami act_T(const Origami& o) { return {o.h, compose(o.v, inverse(o.h))}; }
Origami act_L(const Origami& o) { return {compose(o.h, inverse(o.v)), o.v}; }
Origami act_S(const Origami& o) { return {inverse(o.v), o.h}; }

OrigamiOrbit origami_orbit(const Origami& o, int max_size) {
    if (!is_transitive(o)) throw DomainError("origami_orbit needs a transitive origami");
    OrigamiOrbit orbit;
    std::map<Origami, int> index;
    Origami c0 = canonical_form(o);
    index.emplace(c0, 0);
    orbit.members.push_back(c0);
    Perm T, L;
    for (std::size_t i = 0; i < orbit.members.size(); ++i) {
        for (int gen = 0; gen < 2; ++gen) {
            Origami img = canonical_form(gen == 0 ? act_T(orbit.members[i]) : act_L(orbit.members[i]));
            auto [it, inserted] = index.emplace(img, static_cast<int>(orbit.members.size()));
            if (inserted) {
                if (static_cast<int>(orbit.members.size()) >= max_size)
                    throw BudgetExceeded("origami orbit exceeds the size cap");
                orbit.members.push_back(img);
            }
            (gen == 0 ? T : L).push_back(it->second);
        }
    }
    orbit.graph = schreier_graph(std::vector<Perm>{T, L});
    return orbit;
}

// --------------------------------------------------------- expansion probe

namespace {

ExpansionRow probe_row(long long d, const std::string& model) {
    ExpansionRow row;
    row.d = d;
    row.D = d * d;
    row.model = model;
    Graph g;
    if (model == "gamma0") {
        CosetTable t = gamma0_cosets(row.D / 4);
        if (t.size() != gamma0_index(row.D / 4)) throw std::logic_error("coset table size disagrees with the index formula");
        g = schreier_graph(t);
    } else {
        g = origami_orbit(lshape_origami(d)).graph;
    }
    row.index = g.n;
    if (g.n == 1) {
        // a single vertex: no bipartitions, no nonzero eigenvalue
        row.h_lower = row.h_upper = row.lambda1 = row.lambda1_D6 = 0;
        return row;
    }
    CheegerBounds b = cheeger_bound(g);
    row.h_lower = b.lower;
    row.h_upper = b.upper;
    row.lambda1 = b.lambda1;
    row.lambda1_D6 = b.lambda1 * std::pow(double(row.D), 6);
    if (g.n <= 22) {
        row.exact_h = true;
        row.h_exact = cheeger_exact(g);
        double h = row.h_exact.to_double();
        if (h < row.h_lower - 1e-9 || h > row.h_upper + 1e-12)
            throw std::logic_error("exhaustive Cheeger constant outside the spectral/sweep bounds");
        if (row.h_exact < Rational(1, g.n)) throw std::logic_error("h < 1/|V|");
    } else if (!g.connected()) {
        throw std::logic_error("disconnected graph");  // connected implies h >= 1/|V|
    }
    if (row.lambda1 > 2 * row.h_upper + 1e-12) throw std::logic_error("lambda1 > 2 h_upper");
    if (row.h_lower > row.h_upper + 1e-12) throw std::logic_error("h_lower > h_upper");
    return row;
}

}  // namespace

std::vector<ExpansionRow> expansion_probe(const std::vector<long long>& d_list, bool with_origami, int workers) {
    std::vector<std::pair<long long, std::string>> tasks;
    for (long long d : d_list) {
        if (d < 4 || d % 2 != 0) throw DomainError("expansion_probe needs even d >= 4");
        tasks.push_back({d, "gamma0"});
        if (with_origami) tasks.push_back({d, "origami"});
    }
    std::vector<ExpansionRow> rows(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < tasks.size();) {
            try {
                rows[i] = probe_row(tasks[i].first, tasks[i].second);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    int nthreads = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

std::string expansion_csv(const std::vector<ExpansionRow>& rows) {
    std::ostringstream os;
    os << "d,D,model,index,h_lower,h_upper,lambda1,lambda1_D6\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%lld,%lld,%s,%lld,%.10g,%.10g,%.10g,%.10g\n", r.d, r.D, r.model.c_str(),
                      r.index, r.h_lower, r.h_upper, r.lambda1, r.lambda1_D6);
        os << buf;
    }
    return os.str();
}

}  // namespace h2lab
