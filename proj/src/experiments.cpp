#include "h2lab/experiments.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace h2lab {

using json = nlohmann::json;
using cplx = std::complex<double>;

const std::vector<std::string> kCommands = {"prototypes", "flowstats", "equidist_X", "equidist_WD",
                                            "density",    "spectra",   "criterion"};

// ------------------------------------------------------------- utilities

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first) first = std::current_exception();
                next = n;
                return;
            }
        }
    };
    int nthreads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Lattice sample_unimodular_lattice(std::mt19937_64& rng) {
    double th = 2 * std::numbers::pi * uniform01(rng);
    double ss = -2 + 4 * uniform01(rng);
    double xx = uniform01(rng);
    return Lattice(rotation(th) * geodesic(ss) * horocycle(xx));
}

Pair normalized_prototype_pair(const EigenformPrototype& p) {
    return normalize_pair(to_double(prototypical_pair(p)));
}

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string header_line(const ExperimentConfig& cfg) {
    return "# h2lab " + cfg.command + " config_hash=" + config_hash(cfg) + "\n";
}

// ------------------------------------------------------------ config

const std::set<std::string> kKeys = {
    "seed",     "workers",    "D_min",   "D_max",     "d_min",      "d_max",      "with_origami",
    "t_list",   "eps_list",   "r_resolution", "pairs", "include_prototype", "m_list", "source",
    "target_D", "rho",        "orbit_cap", "input",   "lshape_min", "lshape_max", "eta0"};

template <class T>
T get_field(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

template <class T>
void read_field(const json& j, const std::string& key, T& out) {
    if (j.contains(key)) out = get_field<T>(j, key);
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError("config field '" + key + "': " + what);
}

json effective_json(const ExperimentConfig& c) {
    json j;
    j["command"] = c.command;
    j["seed"] = c.seed;
    j["D_min"] = c.D_min;
    j["D_max"] = c.D_max;
    j["d_min"] = c.d_min;
    j["d_max"] = c.d_max;
    j["with_origami"] = c.with_origami;
    j["t_list"] = c.t_list;
    j["eps_list"] = c.eps_list;
    j["r_resolution"] = c.r_resolution;
    j["pairs"] = c.pairs;
    j["include_prototype"] = c.include_prototype;
    j["m_list"] = c.m_list;
    j["source"] = c.source;
    j["target_D"] = c.target_D;
    j["rho"] = c.rho;
    j["orbit_cap"] = c.orbit_cap;
    j["input"] = c.input;
    j["lshape_min"] = c.lshape_min;
    j["lshape_max"] = c.lshape_max;
    j["eta0"] = c.eta0;
    return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& command, const std::string& json_text) {
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
        throw ConfigError("unknown subcommand '" + command + "'");
    ExperimentConfig c;
    c.command = command;
    if (command == "flowstats") c.t_list = {0, 2, 4, 6, 8, 10, 12};
    if (command == "equidist_X") c.pairs = 2;
    if (command == "equidist_WD") c.r_resolution = 20000;
    if (command == "density") {
        c.t_list = {0, 2, 4, 6, 8};
        c.r_resolution = 400;
    }

    json j;
    try {
        j = json_text.empty() ? json::object() : json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& item : j.items())
        if (!kKeys.count(item.key())) throw ConfigError("unknown config field '" + item.key() + "'");

    read_field(j, "seed", c.seed);
    read_field(j, "workers", c.workers);
    read_field(j, "D_min", c.D_min);
    read_field(j, "D_max", c.D_max);
    read_field(j, "d_min", c.d_min);
    read_field(j, "d_max", c.d_max);
    read_field(j, "with_origami", c.with_origami);
    read_field(j, "t_list", c.t_list);
    read_field(j, "eps_list", c.eps_list);
    read_field(j, "r_resolution", c.r_resolution);
    read_field(j, "pairs", c.pairs);
    read_field(j, "include_prototype", c.include_prototype);
    read_field(j, "m_list", c.m_list);
    read_field(j, "source", c.source);
    read_field(j, "target_D", c.target_D);
    read_field(j, "rho", c.rho);
    read_field(j, "orbit_cap", c.orbit_cap);
    read_field(j, "input", c.input);
    read_field(j, "lshape_min", c.lshape_min);
    read_field(j, "lshape_max", c.lshape_max);
    read_field(j, "eta0", c.eta0);

    require(c.workers >= 1, "workers", "must be >= 1");
    require(c.D_min >= 1 && c.D_min <= c.D_max, "D_min", "need 1 <= D_min <= D_max");
    require(c.d_min >= 4 && c.d_min <= c.d_max, "d_min", "need 4 <= d_min <= d_max");
    require(!c.t_list.empty(), "t_list", "must be nonempty");
    for (double t : c.t_list) require(std::isfinite(t) && std::fabs(t) <= 20, "t_list", "|t| must be <= 20");
    require(!c.eps_list.empty(), "eps_list", "must be nonempty");
    for (double e : c.eps_list) require(e > 0 && e < 1, "eps_list", "entries must lie in (0, 1)");
    require(c.r_resolution >= 1, "r_resolution", "must be >= 1");
    require(c.pairs >= 0, "pairs", "must be >= 0");
    require(!c.m_list.empty(), "m_list", "must be nonempty");
    for (long long m : c.m_list) require(m >= 1, "m_list", "entries must be >= 1");
    require(!c.target_D.empty(), "target_D", "must be nonempty");
    for (long long D : c.target_D) {
        try {
            check_discriminant(D);
        } catch (const DomainError& e) {
            throw ConfigError("config field 'target_D': " + std::string(e.what()));
        }
    }
    require(c.rho > 0, "rho", "must be > 0");
    require(c.orbit_cap >= 1, "orbit_cap", "must be >= 1");
    require(c.eta0 >= 0 && c.eta0 < 1, "eta0", "must lie in [0, 1)");
    if (c.lshape_min <= c.lshape_max)
        require(c.lshape_min >= 4, "lshape_min", "L-shape presentations need d >= 4");
    if (command == "criterion")
        require(!c.input.empty() || c.lshape_min <= c.lshape_max, "input",
                "give an input file or an lshape range");
    return c;
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::string text = effective_json(cfg).dump();  // keys sorted
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ------------------------------------------------ equidistribution on X

cplx lattice_shape(const Lattice& L) {
    Lattice R = reduce_basis(L);
    Vec2d b1 = R.gen(0), b2 = R.gen(1);
    cplx z = cplx(b2.x, b2.y) / cplx(b1.x, b1.y);
    if (z.imag() < 0) z = std::conj(z);
    // Lagrange-Gauss leaves |Re z| <= 1/2 up to rounding; fold the remainder.
    while (z.real() > 0.5) z -= 1.0;
    while (z.real() < -0.5) z += 1.0;
    return z;
}

namespace {

struct Moebius {
    double a, b, c, d;
};

const std::vector<Moebius>& small_modular_group() {
    static const std::vector<Moebius> g = [] {
        std::vector<Moebius> out;
        for (int c = 0; c <= 2; ++c)
            for (int d = -2; d <= 2; ++d) {
                if (c == 0 && d <= 0) continue;  // one of each +-gamma
                for (int a = -2; a <= 2; ++a)
                    for (int b = -2; b <= 2; ++b)
                        if (a * d - b * c == 1) out.push_back({double(a), double(b), double(c), double(d)});
            }
        return out;
    }();
    return g;
}

/// cosh of the hyperbolic distance minimized over the small group.
double min_cosh_distance(cplx z, cplx w) {
    double best = INFINITY;
    for (const auto& m : small_modular_group()) {
        cplx gw = (m.a * w + m.b) / (m.c * w + m.d);
        double num = std::norm(z - gw);
        double v = 1 + num / (2 * z.imag() * gw.imag());
        best = std::min(best, v);
    }
    return best;
}

}  // namespace

double modular_distance(cplx z, cplx w) {
    if (z.imag() <= 0 || w.imag() <= 0) throw DomainError("modular_distance needs points of the upper half-plane");
    return std::acosh(std::max(1.0, min_cosh_distance(z, w)));
}

std::array<cplx, 3> index2_shapes(const Lattice& L) {
    Lattice R = reduce_basis(L);
    Vec2d b1 = R.gen(0), b2 = R.gen(1);
    return {lattice_shape(Lattice::from_vectors(2.0 * b1, b2)), lattice_shape(Lattice::from_vectors(b1, 2.0 * b2)),
            lattice_shape(Lattice::from_vectors(b1 + b2, 2.0 * b2))};
}

double radial_bump(double d, double radius) {
    if (d >= radius) return 0;
    double s = d / radius;
    return (1 - s * s) * (1 - s * s);
}

std::vector<Bump> default_bumps() {
    const cplx I(0, 1), rho(0.5, std::sqrt(3.0) / 2);
    std::vector<Bump> b;
    b.push_back({"one", BumpKind::One, I, I, 0.5});
    b.push_back({"square_f1", BumpKind::Factor1, I, I, 0.5});
    b.push_back({"hex_f2", BumpKind::Factor2, rho, rho, 0.5});
    b.push_back({"rect2_f1", BumpKind::Factor1, 2.0 * I, 2.0 * I, 0.5});
    b.push_back({"square_x_hex", BumpKind::Product, I, rho, 0.5});
    b.push_back({"hecke2", BumpKind::Hecke2, I, I, 0.3});
    return b;
}

namespace {

double bump_from_shapes(const Bump& b, cplx z1, cplx z2, const std::array<cplx, 3>* idx2) {
    switch (b.kind) {
    case BumpKind::One:
        return 1;
    case BumpKind::Factor1:
        return radial_bump(modular_distance(z1, b.center), b.radius);
    case BumpKind::Factor2:
        return radial_bump(modular_distance(z2, b.center), b.radius);
    case BumpKind::Product:
        return radial_bump(modular_distance(z1, b.center), b.radius) *
               radial_bump(modular_distance(z2, b.center2), b.radius);
    case BumpKind::Hecke2: {
        double c = INFINITY;
        for (cplx s : *idx2) c = std::min(c, min_cosh_distance(z1, s));
        return radial_bump(std::acosh(std::max(1.0, c)), b.radius);
    }
    }
    return 0;
}

bool needs_hecke(const std::vector<Bump>& bumps) {
    return std::any_of(bumps.begin(), bumps.end(), [](const Bump& b) { return b.kind == BumpKind::Hecke2; });
}

/// Midpoint rule on the fundamental domain in (x, u = 1/y) coordinates.
struct DomainRule {
    std::vector<cplx> z;
    std::vector<double> w;  ///< normalized to total 1
};

DomainRule domain_rule(int n) {
    DomainRule r;
    double total = 0;
    for (int i = 0; i < n; ++i) {
        double x = -0.5 + (i + 0.5) / n;
        double U = 1 / std::sqrt(1 - x * x);
        for (int j = 0; j < n; ++j) {
            double u = (j + 0.5) * U / n;
            r.z.emplace_back(x, 1 / u);
            r.w.push_back(U);
            total += U;
        }
    }
    for (double& w : r.w) w /= total;
    return r;
}

double quad_2d(const Bump& b, cplx center, int n) {
    DomainRule r = domain_rule(n);
    double s = 0;
    for (std::size_t i = 0; i < r.z.size(); ++i) s += r.w[i] * radial_bump(modular_distance(r.z[i], center), b.radius);
    return s;
}

double quad_hecke(const Bump& b, int n) {
    DomainRule r = domain_rule(n);
    std::vector<std::array<cplx, 3>> idx(r.z.size());
    for (std::size_t k = 0; k < r.z.size(); ++k)
        idx[k] = index2_shapes(Lattice(Mat2d{1, r.z[k].real(), 0, r.z[k].imag()}));
    double s = 0;
    for (std::size_t i = 0; i < r.z.size(); ++i) {
        double inner = 0;
        for (std::size_t k = 0; k < r.z.size(); ++k) inner += r.w[k] * bump_from_shapes(b, r.z[i], r.z[k], &idx[k]);
        s += r.w[i] * inner;
    }
    return s;
}

}  // namespace

double bump_value(const Bump& b, const Pair& P) {
    cplx z1 = lattice_shape(P.first), z2 = lattice_shape(P.second);
    std::array<cplx, 3> idx{};
    if (b.kind == BumpKind::Hecke2) idx = index2_shapes(P.second);
    return bump_from_shapes(b, z1, z2, &idx);
}

HaarReference haar_reference(const Bump& b, int n) {
    if (n < 0 || n == 1) throw DomainError("haar_reference needs n = 0 or n >= 2");
    HaarReference out;
    switch (b.kind) {
    case BumpKind::One:
        out.value = 1;
        return out;
    case BumpKind::Factor1:
    case BumpKind::Factor2: {
        int m = n ? n : 400;
        double q = quad_2d(b, b.center, m), h = quad_2d(b, b.center, m / 2);
        out.value = q;
        out.error = std::fabs(q - h);
        return out;
    }
    case BumpKind::Product: {
        int m = n ? n : 400;
        double q1 = quad_2d(b, b.center, m), h1 = quad_2d(b, b.center, m / 2);
        double q2 = quad_2d(b, b.center2, m), h2 = quad_2d(b, b.center2, m / 2);
        out.value = q1 * q2;
        out.error = std::fabs(q1 * q2 - h1 * h2);
        return out;
    }
    case BumpKind::Hecke2: {
        int m = n ? n : 32;
        double q = quad_hecke(b, m), h = quad_hecke(b, m / 2);
        out.value = q;
        out.error = std::fabs(q - h);
        return out;
    }
    }
    return out;
}

std::vector<double> birkhoff_averages(const std::vector<Bump>& bumps, const Pair& P, double t, int N, int workers) {
    if (N < 1) throw DomainError("birkhoff_averages needs N >= 1");
    constexpr int kBlock = 1000;
    const std::size_t nblocks = (static_cast<std::size_t>(N) + kBlock - 1) / kBlock;
    const bool hecke = needs_hecke(bumps);
    const Mat2d at = geodesic(t);
    std::vector<std::vector<double>> partial(nblocks, std::vector<double>(bumps.size(), 0.0));
    parallel_for(nblocks, workers, [&](std::size_t blk) {
        auto& acc = partial[blk];
        int lo = static_cast<int>(blk) * kBlock, hi = std::min(N, lo + kBlock);
        for (int j = lo; j < hi; ++j) {
            double r = (j + 0.5) / N;
            Mat2d g = at * horocycle(r);
            Lattice L1(g * P.first.basis), L2(g * P.second.basis);
            cplx z1 = lattice_shape(L1), z2 = lattice_shape(L2);
            std::array<cplx, 3> idx{};
            if (hecke) idx = index2_shapes(L2);
            for (std::size_t k = 0; k < bumps.size(); ++k) acc[k] += bump_from_shapes(bumps[k], z1, z2, &idx);
        }
    });
    std::vector<double> out(bumps.size(), 0.0);
    for (const auto& acc : partial)
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += acc[k];
    for (double& v : out) v /= N;
    return out;
}

// ------------------------------------------- equidistribution on G/Gamma0(m)

CosetTracker::CosetTracker(long long m) : m_(m), table_(gamma0_cosets(m)) {
    id_.assign(static_cast<std::size_t>(m * m), -1);
    for (int i = 0; i < table_.size(); ++i) {
        auto [p, q] = table_.points[i];
        for (long long u = 0; u < m; ++u)
            if (std::gcd(u, m) == 1 || m == 1) id_[((u * p) % m) * m + (u * q) % m] = i;
    }
}

int CosetTracker::coset_of(const IntMat2& g) const {
    auto md = [&](std::int64_t x) { return ((x % m_) + m_) % m_; };
    int k = id_[md(g.a) * m_ + md(g.c)];
    if (k < 0) throw std::logic_error("coset lookup: first column not primitive mod m");
    return k;
}

int CosetTracker::act(const IntMat2& g, int coset) const {
    auto [p, q] = table_.points[coset];
    IntMat2 col{g.a * p + g.b * q, 0, g.c * p + g.d * q, 1};
    return coset_of(col);
}

WDPoint CosetTracker::reduce(const Mat2d& g) const {
    FundamentalDomainResult r = fundamental_domain_reduce(g);
    return {r.g0, coset_of(r.gamma)};
}

WDPoint CosetTracker::act_then_reduce(const Mat2d& h, const WDPoint& p) const {
    FundamentalDomainResult r = fundamental_domain_reduce(h * p.g0);
    return {r.g0, act(r.gamma, p.coset)};
}

// ------------------------------------------------------------ commands

namespace {

long long table_budget(long long m, long long cap, const std::string& what) {
    long long idx = gamma0_index(m);
    if (idx > cap)
        throw BudgetExceeded(what + ": coset table of size " + std::to_string(idx) + " exceeds orbit_cap " +
                             std::to_string(cap));
    return idx;
}

std::vector<OutputFile> cmd_prototypes(const ExperimentConfig& cfg) {
    std::vector<long long> Ds;
    for (long long D = cfg.D_min; D <= cfg.D_max; ++D)
        if (D % 4 == 0 || D % 4 == 1) Ds.push_back(D);
    std::vector<std::string> eig(Ds.size()), spl(Ds.size());
    parallel_for(Ds.size(), cfg.workers, [&](std::size_t i) {
        long long D = Ds[i];
        std::ostringstream e, s;
        for (const auto& p : enumerate_eigenform_prototypes(D))
            e << D << ',' << p.e << ',' << p.ell << ',' << p.m << ',' << p.lambda().str() << '\n';
        for (const auto& p : enumerate_split_prototypes(D))
            s << D << ',' << p.a << ',' << p.b << ',' << p.c << ',' << p.e << '\n';
        eig[i] = e.str();
        spl[i] = s.str();
    });
    std::string a = header_line(cfg) + "D,e,l,m,lambda\n", b = header_line(cfg) + "D,a,b,c,e\n";
    for (std::size_t i = 0; i < Ds.size(); ++i) {
        a += eig[i];
        b += spl[i];
    }
    return {{"eigenform_prototypes.csv", a}, {"split_prototypes.csv", b}};
}

std::vector<Pair> seeded_pairs(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::vector<Pair> out;
    for (int i = 0; i < count; ++i) {
        Lattice a = sample_unimodular_lattice(rng);
        Lattice b = sample_unimodular_lattice(rng);
        out.push_back({a, b});
    }
    return out;
}

std::vector<OutputFile> cmd_flowstats(const ExperimentConfig& cfg) {
    std::vector<Pair> pairs = seeded_pairs(cfg.seed, cfg.pairs);
    const std::size_t nt = cfg.t_list.size(), ne = cfg.eps_list.size();
    std::vector<FlowMeasure> res(pairs.size() * nt * ne);
    parallel_for(res.size(), cfg.workers, [&](std::size_t k) {
        std::size_t p = k / (nt * ne), ti = (k / ne) % nt, ei = k % ne;
        res[k] = flow_sublevel_measure(pairs[p], cfg.t_list[ti], cfg.eps_list[ei], Interval<double>{0.0, 1.0});
    });
    std::string rows = header_line(cfg) + "pair_id,t,eps,measure,ratio,exact\n";
    std::vector<double> fitted(nt, 0.0);
    for (std::size_t k = 0; k < res.size(); ++k) {
        std::size_t p = k / (nt * ne), ti = (k / ne) % nt, ei = k % ne;
        double eps = cfg.eps_list[ei], ratio = res[k].measure / eps;
        fitted[ti] = std::max(fitted[ti], ratio);
        rows += std::to_string(p) + ',' + fmt(cfg.t_list[ti]) + ',' + fmt(eps) + ',' + fmt(res[k].measure) + ',' +
                fmt(ratio) + ',' + (res[k].exact ? "1" : "0") + '\n';
    }
    std::string summary = header_line(cfg) + "t,fitted_C,pairs\n";
    for (std::size_t ti = 0; ti < nt; ++ti)
        summary += fmt(cfg.t_list[ti]) + ',' + fmt(fitted[ti]) + ',' + std::to_string(pairs.size()) + '\n';
    return {{"flowstats.csv", rows}, {"flowstats_summary.csv", summary}};
}

std::vector<OutputFile> cmd_equidist_X(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, Pair>> pairs;
    auto generic = seeded_pairs(cfg.seed, cfg.pairs);
    for (std::size_t i = 0; i < generic.size(); ++i) pairs.push_back({"generic_" + std::to_string(i), generic[i]});
    if (cfg.include_prototype) pairs.push_back({"prototype_0_1_2", normalized_prototype_pair({0, 1, 2})});
    const auto bumps = default_bumps();
    std::vector<HaarReference> ref(bumps.size());
    parallel_for(bumps.size(), cfg.workers, [&](std::size_t k) { ref[k] = haar_reference(bumps[k]); });

    const int coarse = cfg.r_resolution < 1000 ? 1 : 0;
    std::string out = header_line(cfg);
    if (coarse) out += "# warning: r_resolution below 1000, grid too coarse for the larger t\n";
    out += "pair_id,t,phi,birkhoff,reference,gap,ref_error,coarse_grid\n";
    for (const auto& [name, P] : pairs)
        for (double t : cfg.t_list) {
            auto avg = birkhoff_averages(bumps, P, t, cfg.r_resolution, cfg.workers);
            for (std::size_t k = 0; k < bumps.size(); ++k)
                out += name + ',' + fmt(t) + ',' + bumps[k].name + ',' + fmt(avg[k]) + ',' + fmt(ref[k].value) + ',' +
                       fmt(avg[k] - ref[k].value) + ',' + fmt(ref[k].error) + ',' + std::to_string(coarse) + '\n';
        }
    return {{"equidist_X.csv", out}};
}

std::vector<OutputFile> cmd_equidist_WD(const ExperimentConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    const Mat2d g = sample_unimodular_lattice(rng).basis;
    const Bump square{"square", BumpKind::Factor1, cplx(0, 1), cplx(0, 1), 0.5};
    const double square_ref = haar_reference(square).value;
    const double square_err = haar_reference(square).error;

    std::string out = header_line(cfg) + "m,t,phi,birkhoff,reference,gap,ref_error,audit_mismatches\n";
    std::string trend = header_line(cfg) + "m,cosets,phi,first_t_below_0.05,last_gap\n";
    for (long long m : cfg.m_list) {
        table_budget(m, cfg.orbit_cap, "equidist_WD");
        const CosetTracker tr(m);
        const WDPoint start = tr.reduce(g);
        const double P = tr.size();
        std::vector<double> gaps_coset, gaps_shape;
        for (double t : cfg.t_list) {
            const int N = cfg.r_resolution;
            constexpr int kBlock = 1000;
            const std::size_t nb = (static_cast<std::size_t>(N) + kBlock - 1) / kBlock;
            struct Acc {
                double coset0 = 0, shape = 0;
                long long mismatches = 0;
            };
            std::vector<Acc> acc(nb);
            const Mat2d at = geodesic(t);
            parallel_for(nb, cfg.workers, [&](std::size_t b) {
                int lo = static_cast<int>(b) * kBlock, hi = std::min(N, lo + kBlock);
                for (int j = lo; j < hi; ++j) {
                    Mat2d h = at * horocycle((j + 0.5) / N);
                    WDPoint q = tr.act_then_reduce(h, start);
                    WDPoint direct = tr.reduce(h * g);
                    if (direct.coset != q.coset) ++acc[b].mismatches;
                    if (q.coset == 0) {
                        acc[b].coset0 += 1;
                        acc[b].shape += radial_bump(modular_distance(lattice_shape(Lattice(q.g0)), square.center),
                                                    square.radius);
                    }
                }
            });
            Acc tot;
            for (const auto& a : acc) {
                tot.coset0 += a.coset0;
                tot.shape += a.shape;
                tot.mismatches += a.mismatches;
            }
            double b0 = tot.coset0 / N, b1 = tot.shape / N;
            double r0 = 1 / P, r1 = square_ref / P;
            gaps_coset.push_back(b0 - r0);
            gaps_shape.push_back(b1 - r1);
            out += std::to_string(m) + ',' + fmt(t) + ",coset0," + fmt(b0) + ',' + fmt(r0) + ',' + fmt(b0 - r0) +
                   ",0," + std::to_string(tot.mismatches) + '\n';
            out += std::to_string(m) + ',' + fmt(t) + ",square_x_coset0," + fmt(b1) + ',' + fmt(r1) + ',' +
                   fmt(b1 - r1) + ',' + fmt(square_err / P) + ',' + std::to_string(tot.mismatches) + '\n';
        }
        auto trend_row = [&](const std::string& phi, const std::vector<double>& gaps) {
            std::string first = "none";
            for (std::size_t i = 0; i < gaps.size(); ++i)
                if (std::fabs(gaps[i]) < 0.05) {
                    first = fmt(cfg.t_list[i]);
                    break;
                }
            trend += std::to_string(m) + ',' + std::to_string(tr.size()) + ',' + phi + ',' + first + ',' +
                     fmt(gaps.back()) + '\n';
        };
        trend_row("coset0", gaps_coset);
        trend_row("square_x_coset0", gaps_shape);
    }
    return {{"equidist_WD.csv", out}, {"trend_WD.csv", trend}};
}

struct DensityPoint {
    std::string name;
    long long D = 0;
    Pair periods;
    double log_ratio = 0;
};

DensityPoint density_point(const SplittingTriple<QuadNum>& t, std::string name, long long D) {
    return {std::move(name), D, absolute_periods(t), std::log(area_ratio(t).to_double())};
}

DensityPoint density_source(const ExperimentConfig& cfg) {
    std::istringstream in(cfg.source);
    std::string kind;
    in >> kind;
    auto bad = [&] { return ConfigError("config field 'source': expected \"generic\", \"lshape D\" or \"split a b c e\""); };
    try {
        if (kind == "generic") {
            std::mt19937_64 rng(cfg.seed);
            Pair P{sample_unimodular_lattice(rng), sample_unimodular_lattice(rng)};
            return {"generic", 0, P, -1 + 2 * uniform01(rng)};
        }
        if (kind == "lshape") {
            long long D;
            if (!(in >> D)) throw bad();
            return density_point(lshape_splitting(D), "lshape_" + std::to_string(D), D);
        }
        if (kind == "split") {
            SplitPrototype p;
            if (!(in >> p.a >> p.b >> p.c >> p.e)) throw bad();
            if (!p.is_valid()) throw ConfigError("config field 'source': not a valid split prototype");
            return density_point(prototypical_splitting(p), "source", p.D());
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config field 'source': ") + e.what());
    }
    throw bad();
}

std::vector<OutputFile> cmd_density(const ExperimentConfig& cfg) {
    const DensityPoint src = density_source(cfg);
    std::vector<DensityPoint> targets;
    for (long long D : cfg.target_D)
        for (const auto& p : enumerate_split_prototypes(D))
            targets.push_back(density_point(prototypical_splitting(p),
                                            "split_" + std::to_string(p.a) + '_' + std::to_string(p.b) + '_' +
                                                std::to_string(p.c) + '_' + std::to_string(p.e),
                                            D));
    const std::size_t nt = cfg.t_list.size(), nz = targets.size();
    const int N = cfg.r_resolution;
    struct Cell {
        double best = INFINITY, argmin = 0;
        bool bound_hit = false;
        std::string events;
    };
    std::vector<Cell> cells(nt * nz);
    parallel_for(cells.size(), cfg.workers, [&](std::size_t k) {
        const double t = cfg.t_list[k / nz];
        const DensityPoint& z = targets[k % nz];
        Cell& c = cells[k];
        const double dl = std::fabs(src.log_ratio - z.log_ratio);
        for (int j = 0; j < N; ++j) {
            double r = static_cast<double>(j) / N;
            Pair moved = act(geodesic(t) * horocycle(r), src.periods);
            DistResult d = dist_X(moved, z.periods);
            double v = d.value + dl;
            if (v < c.best) {
                c.best = v;
                c.argmin = r;
                c.bound_hit = d.bound_hit;
            }
            if (v <= cfg.rho)
                c.events += fmt(t) + ',' + fmt(r) + ',' + std::to_string(z.D) + ',' + z.name + ',' + fmt(v) + '\n';
        }
    });
    std::string dens = header_line(cfg) + "t,D,target,min_dist,argmin_r,bound_hit\n";
    std::string ev = header_line(cfg) + "t,r,D,target,dist\n";
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& z = targets[k % nz];
        dens += fmt(cfg.t_list[k / nz]) + ',' + std::to_string(z.D) + ',' + z.name + ',' + fmt(cells[k].best) + ',' +
                fmt(cells[k].argmin) + ',' + (cells[k].bound_hit ? "1" : "0") + '\n';
        ev += cells[k].events;
    }
    return {{"density.csv", dens}, {"events.csv", ev}};
}

std::vector<OutputFile> cmd_spectra(const ExperimentConfig& cfg) {
    std::vector<long long> ds;
    for (long long d = cfg.d_min; d <= cfg.d_max; ++d)
        if (d % 2 == 0) {
            table_budget(d * d / 4, cfg.orbit_cap, "spectra");
            ds.push_back(d);
        }
    auto rows = expansion_probe(ds, cfg.with_origami, cfg.workers);
    return {{"spectra.csv", header_line(cfg) + expansion_csv(rows)}};
}

// -------------------------------------------------------------- criterion

struct CriterionInput {
    std::string name;
    LatticePair<QuadNum> pair;
    double eta0 = 0;
};

QuadNum parse_entry(const json& v, const std::string& where) {
    try {
        if (v.is_number_integer()) return QuadNum(v.get<long long>());
        if (v.is_string()) return QuadNum::parse(v.get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError(where + ": expected an integer or a string \"a + b*sqrt(k)\"");
}

LatticeBasis<QuadNum> parse_basis(const json& obj, const std::string& key, const std::string& where) {
    const std::string w = where + ": field '" + key + "'";
    if (!obj.contains(key)) throw ConfigError(w + ": missing");
    const json& a = obj.at(key);
    if (!a.is_array() || a.size() != 4) throw ConfigError(w + ": expected 4 entries [a, b, c, d] (row-major)");
    Mat2<QuadNum> m{parse_entry(a[0], w), parse_entry(a[1], w), parse_entry(a[2], w), parse_entry(a[3], w)};
    try {
        return LatticeBasis<QuadNum>(m);
    } catch (const DomainError& e) {
        throw ConfigError(w + ": " + e.what());
    }
}

std::vector<CriterionInput> read_criterion_input(const std::string& path, double default_eta0) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config field 'input': cannot open " + path);
    std::vector<CriterionInput> out;
    std::string line;
    for (int ln = 1; std::getline(in, line); ++ln) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const std::string where = "line " + std::to_string(ln);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ConfigError(where + ": not a JSON object: " + e.what());
        }
        if (!obj.is_object()) throw ConfigError(where + ": not a JSON object");
        for (const auto& item : obj.items()) {
            static const std::set<std::string> keys = {"name", "lshape", "prototype", "L1", "L2", "eta0"};
            if (!keys.count(item.key())) throw ConfigError(where + ": unknown field '" + item.key() + "'");
        }
        CriterionInput ci;
        ci.eta0 = default_eta0;
        if (obj.contains("eta0")) {
            if (!obj["eta0"].is_number() || obj["eta0"].get<double>() < 0)
                throw ConfigError(where + ": field 'eta0': expected a number >= 0");
            ci.eta0 = obj["eta0"].get<double>();
        }
        int forms = obj.contains("lshape") + obj.contains("prototype") + (obj.contains("L1") || obj.contains("L2"));
        if (forms != 1) throw ConfigError(where + ": field 'lshape'/'prototype'/'L1': give exactly one pair form");
        try {
            if (obj.contains("lshape")) {
                if (!obj["lshape"].is_number_integer()) throw ConfigError(where + ": field 'lshape': expected an integer");
                long long d = obj["lshape"].get<long long>();
                ci.name = "lshape_" + std::to_string(d);
                ci.pair = lshape_pair(d);
            } else if (obj.contains("prototype")) {
                const json& p = obj["prototype"];
                if (!p.is_array() || p.size() != 3 || !p[0].is_number_integer() || !p[1].is_number_integer() ||
                    !p[2].is_number_integer())
                    throw ConfigError(where + ": field 'prototype': expected [e, l, m]");
                EigenformPrototype ep{p[0].get<long long>(), p[1].get<long long>(), p[2].get<long long>()};
                if (ep.ell <= 0 || ep.m <= 0 || std::gcd(ep.e, ep.ell) != 1)
                    throw ConfigError(where + ": field 'prototype': need l, m > 0 and gcd(e, l) = 1");
                ci.name = "prototype_" + std::to_string(ep.e) + '_' + std::to_string(ep.ell) + '_' + std::to_string(ep.m);
                ci.pair = prototypical_pair(ep);
            } else {
                ci.pair.first = parse_basis(obj, "L1", where);
                ci.pair.second = parse_basis(obj, "L2", where);
                ci.name = "pair_" + std::to_string(ln);
            }
        } catch (const DomainError& e) {
            throw ConfigError(where + ": " + e.what());
        }
        if (obj.contains("name")) {
            if (!obj["name"].is_string()) throw ConfigError(where + ": field 'name': expected a string");
            ci.name = obj["name"].get<std::string>();
        }
        out.push_back(std::move(ci));
    }
    return out;
}

std::vector<OutputFile> cmd_criterion(const ExperimentConfig& cfg) {
    std::vector<CriterionInput> inputs;
    if (!cfg.input.empty()) {
        std::filesystem::path p(cfg.input);
        if (p.is_relative()) p = std::filesystem::path(cfg.base_dir) / p;
        inputs = read_criterion_input(p.string(), cfg.eta0);
    }
    for (long long d = cfg.lshape_min; d <= cfg.lshape_max; ++d)
        if (d % 2 == 0) inputs.push_back({"lshape_" + std::to_string(d), lshape_pair(d), cfg.eta0});
    using ojson = nlohmann::ordered_json;
    std::vector<ojson> verdicts(inputs.size());
    parallel_for(inputs.size(), cfg.workers, [&](std::size_t i) {
        ojson v = ojson::parse(criterion_json(teichmuller_criterion(inputs[i].pair, inputs[i].eta0)));
        ojson row = ojson::object();
        row["name"] = inputs[i].name;
        for (const auto& item : v.items()) row[item.key()] = item.value();
        verdicts[i] = row;
    });
    ojson doc = ojson::object();
    doc["command"] = "criterion";
    doc["config_hash"] = config_hash(cfg);
    doc["results"] = verdicts;
    return {{"criterion.json", doc.dump(2) + "\n"}};
}

}  // namespace

std::vector<OutputFile> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.command == "prototypes") return cmd_prototypes(cfg);
    if (cfg.command == "flowstats") return cmd_flowstats(cfg);
    if (cfg.command == "equidist_X") return cmd_equidist_X(cfg);
    if (cfg.command == "equidist_WD") return cmd_equidist_WD(cfg);
    if (cfg.command == "density") return cmd_density(cfg);
    if (cfg.command == "spectra") return cmd_spectra(cfg);
    if (cfg.command == "criterion") return cmd_criterion(cfg);
    throw ConfigError("unknown subcommand '" + cfg.command + "'");
}

}  // namespace h2lab
