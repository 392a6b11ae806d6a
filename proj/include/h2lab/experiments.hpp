#pragma once
/*
 * Batch experiments behind the h2lab command line: prototype tables, flow
 * statistics, empirical equidistribution on X and on G/Gamma0(m), density
 * curves, expansion tables and criterion verdicts.
 *
 * Every experiment is a pure function of its configuration: outputs are
 * returned as named text files, and work split over workers is merged in a
 * fixed order so the bytes do not depend on the worker count.
 */
#include "h2lab/criterion.hpp"
#include "h2lab/nondivergence.hpp"
#include "h2lab/spectra.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace h2lab {

/// Invalid configuration or input file (the CLI exits with status 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string command;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string base_dir = ".";  ///< relative input paths resolve here

    // prototypes
    long long D_min = 5, D_max = 100;
    // spectra
    long long d_min = 4, d_max = 30;
    bool with_origami = false;
    // grids
    std::vector<double> t_list = {2, 4, 6, 8, 10, 12, 14};
    std::vector<double> eps_list = {0.05, 0.1, 0.2};
    int r_resolution = 100000;
    // flowstats / equidist_X
    int pairs = 20;
    bool include_prototype = true;  ///< equidist_X: add the (0,1,2) closed-orbit pair
    // equidist_WD
    std::vector<long long> m_list = {1, 2, 3, 5};
    // density
    std::string source = "generic";          ///< "generic", "lshape D" or "split a b c e"
    std::vector<long long> target_D = {5, 8, 12, 13, 16, 17};
    double rho = 0.05;                        ///< closeness threshold for logged events
    // budget: largest coset table or orbit built
    long long orbit_cap = 200000;
    // criterion
    std::string input;                        ///< JSON-lines file of pairs
    long long lshape_min = 0, lshape_max = -1;  ///< L-shape presentations to add (empty if min > max)
    double eta0 = 0.05;
};

/// Parses a JSON object of settings for `command`, starting from the
/// defaults above, with per-command changes: flowstats uses
/// t_list {0, 2, ..., 12}; equidist_X uses 2 generic pairs; equidist_WD
/// uses r_resolution 20000; density uses t_list {0, 2, 4, 6, 8} and
/// r_resolution 400.  Unknown keys and
/// ill-typed or out-of-range values throw ConfigError naming the field.
ExperimentConfig parse_config(const std::string& command, const std::string& json_text);

/// FNV-1a hash (hex) of the canonical settings, excluding workers.
std::string config_hash(const ExperimentConfig& cfg);

struct OutputFile {
    std::string name;
    std::string content;
};

/// Runs cfg.command.  Throws ConfigError for invalid settings and
/// BudgetExceeded when a budget is hit.
std::vector<OutputFile> run_experiment(const ExperimentConfig& cfg);

extern const std::vector<std::string> kCommands;

// ------------------------------------------------------------- utilities

/// Calls fn(i) for i in [0, n) on up to `workers` threads; the first
/// exception is rethrown after all threads finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Uniform double in [0, 1) from the top 53 bits of one draw (the same
/// bits on every platform, unlike std::uniform_real_distribution).
double uniform01(std::mt19937_64& rng);
/// rotation(theta) a_s u_x Z^2 with theta uniform, s in [-2, 2], x in [0, 1].
Lattice sample_unimodular_lattice(std::mt19937_64& rng);
/// The prototypical eigenform pair (e, l, m), each factor scaled to area 1.
Pair normalized_prototype_pair(const EigenformPrototype& p);

// ------------------------------------------------ equidistribution on X

/// Shape z = b2 / b1 of the reduced basis: Im z > 0, |Re z| <= 1/2, |z| >= 1.
std::complex<double> lattice_shape(const Lattice& L);
/// Hyperbolic distance on the modular surface, computed as the least
/// distance from z to gamma w over SL2(Z) elements with entries in [-2, 2].
/// For z, w in the standard fundamental domain every translate within
/// distance 0.5 of z has entries in that range, so values below 0.5 (the
/// largest bump radius used) are exact.
double modular_distance(std::complex<double> z, std::complex<double> w);
/// Shapes of the three index-2 sublattices of L.
std::array<std::complex<double>, 3> index2_shapes(const Lattice& L);

/// Radial bump (1 - (d/radius)^2)^2 for d < radius, else 0.
double radial_bump(double d, double radius);

/// Test functions on X, defined through the shapes of the two factors.
enum class BumpKind {
    One,        ///< constant 1
    Factor1,    ///< radial bump around `center` in the shape of factor 1
    Factor2,    ///< same for factor 2
    Product,    ///< Factor1(center) * Factor2(center2)
    Hecke2,     ///< bump of the distance from shape(L1) to the index-2 sublattice shapes of L2
};

struct Bump {
    std::string name;
    BumpKind kind = BumpKind::One;
    std::complex<double> center{0, 1}, center2{0, 1};
    double radius = 0.5;
};

/// one; square_f1 (i, 0.5); hex_f2 (e^{i pi/3}, 0.5); rect2_f1 (2i, 0.5);
/// square_x_hex (i on factor 1 times e^{i pi/3} on factor 2); hecke2 (radius 0.3).
std::vector<Bump> default_bumps();

double bump_value(const Bump& b, const Pair& P);

struct HaarReference {
    double value = 0;
    double error = 0;  ///< |Q(n) - Q(n/2)| for the midpoint rule at n and n/2
};

/// Integral of the bump against Haar measure on X.  Shape coordinates
/// z = x + i/u turn the invariant density (3/pi) dx dy / y^2 on the
/// fundamental domain into the uniform density on
/// {|x| <= 1/2, 0 < u <= (1 - x^2)^{-1/2}}; the midpoint rule with n
/// columns and n rows per column (rows spaced over [0, (1 - x^2)^{-1/2}]) is
/// normalized by its total weight, so the constant function integrates to 1
/// exactly.  Hecke2 uses the product of two such rules (four dimensions).
/// n = 0 selects 400 for two-dimensional rules and 32 for Hecke2.
HaarReference haar_reference(const Bump& b, int n = 0);

/// (1/N) sum_j phi(a_t u_{r_j} P) with r_j = (j + 1/2)/N, one value per bump,
/// summed in fixed blocks so the result does not depend on `workers`.
std::vector<double> birkhoff_averages(const std::vector<Bump>& bumps, const Pair& P, double t, int N,
                                      int workers = 1);

// ------------------------------------------- equidistribution on G/Gamma0(m)

/// A point g Gamma0(m) written as (reduced representative, coset of the
/// integral part): g = g0 gamma, coset gamma Gamma0(m) <-> the first column
/// (a : c) of gamma in P^1(Z/m), stored as an index of gamma0_cosets(m).
struct WDPoint {
    Mat2d g0;
    int coset = 0;
};

class CosetTracker {
public:
    explicit CosetTracker(long long m);
    long long m() const { return m_; }
    int size() const { return table_.size(); }
    const CosetTable& table() const { return table_; }
    /// Index of the coset of gamma (first column read projectively).
    int coset_of(const IntMat2& gamma) const;
    /// Index after left multiplication by an integral matrix.
    int act(const IntMat2& gamma, int coset) const;
    /// Reduces g (det 1) starting from the identity coset.
    WDPoint reduce(const Mat2d& g) const;
    /// Applies h to a reduced point and reduces again.
    WDPoint act_then_reduce(const Mat2d& h, const WDPoint& p) const;

private:
    long long m_;
    CosetTable table_;
    std::vector<int> id_;  ///< (a mod m, c mod m) -> coset index
};

}  // namespace h2lab
