#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "droplab/grid.hpp"
#include "droplab/potential.hpp"

namespace droplab {

using PointConfiguration = std::vector<Complex>;

/// E_{mQ}(z) = sum_{j<k} log(1/|z_j - z_k|^2) + m sum_j Q(z_j).
/// Points are summed in a canonical order, so any permutation of z gives the
/// same bits. Coincident points give +infinity.
double energy(const PointConfiguration& z, const PotentialSpec& Q, double m);
/// I# = 2 E / (n (n - 1)); requires n >= 2.
double rescaled_energy(const PointConfiguration& z, const PotentialSpec& Q, double m);

struct McmcConfig {
    int n = 2;
    double m = 1.0;
    double beta = 2.0;
    std::optional<double> step_sigma;  ///< default 1/sqrt(m)
    long burn_in = 2000;               ///< sweeps (n proposals each)
    long n_samples = 10000;
    long thinning = 1;  ///< sweeps between recorded samples
    std::uint64_t seed = 1;
    double box_half_width = 10.0;  ///< proposals leaving the box are rejected

    nlohmann::json to_json() const;
};

struct McmcRun {
    McmcConfig config;
    std::vector<PointConfiguration> samples;
    double acceptance_rate = 0.0;  ///< during sampling
    double step_sigma = 0.0;       ///< frozen step after burn-in
    nlohmann::json to_json() const;  ///< summary without samples
};

/// Single-particle Metropolis for the Gibbs law exp(-(beta/2) E_{mQ}).
/// The step adapts during burn-in toward acceptance in [0.2, 0.5] and is then
/// frozen. Throws ConfigurationError if sampling acceptance is below 0.01.
McmcRun mcmc_sample(const McmcConfig& cfg, const PotentialSpec& Q);

/// Average particle count per node cell, as a density per dA.
ScalarField intensity_histogram(const McmcRun& run, const Grid2D& grid);

/// Sample mean and variance of (1/n) sum_j f(z_j), with f read at the nearest
/// node.
std::pair<double, double> linear_statistic(const McmcRun& run, const ScalarField& f);

struct FeketeResult {
    PointConfiguration points;
    double energy = 0.0;
    double rescaled = 0.0;  ///< I#
    double gradient_norm = 0.0;
    int iterations = 0;
    bool line_search_failed = false;  ///< best iterate returned, flagged
    std::uint64_t best_seed = 0;
    nlohmann::json to_json() const;
};

struct FeketeOptions {
    int iterations = 20000;
    int multistart = 4;
    double gradient_tol = 1e-10;  ///< relative to max(1, |E|)
};

/// Gradient descent (Barzilai-Borwein steps with Armijo backtracking) from
/// `multistart` random starts; returns the lowest energy found.
FeketeResult fekete_minimize(int n, double m, const PotentialSpec& Q, std::uint64_t seed,
                             const FeketeOptions& opts = {});

struct Atom {
    Complex point;
    double weight = 1.0;
};

/// sum_{i,j} w_i w_j (|x_i|^beta + |x_j|^beta - |x_i - x_j|^beta).
double aggregation_check(const std::vector<Atom>& atoms, double beta);

/// The two sides of the one-point aggregation test at zeta, both divided by
/// 2 mu(C): pair_side = int int |x - y|^beta / (2 mu(C)) and field_side =
/// int |zeta - x|^beta. The test asks pair_side <= field_side.
struct AggregationTest {
    double pair_side = 0.0;
    double field_side = 0.0;
    bool holds() const { return pair_side <= field_side; }
};
AggregationTest aggregation_test(const std::vector<Atom>& atoms, double beta, Complex zeta);

/// Sample dump rows sample_index,particle_index,x,y.
std::string samples_csv(const McmcRun& run);

}  // namespace droplab
