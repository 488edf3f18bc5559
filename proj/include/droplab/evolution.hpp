#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "droplab/droplet.hpp"
#include "droplab/obstacle.hpp"
#include "droplab/potential.hpp"

namespace droplab {

/// Droplets S_t for increasing t under one potential and localization.
struct DropletChain {
    std::vector<double> t_values;
    std::vector<Droplet> droplets;
    std::vector<ObstacleSolution> solutions;
    std::string potential_ref;
    std::string localization_ref;
    bool complete = true;       ///< false if a solve failed; the chain holds the entries before it
    std::string error_kind;     ///< set when incomplete
    std::string error_message;
    bool masks_monotone = true;  ///< S_t inside a one-cell dilation of S_t' for t < t'
    bool qhat_monotone = true;   ///< qhat_t <= qhat_t' + tol_obs nodewise
    bool correctly_indexed = true;
    std::vector<bool> dominated;  ///< domination of consecutive pairs, when checked

    std::size_t size() const { return droplets.size(); }
    nlohmann::json manifest() const;
};

struct ChainOptions {
    ObstacleParams obstacle;
    DropletOptions droplet;
    int jobs = 1;  ///< concurrent solves; results do not depend on it
    bool check_domination = false;
};

/// One obstacle solve per t (strictly increasing), with monotonicity checks
/// across consecutive entries. A failing solve stops the chain; the partial
/// chain is returned with complete = false.
DropletChain evolve_chain(const ScalarField& Q, const ScalarField& laplQ, const Localization& loc,
                          const std::vector<double>& t_list, const ChainOptions& opts = {});
DropletChain evolve_chain(const PotentialSpec& spec, const Grid2D& grid, const Localization& loc,
                          const std::vector<double>& t_list, const ChainOptions& opts = {});

enum class MomentKind { Const, Re, Im };
const char* moment_kind_name(MomentKind k);

struct MomentEntry {
    int k = 0;
    MomentKind kind = MomentKind::Const;
    double value = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass() const;
};

struct MomentReport {
    double t = 0.0, t_prime = 0.0;
    Complex a;
    std::vector<MomentEntry> entries;
    bool pass() const;
    nlohmann::json to_json() const;
};

struct MomentOptions {
    std::optional<Complex> a;  ///< default: mass centroid of s1
    int k_max = 4;
    std::optional<double> tol_const;  ///< default max(1e-3, 4h) * t'
    double k_tol_factor = 5e-3;       ///< k-moments must be within factor * (t' - t)
};

/// Harmonic moments of the growth set S'\S against laplQ dA: the constant
/// moment should equal t' - t, and Re/Im (z - a)^(-k) should vanish.
MomentReport richardson_moments(const Droplet& s1, const Droplet& s2, const MomentOptions& opts = {});

/// int over S'\S of (log|z-a|^2 - log|z-b|^2) laplQ dA, with a in S'\S and b
/// in the interior of S. Both points snap to the nearest node; the cell at a
/// uses the effective self-cell radius.
double richardson_inequality(const Droplet& s1, const Droplet& s2, Complex a, Complex b);

/// (1/(t'-t)) int over S_{t'}\S_t of f laplQ dA for entries i, i+1.
double harmonic_measure_quotient(const DropletChain& chain, std::size_t i, const ScalarField& f);

/// Backward weak Hele-Shaw chain ending at K_star: builds Qtilde = -U^{Q,K_star}
/// and solves with Sigma = K_star for each t in t_list (any order, returned
/// ascending). Throws PreconditionError if some t >= t_* (terminal mass), if
/// laplQ < 0 on K_star, or if K_star has shallow points.
DropletChain backward_hele_shaw(const RegionMask& K_star, const ScalarField& laplQ, std::vector<double> t_list,
                                const ChainOptions& opts = {});

/// Qtilde = -U^{Q,K_star} at every node.
ScalarField backward_potential(const RegionMask& K_star, const ScalarField& laplQ);

/// CSV rows t,t_prime,k,kind,value,expected.
std::string moments_csv(const std::vector<MomentReport>& reports);

}  // namespace droplab
