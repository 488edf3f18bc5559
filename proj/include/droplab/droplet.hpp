#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "droplab/grid.hpp"
#include "droplab/obstacle.hpp"
#include "droplab/potential.hpp"

namespace droplab {

/// A droplet S with its equilibrium density 1_S laplQ and Robin constant.
struct Droplet {
    RegionMask mask;
    double t = 0.0;     ///< nominal mass (the obstacle parameter)
    double mass = 0.0;  ///< integral of the density over the mask
    ScalarField density;
    /// Discrete equilibrium measure (Laplacian of qhat per dA), with partial
    /// weights in boundary cells. Empty for droplets not built from a solve.
    ScalarField measure;
    double robin = 0.0;   ///< Frostman mean of U + Q on the mask
    double spread = 0.0;  ///< max - min of U + Q on the mask
    std::string potential_ref;
    std::string localization_ref;
    bool degenerate = false;

    nlohmann::json to_json() const;
};

struct DropletOptions {
    std::optional<double> r_shallow;  ///< default 3h
    std::optional<double> eps_mass;   ///< default 1e-6 t
    std::optional<double> tol_flat;   ///< default 0.05 * Q range over the droplet bounding box
    double tol_robin = 0.01;
    std::string potential_ref = "unknown";
    std::string localization_ref = "all";
};

struct RobinEstimate {
    double gamma_star = 0.0;  ///< mean of U + Q over droplet nodes
    double spread = 0.0;
    double energy_form = 0.0;  ///< (1/t) [ double log integral + integral of Q against the density ]
    double tol_flat = 0.0;
    double tol_robin = 0.0;
    bool flat = false;        ///< spread <= tol_flat
    bool consistent = false;  ///< |gamma_star - energy_form| <= 3 tol_robin
    nlohmann::json to_json() const;
};

/// U^{Q,S} + Q on the mask nodes (other nodes undefined).
ScalarField frostman_field(const RegionMask& S, const ScalarField& density, const ScalarField& Q);

/// Frostman mean and spread of U + Q on the droplet, cross-checked against
/// the energy form gamma* = (1/t)[ I(sigma) + int Q dsigma ].
/// Throws DegenerateError when the mask has no interior node.
RobinEstimate robin_constant(const RegionMask& mask, const ScalarField& density, const ScalarField& Q,
                             std::optional<double> tol_flat = {}, double tol_robin = 0.01);
RobinEstimate robin_constant(const Droplet& d, const ScalarField& Q, std::optional<double> tol_flat = {},
                             double tol_robin = 0.01);

/// Default flatness tolerance: 0.05 * (max Q - min Q) over the bounding box.
double default_tol_flat(const RegionMask& mask, const ScalarField& Q);

/// Shallow-point removal, density, Robin constant and the mass re-check.
/// Throws InconsistencyError if the mass after shallow removal misses sol.t
/// by more than sol.tol_mass.
Droplet make_droplet(const ObstacleSolution& sol, const ScalarField& laplQ, const ScalarField& Q,
                     const DropletOptions& opts = {});

/// Result of a nodewise inequality check.
struct NodeCheck {
    bool pass = true;
    double worst_value = 0.0;
    Node worst_node{};
    bool applicable = true;
    nlohmann::json to_json(const Grid2D& g) const;
};

/// U^{Q,S} + Q >= gamma* - tol on every node of off_mask. The reported worst
/// value is the smallest margin U + Q - gamma*. Default tol is
/// max(tol_obs, 2 * spread).
NodeCheck verify_frostman(const Droplet& d, const ScalarField& Q, const RegionMask& off_mask,
                          std::optional<double> tol = {});

/// Default tolerance for Frostman and domination inequalities.
double default_inequality_tol(const Droplet& d, const ScalarField& Q);

struct LocalDropletReport {
    double t = 0.0;
    double robin = 0.0;
    double spread = 0.0;
    double tol = 0.0;
    double tol_flat = 0.0;
    NodeCheck density_nonnegative;  ///< (i)
    NodeCheck no_shallow_points;    ///< (ii), worst_value = removed node count
    NodeCheck positive_mass;        ///< (iii)
    NodeCheck flat;                 ///< (iv), worst_value = spread
    NodeCheck frostman_outside;     ///< (v), worst_value = smallest margin on Sigma \ S
    bool pass = false;
    nlohmann::json to_json(const Grid2D& g) const;
};

struct LocalDropletOptions {
    std::optional<double> tol;  ///< defaults to max(1e-8 * Q range, 2 * spread)
    std::optional<double> tol_flat;
    std::optional<double> r_shallow;
    std::optional<double> eps_mass;
};

/// Checks the local-droplet characterization for S under localization loc:
/// (i) laplQ >= -tol on S, (ii) no Q-shallow points, (iii) t = int_S laplQ dA,
/// (iv) U + Q flat on S, (v) U + Q >= gamma* - tol on Sigma \ S.
LocalDropletReport verify_local_droplet(const RegionMask& S, const Localization& loc, const ScalarField& Q,
                                        const ScalarField& laplQ, const LocalDropletOptions& opts = {});

/// Qhat_S = gamma*(S) - U^{Q,S} on the target nodes.
ScalarField droplet_obstacle(const Droplet& d, const RegionMask& targets);

struct DominationReport {
    bool dominated = false;
    double worst_excess = 0.0;  ///< max over s2 of Qhat_{S1} - Q
    Node witness{};
    double tol = 0.0;
    nlohmann::json to_json(const Grid2D& g) const;
};

/// S1 < S2 iff Qhat_{S1} <= Q + tol on S2. Requires S1 inside a one-cell
/// dilation of S2 (PreconditionError otherwise).
DominationReport check_domination(const Droplet& s1, const Droplet& s2, const ScalarField& Q,
                                  std::optional<double> tol = {});

struct HullInclusionReport {
    double fraction = 1.0;
    std::size_t boundary_nodes = 0;
    bool pass = true;
    nlohmann::json to_json() const;
};

/// Fraction of the boundary of Phull(s_star_t0) lying in a one-cell dilation
/// of s_t.
HullInclusionReport hull_boundary_inclusion(const RegionMask& s_star_t0, const RegionMask& s_t);

/// max |dbar(U^{Q,S} + Q)| over nodes of S whose four neighbours are in S;
/// passes when it is at most `bound` (default 5h). Not applicable when S has
/// no such node.
NodeCheck dbar_boundary_check(const RegionMask& S, const ScalarField& Q, const ScalarField& laplQ,
                              std::optional<double> bound = {});

}  // namespace droplab
