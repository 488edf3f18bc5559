#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "droplab/grid.hpp"
#include "droplab/potential.hpp"

namespace droplab {

/// Solver knobs. Unset tolerances take the documented defaults:
///   tol_obs  = 1e-8 * (max Q - min Q) over constrained nodes
///   tol_mass = max(1e-3, 4h) * t
struct ObstacleParams {
    std::optional<double> tol_obs;
    std::optional<double> tol_mass;
    std::optional<double> omega;  ///< SOR relaxation; default 2/(1+sin(pi/N))
    int max_sweeps = 400000;      ///< per inner solve
    int max_bisection = 80;
    int margin_cells = 10;        ///< required gap between droplet and box edge
    std::optional<double> c_hint; ///< first root-search probe
    int far_field_passes = 2;     ///< ring-data refinements after the radial first pass
};

/// Solution of Obst_t[Q_Sigma] on the grid.
struct ObstacleSolution {
    ScalarField qhat;
    RegionMask coincidence;  ///< super-coincidence set S*_t
    double boundary_constant = 0.0;
    double t = 0.0;
    double mass = 0.0;  ///< integral of laplQ over the coincidence set
    double laplacian_mass = 0.0;  ///< integral of the discrete Laplacian of qhat
    ScalarField measure;          ///< discrete Laplacian of qhat on the coincidence set (per dA)
    double far_field_change = 0.0;  ///< largest ring-data update in the last refinement pass
    long sweeps = 0;
    double residual = 0.0;
    double tol_obs = 0.0;
    double tol_mass = 0.0;
    int bisection_steps = 0;
    bool mass_monotone = true;
    double complementarity_fraction = 0.0;
    int window_i0 = 0, window_j0 = 0, window_nx = 0, window_ny = 0;
    Node z_ref{};

    nlohmann::json manifest() const;
};

/// Solves the subharmonic obstacle problem with boundary data
/// t log|z - z_ref|^2 + c, choosing c so that the discrete Laplacian of the
/// solution carries total mass t; the coincidence-set mass must then match t
/// within tol_mass.
///
/// The inner solve is a red-black projected SOR iteration
///   u <- min(Q, u + omega (avg - u))     (constrained nodes)
///   u <- u + omega (avg - u)             (nodes off Sigma)
/// run until the largest update drops below tol_obs * h^2. Mass is
/// nondecreasing in c, which the root search records in `mass_monotone`.
///
/// The first pass uses ring data t log|z - z_ref|^2 + c. Each of the
/// far_field_passes refinements replaces log|z - z_ref|^2 by the normalized
/// log potential of the discrete measure found so far, so that non-radial
/// droplets see their own exterior field on the ring instead of a radial one.
///
/// With Sigma = all, the full grid is used and z_ref is the node nearest the
/// origin. A compact Sigma is solved on a window around its bounding box with
/// z_ref at the box's index centre, so lattice translations of Sigma and Q
/// translate the solution exactly.
///
/// Throws DegenerateError for t <= 4 h^2 max(laplQ), GrowthError when mass(c)
/// cannot reach t inside the initial bracket, BoxTooSmallError when the
/// droplet comes within margin_cells of the box edge, and NumericalError on
/// non-convergence or a failed complementarity certificate.
ObstacleSolution solve_obstacle(const ScalarField& Q, const ScalarField& laplQ, const Localization& loc, double t,
                                const ObstacleParams& params = {});

/// Complementarity check on an arbitrary candidate: fraction of interior
/// nodes where (Q - u <= tol on constrained nodes) or |u - avg| <= tol, and
/// where u <= Q + tol holds on constrained nodes.
double complementarity_fraction(const ScalarField& u, const ScalarField& Q, const RegionMask& constrained,
                                double tol, int i0, int j0, int nx, int ny);

/// Removes Q-shallow nodes: z0 is dropped when the |laplQ| dA mass of the
/// coincidence set inside the disk D(z0, r_shallow) is below eps_mass.
/// Repeats to a fixed point.
RegionMask remove_shallow(const RegionMask& coincidence, const ScalarField& laplQ, double r_shallow,
                          double eps_mass);

}  // namespace droplab
