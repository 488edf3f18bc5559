#pragma once

#include <vector>

#include "droplab/grid.hpp"

namespace droplab::field {

/// Sum of f over mask nodes times the normalized cell area h^2/pi.
double integrate_dA(const ScalarField& f, const RegionMask& m);

/// Quarter-Laplacian (5-point stencil divided by 4h^2). The boundary ring is
/// marked undefined.
ScalarField laplacian(const ScalarField& f);

/// log r_eff / h for a square cell: the cell average of log|eta| over
/// [-1/2, 1/2]^2. Computed once by quadrature.
double self_cell_log_radius();

/// Weighted logarithmic potential
///   U(xi) = sum_{eta in support} log(1/|xi - eta|^2) * density(eta) * h^2/pi
/// evaluated at every node of `targets`; other nodes are marked undefined.
/// The self cell uses log(1/r_eff^2).
///
/// Direct O(|support| * |targets|) summation: the kernel depends only on the
/// node offset, so it is tabulated once and each target reduces to one
/// lane-striped dot product per support row. The per-target summation order
/// is fixed, so the result does not depend on the SIMD backend.
ScalarField log_potential(const ScalarField& density, const RegionMask& support, const RegionMask& targets);

/// 4-connected components, largest first.
std::vector<RegionMask> connected_components(const RegionMask& m);

/// m plus every complement component not connected to the grid boundary.
/// Throws PreconditionError if m touches the boundary ring.
RegionMask polynomial_hull(const RegionMask& m);

/// Centered-difference dbar = (d/dx + i d/dy)/2 at node (i, j).
Complex dbar(const ScalarField& f, int i, int j);

}  // namespace droplab::field
