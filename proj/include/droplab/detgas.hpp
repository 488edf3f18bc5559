#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "droplab/grid.hpp"
#include "droplab/potential.hpp"

namespace droplab {

/// Orthonormal polynomials p_0..p_{n-1} in L^2(e^{-mQ} dvol), computed on the
/// grid by the midpoint rule.
///
/// The basis is built by the Stieltjes procedure: p_{j+1} is z p_j
/// orthogonalized against p_0..p_j. The recurrence coefficients are kept, so
/// polynomials can be evaluated stably at any point, and h_j (squared norm
/// of the monic polynomial of degree j) follows from the step lengths.
struct OrthoBasis {
    int n = 0;
    double m = 1.0;
    PotentialSpec spec = PotentialSpec::quadratic();
    Grid2D grid;
    std::vector<double> log_norms;           ///< log h_j
    std::vector<std::vector<Complex>> hess;  ///< hess[j][k], k <= j: projection of z p_j on p_k
    std::vector<double> step;                ///< ||z p_j - sum_k hess[j][k] p_k||
    std::vector<std::vector<Complex>> coeffs;  ///< coeffs[j][d]: monomial coefficients of p_j
    double gram_residual = 0.0;              ///< max |<p_j, p_k> - delta_jk|
    /// p_j at every node with weight e^{-mQ} h^2, kept for quadrature checks.
    std::vector<std::vector<double>> nodal_re, nodal_im;
    std::vector<double> weights;

    std::vector<double> norms() const;
    /// p_0(z)..p_{n-1}(z).
    std::vector<Complex> evaluate(Complex z) const;
    /// K_n(z, w) = sum_j p_j(z) conj(p_j(w)).
    Complex kernel(Complex z, Complex w) const;
    /// e^{-mQ(z)}.
    double weight(Complex z) const;
    /// {n, m, norms[], coeffs (row-major n x n, [re, im] pairs)}.
    nlohmann::json to_json() const;
};

struct GramSchmidtOptions {
    double tol_gs = 1e-8;
    bool keep_nodal = true;
};

/// Builds the basis. Throws ResolutionError when the grid cannot carry degree
/// n-1 (too few cells per oscillation, weight not negligible at the box edge,
/// or Gram residual above tol_gs).
OrthoBasis gram_schmidt(const PotentialSpec& spec, int n, double m, const Grid2D& grid,
                        const GramSchmidtOptions& opts = {});

/// One-point intensity K_n(z,z) e^{-mQ(z)} per dvol at each point.
std::vector<double> kernel_intensity(const OrthoBasis& basis, const std::vector<Complex>& points);
/// det[K_n(z_i, z_j)] e^{-sum mQ(z_i)} for k = points.size() <= 4.
double kernel_determinant(const OrthoBasis& basis, const std::vector<Complex>& points);

/// log Z_{m,n} = log n! + sum_j log h_j at beta = 2.
double partition_function_beta2(const OrthoBasis& basis);
/// The same identity with the closed-form Gaussian norms h_j = pi j! / m^{j+1}.
double partition_function_quadratic(int n, double m);

struct FreeEnergyRow {
    int n = 0;
    double m = 0.0;
    double log_z = 0.0;
    double free_energy = 0.0;  ///< log Z / (n (n-1))
    std::optional<double> target;  ///< -gamma(Q)/2 when known
};

/// F_n for m = n along n_list (each n >= 2). With analytic_norms only the
/// quadratic family is allowed; otherwise a grid is required.
std::vector<FreeEnergyRow> free_energy_check(const PotentialSpec& spec, const std::vector<int>& n_list,
                                             bool analytic_norms, const std::optional<Grid2D>& grid = {});
std::string free_energy_csv(const std::vector<FreeEnergyRow>& rows);

struct MonotonicityReport {
    int k = 1;
    int checked = 0;
    double min_difference = 0.0;  ///< smallest Gamma_{n+1} - Gamma_n found
    double scale = 0.0;           ///< largest Gamma_{n+1} value seen
    double tol = 0.0;
    std::vector<Complex> worst;   ///< points of the smallest difference
    bool pass() const { return min_difference >= -tol; }
    nlohmann::json to_json() const;
};

/// k = 1: Gamma^(1) at each point. k = 2: Gamma^(2) at consecutive pairs of
/// points (points.size() must be even). tol = rel_tol * scale.
MonotonicityReport monotonicity_check(const OrthoBasis& lower, const OrthoBasis& upper,
                                      const std::vector<Complex>& points, int k, double rel_tol);

/// Rows x,y,value with value = intensity per dvol at each grid node.
std::string intensity_csv(const OrthoBasis& basis, const Grid2D& grid);
/// Intensity per dA (pi times the per-dvol value) at every node.
ScalarField intensity_field(const OrthoBasis& basis, const Grid2D& grid);

}  // namespace droplab
