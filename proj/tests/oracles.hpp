#pragma once

// Independent reference values. Nothing here calls into the library: each
// oracle is a closed form or a brute-force quadrature written from scratch.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
constexpr double pi = std::numbers::pi;

// Quadratic potential Q = |z|^2: the droplet of mass t is the disk of radius
// sqrt(t), and the obstacle solution is radial:
//   Qhat_t(r) = r^2                       r <= sqrt(t)
//   Qhat_t(r) = t log r^2 + t - t log t    r >  sqrt(t)
inline double quadratic_boundary_constant(double t) { return t - t * std::log(t); }
inline double quadratic_qhat(double r, double t) {
    const double r2 = r * r;
    return r2 <= t ? r2 : t * std::log(r2) + quadratic_boundary_constant(t);
}
// The Robin constant equals the boundary constant for this family.
inline double quadratic_robin(double t) { return quadratic_boundary_constant(t); }

// Log potential of the uniform density 1 (per dA) on the disk |z| <= R:
// U = R^2 - |z|^2 - R^2 log R^2 inside, -R^2 log|z|^2 outside.
inline double disk_log_potential(Complex z, double R) {
    const double r2 = std::norm(z), R2 = R * R;
    return r2 <= R2 ? R2 - r2 - R2 * std::log(R2) : -R2 * std::log(r2);
}

// Cell average of log|eta| over the unit square, by a fine midpoint rule.
inline double unit_cell_mean_log(int n = 2000) {
    double s = 0.0;
    const double d = 1.0 / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = -0.5 + (i + 0.5) * d, y = -0.5 + (j + 0.5) * d;
            s += 0.5 * std::log(x * x + y * y);
        }
    return s * d * d;
}

// AnisotropicQuadratic(c): Q = (1+c)x^2 + (1-c)y^2 has Laplacian 1 and an
// elliptical droplet of area pi t whose semi-axes satisfy A/B = (1-c)/(1+c).
inline void anisotropic_axes(double c, double t, double& A, double& B) {
    A = std::sqrt(t) * std::sqrt((1.0 - c) / (1.0 + c));
    B = std::sqrt(t) * std::sqrt((1.0 + c) / (1.0 - c));
}

// Squared norm of the monic z^j in L^2(e^{-m|z|^2} dvol): pi j! / m^{j+1}.
inline double gaussian_monic_norm(int j, double m) {
    return pi * std::tgamma(j + 1.0) / std::pow(m, j + 1.0);
}

// Free energy of the quadratic ensemble at m = n from the Barnes G
// expansion log G(n+1) = n^2/2 log n - 3n^2/4 + n/2 log 2pi - 1/12 log n
// + zeta'(-1) + O(1/n^2), with log Z = log n! + n log pi + log G(n+1) -
// n(n+1)/2 log n.
inline double quadratic_free_energy_barnes(int n) {
    const double N = n;
    const double zeta_prime_m1 = -0.16542114370045092;
    const double log_g = 0.5 * N * N * std::log(N) - 0.75 * N * N + 0.5 * N * std::log(2.0 * pi) -
                         std::log(N) / 12.0 + zeta_prime_m1;
    const double log_z = std::lgamma(N + 1.0) + N * std::log(pi) + log_g - 0.5 * N * (N + 1.0) * std::log(N);
    return log_z / (N * (N - 1.0));
}

// Two-particle quadratic ensemble, m = 2, beta = 2: one-point intensity per
// dvol (4/pi)(|z|^2 + 1/2) e^{-2|z|^2}. The radial CDF of one particle is
// F(r) = 1 - (r^2 + 1) e^{-2 r^2}.
inline double n2_intensity_dvol(Complex z) {
    const double R = std::norm(z);
    return 4.0 / pi * (R + 0.5) * std::exp(-2.0 * R);
}
inline double n2_radial_cdf(double r) {
    const double R = r * r;
    return 1.0 - (R + 1.0) * std::exp(-2.0 * R);
}
// One particle with weight e^{-|z|^2}: F(r) = 1 - e^{-r^2}.
inline double n1_radial_cdf(double r) { return 1.0 - std::exp(-r * r); }

// Ginibre partial-sum intensity per dA: m e^{-m r^2} sum_{j<n} (m r^2)^j / j!.
inline double ginibre_intensity_dA(Complex z, int n, double m) {
    const double x = m * std::norm(z);
    double term = 1.0, s = 0.0;
    for (int j = 0; j < n; ++j) {
        s += term;
        term *= x / (j + 1.0);
    }
    return m * std::exp(-x) * s;
}

// Z_2 = int int |z1 - z2|^2 e^{-m(|z1|^2 + |z2|^2)} dvol dvol by a direct
// four-dimensional midpoint sum on [-L, L]^4.
inline double brute_force_z2(double m, double L, double h) {
    std::vector<Complex> pts;
    std::vector<double> w;
    const int n = static_cast<int>(std::lround(2.0 * L / h));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Complex z(-L + (i + 0.5) * h, -L + (j + 0.5) * h);
            pts.push_back(z);
            w.push_back(std::exp(-m * std::norm(z)) * h * h);
        }
    double s = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < pts.size(); ++b) row += std::norm(pts[a] - pts[b]) * w[b];
        s += row * w[a];
    }
    return s;
}

// Kolmogorov distance between samples and a continuous CDF.
inline double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double F = cdf(x[k]);
        d = std::max({d, std::fabs(F - k / n), std::fabs(F - (k + 1) / n)});
    }
    return d;
}

// Energy of the minimizing pair for Q = |z|^2: points at +-a with
// a = 1/sqrt(2m), so the distance is sqrt(2/m).
inline double pair_distance(double m) { return std::sqrt(2.0 / m); }

}  // namespace oracle
