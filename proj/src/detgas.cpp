#include "droplab/detgas.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "droplab/simd/kernels.hpp"

namespace droplab {

namespace {

// Relative size below which the integrand is treated as negligible.
constexpr double kNegligibleLog = 27.631021115928547;  // log(1e12)

Complex inner(const std::vector<double>& w, const std::vector<double>& fr, const std::vector<double>& fi,
              const std::vector<double>& gr, const std::vector<double>& gi) {
    double re = 0.0, im = 0.0;
    simd::weighted_cdot(simd::active_backend(), w.data(), fr.data(), fi.data(), gr.data(), gi.data(), w.size(), re,
                        im);
    return {re, im};
}

void check_resolution(const PotentialSpec& spec, int n, double m, const Grid2D& grid) {
    // Envelope of |z^(n-1)|^2 e^{-mQ}: where it lives and where it peaks.
    double best = -std::numeric_limits<double>::infinity(), ring = best;
    Complex peak{};
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const Complex z = grid.z(i, j);
            const double r2 = std::norm(z);
            double e = -m * spec.value(z);
            if (n > 1) e += r2 > 0.0 ? double(n - 1) * std::log(r2) : -std::numeric_limits<double>::infinity();
            if (e > best) {
                best = e;
                peak = z;
            }
            if (grid.on_boundary_ring(i, j)) ring = std::max(ring, e);
        }
    if (!std::isfinite(best)) throw ResolutionError("gram_schmidt: weight e^{-mQ} vanishes on the grid");
    if (ring > best - kNegligibleLog) {
        std::ostringstream os;
        os << "gram_schmidt: integrand not negligible at the box edge for n=" << n << ", m=" << m
           << "; enlarge the box or reduce n";
        throw ResolutionError(os.str());
    }
    if (n > 1) {
        const double arc = 2.0 * std::numbers::pi * std::abs(peak) / double(n - 1);
        if (arc < 6.0 * grid.h) {
            std::ostringstream os;
            os << "gram_schmidt: h=" << grid.h << " gives fewer than 6 cells per oscillation of z^" << (n - 1)
               << " (need h <= " << arc / 6.0 << "); refine the grid or reduce n";
            throw ResolutionError(os.str());
        }
    }
}

/// Complex determinant by Gaussian elimination with partial pivoting.
Complex determinant(std::vector<std::vector<Complex>> a) {
    const std::size_t k = a.size();
    Complex det(1.0, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == Complex(0.0, 0.0)) return {0.0, 0.0};
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < k; ++r) {
            const Complex f = a[r][c] / a[c][c];
            for (std::size_t q = c; q < k; ++q) a[r][q] -= f * a[c][q];
        }
    }
    return det;
}

}  // namespace

std::vector<double> OrthoBasis::norms() const {
    std::vector<double> out;
    out.reserve(log_norms.size());
    for (double l : log_norms) out.push_back(std::exp(l));
    return out;
}

std::vector<Complex> OrthoBasis::evaluate(Complex z) const {
    std::vector<Complex> p(static_cast<std::size_t>(n));
    if (n == 0) return p;
    p[0] = Complex(std::exp(-0.5 * log_norms[0]), 0.0);
    for (int j = 0; j + 1 < n; ++j) {
        Complex v = z * p[j];
        for (int k = 0; k <= j; ++k) v -= hess[j][k] * p[k];
        p[j + 1] = v / step[j];
    }
    return p;
}

Complex OrthoBasis::kernel(Complex z, Complex w) const {
    const auto pz = evaluate(z), pw = evaluate(w);
    Complex s(0.0, 0.0);
    for (int j = 0; j < n; ++j) s += pz[j] * std::conj(pw[j]);
    return s;
}

double OrthoBasis::weight(Complex z) const { return std::exp(-m * spec.value(z)); }

nlohmann::json OrthoBasis::to_json() const {
    nlohmann::json c = nlohmann::json::array();
    for (int j = 0; j < n; ++j)
        for (int d = 0; d < n; ++d) {
            const Complex v = d <= j ? coeffs[j][d] : Complex(0.0, 0.0);
            c.push_back({v.real(), v.imag()});
        }
    return {{"n", n},
            {"m", m},
            {"potential", spec.id()},
            {"norms", norms()},
            {"log_norms", log_norms},
            {"gram_residual", gram_residual},
            {"coeffs", c}};
}

OrthoBasis gram_schmidt(const PotentialSpec& spec, int n, double m, const Grid2D& grid,
                        const GramSchmidtOptions& opts) {
    if (n < 0) throw ConfigurationError("gram_schmidt: n must be >= 0");
    if (!(m > 0.0)) throw ConfigurationError("gram_schmidt: m must be positive");
    OrthoBasis b;
    b.n = n;
    b.m = m;
    b.spec = spec;
    b.grid = grid;
    if (n == 0) return b;
    check_resolution(spec, n, m, grid);

    const std::size_t N = grid.size();
    const double cell = grid.h * grid.h;
    b.weights.resize(N);
    std::vector<double> xs(N), ys(N);
    double h0 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const Complex z = grid.z(grid.node(k));
        xs[k] = z.real();
        ys[k] = z.imag();
        b.weights[k] = std::exp(-m * spec.value(z)) * cell;
        h0 += b.weights[k];
    }
    b.log_norms.push_back(std::log(h0));
    b.coeffs.push_back({Complex(1.0 / std::sqrt(h0), 0.0)});
    b.nodal_re.assign(1, std::vector<double>(N, 1.0 / std::sqrt(h0)));
    b.nodal_im.assign(1, std::vector<double>(N, 0.0));

    std::vector<double> vr(N), vi(N);
    for (int j = 0; j + 1 < n; ++j) {
        const auto& pr = b.nodal_re[j];
        const auto& pi = b.nodal_im[j];
        for (std::size_t k = 0; k < N; ++k) {
            vr[k] = xs[k] * pr[k] - ys[k] * pi[k];
            vi[k] = xs[k] * pi[k] + ys[k] * pr[k];
        }
        std::vector<Complex> h(static_cast<std::size_t>(j + 1), Complex(0.0, 0.0));
        for (int pass = 0; pass < 2; ++pass)
            for (int q = 0; q <= j; ++q) {
                const Complex c = inner(b.weights, vr, vi, b.nodal_re[q], b.nodal_im[q]);
                const auto& qr = b.nodal_re[q];
                const auto& qi = b.nodal_im[q];
                for (std::size_t k = 0; k < N; ++k) {
                    const double ar = c.real() * qr[k] - c.imag() * qi[k];
                    const double ai = c.real() * qi[k] + c.imag() * qr[k];
                    vr[k] -= ar;
                    vi[k] -= ai;
                }
                h[q] += c;
            }
        const double s2 = inner(b.weights, vr, vi, vr, vi).real();
        if (!(s2 > 0.0)) throw ResolutionError("gram_schmidt: lost rank at degree " + std::to_string(j + 1));
        const double s = std::sqrt(s2);
        for (std::size_t k = 0; k < N; ++k) {
            vr[k] /= s;
            vi[k] /= s;
        }
        b.nodal_re.push_back(vr);
        b.nodal_im.push_back(vi);
        b.log_norms.push_back(b.log_norms.back() + std::log(s2));

        std::vector<Complex> c(static_cast<std::size_t>(j + 2), Complex(0.0, 0.0));
        for (int d = 0; d <= j; ++d) c[d + 1] = b.coeffs[j][d];
        for (int q = 0; q <= j; ++q)
            for (int d = 0; d <= q; ++d) c[d] -= h[q] * b.coeffs[q][d];
        for (auto& v : c) v /= s;
        b.coeffs.push_back(std::move(c));
        b.hess.push_back(std::move(h));
        b.step.push_back(s);
    }

    double residual = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k <= j; ++k) {
            const Complex g = inner(b.weights, b.nodal_re[j], b.nodal_im[j], b.nodal_re[k], b.nodal_im[k]);
            residual = std::max(residual, std::abs(g - Complex(j == k ? 1.0 : 0.0, 0.0)));
        }
    b.gram_residual = residual;
    if (residual > opts.tol_gs) {
        std::ostringstream os;
        os << "gram_schmidt: Gram residual " << residual << " exceeds " << opts.tol_gs
           << "; refine the grid or reduce n";
        throw ResolutionError(os.str());
    }
    if (!opts.keep_nodal) {
        b.nodal_re.clear();
        b.nodal_im.clear();
        b.weights.clear();
    }
    return b;
}

std::vector<double> kernel_intensity(const OrthoBasis& basis, const std::vector<Complex>& points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const Complex& z : points) {
        double s = 0.0;
        for (const Complex& p : basis.evaluate(z)) s += std::norm(p);
        out.push_back(s * basis.weight(z));
    }
    return out;
}

double kernel_determinant(const OrthoBasis& basis, const std::vector<Complex>& points) {
    const std::size_t k = points.size();
    if (k == 0 || k > 4) throw PreconditionError("kernel_determinant: 1 <= k <= 4 points required");
    std::vector<std::vector<Complex>> p;
    double w = 1.0;
    for (const Complex& z : points) {
        p.push_back(basis.evaluate(z));
        w *= basis.weight(z);
    }
    std::vector<std::vector<Complex>> a(k, std::vector<Complex>(k));
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) {
            Complex s(0.0, 0.0);
            for (int j = 0; j < basis.n; ++j) s += p[r][j] * std::conj(p[c][j]);
            a[r][c] = s;
        }
    return determinant(std::move(a)).real() * w;
}

double partition_function_beta2(const OrthoBasis& basis) {
    double s = std::lgamma(double(basis.n) + 1.0);
    for (double l : basis.log_norms) {
        if (!std::isfinite(l)) throw NumericalError("partition_function_beta2: nonpositive norm in basis");
        s += l;
    }
    return s;
}

double partition_function_quadratic(int n, double m) {
    if (n < 0 || !(m > 0.0)) throw ConfigurationError("partition_function_quadratic: n >= 0 and m > 0 required");
    double s = std::lgamma(double(n) + 1.0);
    const double lp = std::log(std::numbers::pi), lm = std::log(m);
    for (int j = 0; j < n; ++j) s += lp + std::lgamma(double(j) + 1.0) - double(j + 1) * lm;
    return s;
}

std::vector<FreeEnergyRow> free_energy_check(const PotentialSpec& spec, const std::vector<int>& n_list,
                                             bool analytic_norms, const std::optional<Grid2D>& grid) {
    if (analytic_norms && spec.family() != Family::Quadratic)
        throw PreconditionError("free_energy_check: analytic norms exist only for the quadratic family");
    if (!analytic_norms && !grid) throw PreconditionError("free_energy_check: a grid is required without analytic norms");
    std::vector<FreeEnergyRow> rows;
    for (int n : n_list) {
        if (n < 2) throw ConfigurationError("free_energy_check: n must be >= 2");
        FreeEnergyRow r;
        r.n = n;
        r.m = double(n);
        r.log_z = analytic_norms ? partition_function_quadratic(n, r.m)
                                 : partition_function_beta2(gram_schmidt(spec, n, r.m, *grid, {1e-8, false}));
        r.free_energy = r.log_z / (double(n) * double(n - 1));
        if (spec.family() == Family::Quadratic) r.target = -0.75;
        rows.push_back(r);
    }
    return rows;
}

std::string free_energy_csv(const std::vector<FreeEnergyRow>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "n,m,log_z,free_energy,target\n";
    for (const auto& r : rows) {
        os << r.n << ',' << r.m << ',' << r.log_z << ',' << r.free_energy << ',';
        if (r.target) os << *r.target;
        os << '\n';
    }
    return os.str();
}

nlohmann::json MonotonicityReport::to_json() const {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& z : worst) w.push_back({z.real(), z.imag()});
    return {{"k", k},         {"checked", checked}, {"min_difference", min_difference},
            {"scale", scale}, {"tol", tol},         {"pass", pass()},
            {"worst", w}};
}

MonotonicityReport monotonicity_check(const OrthoBasis& lower, const OrthoBasis& upper,
                                      const std::vector<Complex>& points, int k, double rel_tol) {
    if (upper.n != lower.n + 1) throw PreconditionError("monotonicity_check: bases must have sizes n and n+1");
    if (upper.m != lower.m || upper.spec.id() != lower.spec.id())
        throw PreconditionError("monotonicity_check: bases must share the potential and m");
    if (k != 1 && k != 2) throw PreconditionError("monotonicity_check: k must be 1 or 2");
    if (k == 2 && points.size() % 2 != 0) throw PreconditionError("monotonicity_check: k=2 needs point pairs");
    MonotonicityReport r;
    r.k = k;
    r.min_difference = std::numeric_limits<double>::infinity();
    auto gamma = [&](const OrthoBasis& b, std::size_t i) {
        if (k == 1) return b.n == 0 ? 0.0 : kernel_intensity(b, {points[i]})[0];
        return b.n == 0 ? 0.0 : kernel_determinant(b, {points[i], points[i + 1]});
    };
    const std::size_t stride = static_cast<std::size_t>(k);
    for (std::size_t i = 0; i + stride <= points.size(); i += stride) {
        const double lo = gamma(lower, i), hi = gamma(upper, i);
        r.scale = std::max(r.scale, std::fabs(hi));
        const double d = hi - lo;
        if (d < r.min_difference) {
            r.min_difference = d;
            r.worst.assign(points.begin() + static_cast<long>(i), points.begin() + static_cast<long>(i + stride));
        }
        ++r.checked;
    }
    if (r.checked == 0) r.min_difference = 0.0;
    r.tol = rel_tol * r.scale;
    return r;
}

ScalarField intensity_field(const OrthoBasis& basis, const Grid2D& grid) {
    return ScalarField::sample(grid, [&](Complex z) {
        double s = 0.0;
        for (const Complex& p : basis.evaluate(z)) s += std::norm(p);
        return std::numbers::pi * s * basis.weight(z);
    });
}

std::string intensity_csv(const OrthoBasis& basis, const Grid2D& grid) {
    const ScalarField f = intensity_field(basis, grid);
    std::ostringstream os;
    os.precision(17);
    os << "x,y,value\n";
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            os << grid.x(i) << ',' << grid.y(j) << ',' << f(i, j) / std::numbers::pi << '\n';
    return os.str();
}

}  // namespace droplab
