#include "droplab/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "droplab/field.hpp"
#include "droplab/log.hpp"
#include "droplab/simd/kernels.hpp"

namespace droplab {

namespace {

/// Working arrays for one window of the grid.
struct Window {
    int i0 = 0, j0 = 0, nx = 0, ny = 0;
    int ref_i = 0, ref_j = 0;  // z_ref in window-local indices
    double h = 0.0;
    std::vector<double> obstacle;
    std::vector<std::uint8_t> constrained;  // interior constrained nodes
    std::vector<double> lapl;
    std::vector<double> phi;  // far-field shape on the boundary ring, 0 elsewhere

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + static_cast<std::size_t>(i); }
    bool ring(int i, int j) const { return i == 0 || j == 0 || i == nx - 1 || j == ny - 1; }
};

struct InnerResult {
    long sweeps = 0;
    double mass = 0.0;  // integral of laplQ over the coincidence set
    double flux = 0.0;  // total discrete Laplacian mass of u
};

class Solver {
public:
    Solver(const Window& w, double t, double tol_obs, double omega, int max_sweeps)
        : w_(w), t_(t), tol_obs_(tol_obs), omega_(omega), max_sweeps_(max_sweeps), u_(w.obstacle.size(), 0.0) {}

    /// Solve for boundary constant c starting from `start` (or a cold start).
    InnerResult solve(double c, const std::vector<double>* start) {
        if (start) {
            u_ = *start;
            shift_to(c);
        } else {
            cold_start(c);
        }
        const auto backend = simd::active_backend();
        const double stop = tol_obs_ * w_.h * w_.h;
        InnerResult res;
        for (;;) {
            double max_update = 0.0;
            for (int color = 0; color < 2; ++color)
                for (int j = 1; j < w_.ny - 1; ++j) {
                    const std::size_t row = w_.idx(0, j);
                    simd::PsorRow r{u_.data() + row,
                                    u_.data() + row + w_.nx,
                                    u_.data() + row - w_.nx,
                                    w_.obstacle.data() + row,
                                    w_.constrained.data() + row,
                                    1,
                                    w_.nx - 1,
                                    (color + j) & 1,
                                    omega_};
                    max_update = std::max(max_update, simd::psor_row(backend, r));
                }
            ++res.sweeps;
            if (max_update < stop) break;
            if (res.sweeps >= max_sweeps_) {
                std::ostringstream os;
                os << "obstacle iteration did not converge in " << max_sweeps_ << " sweeps (last update "
                   << max_update << ", target " << stop << ")";
                throw NumericalError(os.str());
            }
        }
        c_ = c;
        res.mass = mass();
        res.flux = flux();
        return res;
    }

    /// Sum of the discrete quarter-Laplacian of u over interior nodes, times
    /// dA. It equals the boundary flux and is the growth coefficient of u.
    double flux() const {
        double f = 0.0;
        for (int j = 1; j < w_.ny - 1; ++j)
            for (int i = 1; i < w_.nx - 1; ++i) {
                const std::size_t k = w_.idx(i, j);
                f += ((u_[k + 1] + u_[k - 1]) + (u_[k + w_.nx] + u_[k - w_.nx])) - 4.0 * u_[k];
            }
        return f / (4.0 * std::numbers::pi);
    }

    double mass() const {
        double m = 0.0;
        for (std::size_t k = 0; k < u_.size(); ++k)
            if (w_.constrained[k] && w_.obstacle[k] - u_[k] <= tol_obs_) m += w_.lapl[k];
        return m * w_.h * w_.h / std::numbers::pi;
    }

    const std::vector<double>& u() const { return u_; }
    double c() const { return c_; }

private:
    void boundary(double c) {
        for (int j = 0; j < w_.ny; ++j)
            for (int i = 0; i < w_.nx; ++i)
                if (w_.ring(i, j)) u_[w_.idx(i, j)] = t_ * w_.phi[w_.idx(i, j)] + c;
    }
    void cold_start(double c) {
        boundary(c);
        for (int j = 1; j < w_.ny - 1; ++j)
            for (int i = 1; i < w_.nx - 1; ++i) {
                const int di = i - w_.ref_i, dj = j - w_.ref_j;
                const double r2 = std::max(double(di) * di + double(dj) * dj, 0.25) * w_.h * w_.h;
                double v = t_ * std::log(r2) + c;
                const std::size_t k = w_.idx(i, j);
                if (w_.constrained[k]) v = std::min(v, w_.obstacle[k]);
                u_[k] = v;
            }
    }
    void shift_to(double c) {
        const double delta = c - c_;
        for (std::size_t k = 0; k < u_.size(); ++k) {
            u_[k] += delta;
            if (w_.constrained[k]) u_[k] = std::min(u_[k], w_.obstacle[k]);
        }
        boundary(c);
    }

    const Window& w_;
    double t_, tol_obs_, omega_;
    int max_sweeps_;
    std::vector<double> u_;
    double c_ = 0.0;

public:
    void adopt(const std::vector<double>& u, double c) {
        u_ = u;
        c_ = c;
    }
};

}  // namespace

nlohmann::json ObstacleSolution::manifest() const {
    const Grid2D& g = qhat.grid();
    return {{"t", t},
            {"boundary_constant", boundary_constant},
            {"mass", mass},
            {"laplacian_mass", laplacian_mass},
            {"far_field_change", far_field_change},
            {"residual", residual},
            {"sweeps", sweeps},
            {"bisection_steps", bisection_steps},
            {"mass_monotone", mass_monotone},
            {"complementarity_fraction", complementarity_fraction},
            {"tol_obs", tol_obs},
            {"tol_mass", tol_mass},
            {"z_ref", {g.x(z_ref.i), g.y(z_ref.j)}},
            {"window", {window_i0, window_j0, window_nx, window_ny}},
            {"grid", {{"x0", g.x0}, {"y0", g.y0}, {"h", g.h}, {"nx", g.nx}, {"ny", g.ny}}}};
}

double complementarity_fraction(const ScalarField& u, const ScalarField& Q, const RegionMask& constrained,
                                double tol, int i0, int j0, int nx, int ny) {
    std::size_t ok = 0, total = 0;
    for (int j = j0 + 1; j < j0 + ny - 1; ++j)
        for (int i = i0 + 1; i < i0 + nx - 1; ++i) {
            ++total;
            const double avg = 0.25 * ((u(i + 1, j) + u(i - 1, j)) + (u(i, j + 1) + u(i, j - 1)));
            const bool c = constrained(i, j);
            const bool feasible = !c || u(i, j) <= Q(i, j) + tol;
            const bool contact = c && Q(i, j) - u(i, j) <= tol;
            const bool harmonic = std::fabs(u(i, j) - avg) <= tol;
            if (feasible && (contact || harmonic)) ++ok;
        }
    return total ? double(ok) / double(total) : 1.0;
}

namespace {

struct RootResult {
    std::vector<double> u;
    double c = 0.0;
    double mass = 0.0;
    double flux = 0.0;
    long sweeps = 0;
    int steps = 0;
    bool monotone = true;
};

struct RootSetup {
    double t = 0.0;
    double qmin = 0.0, qmax = 0.0;
    double cell_mass = 0.0;
    int max_steps = 80;
    std::optional<double> hint;
};

/// Finds c with Laplacian mass t for the current ring data w.phi.
///
/// The root is found on the Laplacian mass of u, which is continuous and
/// nondecreasing in c. Coincidence mass is piecewise constant in c and is
/// checked against tol_mass by the caller.
RootResult find_boundary_constant(const Window& w, Solver& solver, const RootSetup& s) {
    const double t = s.t;
    double phi_min = std::numeric_limits<double>::infinity(), phi_max = -phi_min;
    for (int j = 0; j < w.ny; ++j)
        for (int i = 0; i < w.nx; ++i)
            if (w.ring(i, j)) {
                phi_min = std::min(phi_min, w.phi[w.idx(i, j)]);
                phi_max = std::max(phi_max, w.phi[w.idx(i, j)]);
            }
    // Below c_lo the boundary data sits under min Q everywhere, so nothing
    // touches; above c_hi it clears max Q on the whole ring.
    double c_lo = s.qmin - t * phi_max - 1.0;
    double c_hi = s.qmax + 1.0 + t * std::max(0.0, -phi_min);

    RootResult out;
    // The inner stopping rule leaves O(tol_obs) noise in the Laplacian mass,
    // so the root is only resolved to tol_root; one cell of mass is the
    // resolution of the coincidence mass.
    const double tol_root = 1e-6 * t;

    InnerResult r = solver.solve(c_lo, nullptr);
    out.sweeps += r.sweeps;
    double f_lo = r.flux, m_lo = r.mass;
    std::vector<double> u_lo = solver.u();
    if (f_lo > t) throw GrowthError("mass exceeds t at the lower bracket; box or growth inadequate");

    r = solver.solve(c_hi, &u_lo);
    out.sweeps += r.sweeps;
    double f_hi = r.flux, m_hi = r.mass;
    std::vector<double> u_hi = solver.u();
    if (f_hi < t) {
        std::ostringstream os;
        os << "bisection bracket not found: total constrained mass " << f_hi << " < t = " << t
           << " (enlarge the box or Sigma)";
        throw GrowthError(os.str());
    }

    auto probe = [&](double c) {
        const bool near_lo = c - c_lo < c_hi - c;
        solver.adopt(near_lo ? u_lo : u_hi, near_lo ? c_lo : c_hi);
        const std::vector<double> start = solver.u();
        const InnerResult ir = solver.solve(c, &start);
        out.sweeps += ir.sweeps;
        ++out.steps;
        if (ir.flux + tol_root < f_lo || ir.flux > f_hi + tol_root) out.monotone = false;
        if (ir.mass + s.cell_mass < m_lo || ir.mass > m_hi + s.cell_mass) out.monotone = false;
        const bool low = ir.flux < t;
        if (low) {
            c_lo = c;
            f_lo = ir.flux;
            m_lo = ir.mass;
            u_lo = solver.u();
        } else {
            c_hi = c;
            f_hi = ir.flux;
            m_hi = ir.mass;
            u_hi = solver.u();
        }
        return low;
    };
    auto converged = [&] { return std::min(t - f_lo, f_hi - t) <= tol_root; };

    bool last_low = false;
    if (s.hint && *s.hint > c_lo && *s.hint < c_hi) {
        // Tighten the bracket around the hint with growing steps.
        last_low = probe(*s.hint);
        double step = 1e-3 * (1.0 + std::fabs(*s.hint));
        while (!converged() && out.steps < s.max_steps) {
            const double c = last_low ? c_lo + step : c_hi - step;
            if (!(c > c_lo && c < c_hi)) break;
            const bool low = probe(c);
            if (low != last_low) break;
            step *= 4.0;
        }
    }

    // Illinois regula falsi, falling back to bisection when it stalls.
    int same_side = 0;
    while (out.steps < s.max_steps && !converged()) {
        const double width = c_hi - c_lo;
        if (width <= 1e-13 * (1.0 + std::fabs(c_lo) + std::fabs(c_hi))) break;
        double wl = f_hi - t, wh = t - f_lo;
        if (same_side >= 1) (last_low ? wl : wh) *= std::ldexp(1.0, -same_side);
        double c = (wl * c_lo + wh * c_hi) / (wl + wh);
        if (!(c > c_lo + 1e-3 * width && c < c_hi - 1e-3 * width) || same_side >= 4) c = 0.5 * (c_lo + c_hi);
        const bool low = probe(c);
        same_side = (low == last_low) ? same_side + 1 : 0;
        last_low = low;
    }

    const bool take_hi = f_hi - t <= t - f_lo;
    out.u = take_hi ? std::move(u_hi) : std::move(u_lo);
    out.c = take_hi ? c_hi : c_lo;
    out.mass = take_hi ? m_hi : m_lo;
    out.flux = take_hi ? f_hi : f_lo;
    return out;
}

/// Discrete Laplacian mass density of u on the coincidence set, clamped at 0.
ScalarField discrete_measure(const Window& w, const std::vector<double>& u, double tol_obs, const Grid2D& g) {
    ScalarField mu(g);
    const double inv = 1.0 / (4.0 * w.h * w.h);
    for (int j = 1; j < w.ny - 1; ++j)
        for (int i = 1; i < w.nx - 1; ++i) {
            const std::size_t k = w.idx(i, j);
            if (!w.constrained[k] || w.obstacle[k] - u[k] > tol_obs) continue;
            const double lap = (((u[k + 1] + u[k - 1]) + (u[k + w.nx] + u[k - w.nx])) - 4.0 * u[k]) * inv;
            mu(i + w.i0, j + w.j0) = std::max(lap, 0.0);
        }
    return mu;
}

/// Normalized log potential phi = int log|z - w|^2 dmu(w) / |mu| on `targets`.
ScalarField far_field(const ScalarField& mu, const RegionMask& targets) {
    const Grid2D& g = mu.grid();
    RegionMask support(g);
    double mass = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (mu[k] > 0.0) {
            support.set(k, true);
            mass += mu[k];
        }
    mass *= g.cell_dA();
    ScalarField u = field::log_potential(mu, support, targets);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (targets[k]) u[k] = -u[k] / mass;
    return u;
}

}  // namespace

ObstacleSolution solve_obstacle(const ScalarField& Q, const ScalarField& laplQ, const Localization& loc, double t,
                                const ObstacleParams& params) {
    if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("t must be positive");
    const Grid2D& g = Q.grid();
    require_same_grid(g, laplQ.grid(), "solve_obstacle");
    const LocalizedPotential lp = localize(Q, loc);
    if (params.far_field_passes < 0) throw ConfigurationError("far_field_passes must be >= 0");

    // Window and reference node.
    Window w;
    w.h = g.h;
    int ref_i, ref_j;
    if (loc.is_all()) {
        w.i0 = 0;
        w.j0 = 0;
        w.nx = g.nx;
        w.ny = g.ny;
        const Node o = g.nearest({0.0, 0.0});
        if (o.i >= 1 && o.j >= 1 && o.i <= g.nx - 2 && o.j <= g.ny - 2) {
            ref_i = o.i;
            ref_j = o.j;
        } else {
            ref_i = g.nx / 2;
            ref_j = g.ny / 2;
        }
    } else {
        int imin, jmin, imax, jmax;
        lp.constrained.bounding_box(imin, jmin, imax, jmax);
        const int pad = std::max(params.margin_cells + 2, std::max(imax - imin, jmax - jmin) / 2);
        w.i0 = std::max(0, imin - pad);
        w.j0 = std::max(0, jmin - pad);
        w.nx = std::min(g.nx, imax + pad + 1) - w.i0;
        w.ny = std::min(g.ny, jmax + pad + 1) - w.j0;
        ref_i = (imin + imax) / 2;
        ref_j = (jmin + jmax) / 2;
    }
    w.ref_i = ref_i - w.i0;
    w.ref_j = ref_j - w.j0;

    const std::size_t wn = static_cast<std::size_t>(w.nx) * w.ny;
    w.obstacle.assign(wn, 0.0);
    w.constrained.assign(wn, 0);
    w.lapl.assign(wn, 0.0);
    w.phi.assign(wn, 0.0);
    RegionMask ring(g);
    double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin, lmax = 0.0;
    std::size_t n_constrained = 0;
    for (int j = 0; j < w.ny; ++j)
        for (int i = 0; i < w.nx; ++i) {
            const std::size_t k = w.idx(i, j);
            const int gi = i + w.i0, gj = j + w.j0;
            w.obstacle[k] = Q(gi, gj);
            if (w.ring(i, j)) {
                const int di = i - w.ref_i, dj = j - w.ref_j;
                w.phi[k] = std::log((double(di) * di + double(dj) * dj) * g.h * g.h);
                ring.set(gi, gj, true);
                continue;
            }
            if (!lp.constrained(gi, gj)) continue;
            w.constrained[k] = 1;
            w.lapl[k] = laplQ(gi, gj);
            ++n_constrained;
            qmin = std::min(qmin, Q(gi, gj));
            qmax = std::max(qmax, Q(gi, gj));
            lmax = std::max(lmax, laplQ(gi, gj));
        }
    if (n_constrained == 0) throw PreconditionError("no constrained interior nodes in the solve window");

    if (t <= 4.0 * g.h * g.h * lmax) {
        std::ostringstream os;
        os << "t = " << t << " is below the resolvable droplet mass 4 h^2 max(laplQ) = " << 4.0 * g.h * g.h * lmax;
        throw DegenerateError(os.str());
    }

    ObstacleSolution sol;
    sol.t = t;
    sol.tol_obs = params.tol_obs.value_or(1e-8 * std::max(qmax - qmin, 1e-300));
    sol.tol_mass = params.tol_mass.value_or(std::max(1e-3, 4.0 * g.h) * t);
    const int n_max = std::max(w.nx, w.ny);
    const double omega = params.omega.value_or(2.0 / (1.0 + std::sin(std::numbers::pi / (n_max - 1))));
    if (!(omega > 0.0 && omega < 2.0)) throw ConfigurationError("SOR omega must lie in (0, 2)");

    Solver solver(w, t, sol.tol_obs, omega, params.max_sweeps);
    RootSetup setup{t, qmin, qmax, lmax * g.cell_dA(), params.max_bisection, params.c_hint};

    // First pass with the radial far field t log|z - z_ref|^2; each further
    // pass replaces it on the ring by the log potential of the discrete
    // measure found so far, which is what qhat equals outside the droplet.
    RootResult root = find_boundary_constant(w, solver, setup);
    long sweeps = root.sweeps;
    int steps = root.steps;
    bool monotone = root.monotone;
    ScalarField mu = discrete_measure(w, root.u, sol.tol_obs, g);
    sol.far_field_change = 0.0;
    for (int pass = 0; pass < params.far_field_passes; ++pass) {
        const ScalarField phi = far_field(mu, ring);
        double change = 0.0;
        for (int j = 0; j < w.ny; ++j)
            for (int i = 0; i < w.nx; ++i)
                if (w.ring(i, j)) {
                    const double v = phi(i + w.i0, j + w.j0);
                    change = std::max(change, std::fabs(v - w.phi[w.idx(i, j)]));
                    w.phi[w.idx(i, j)] = v;
                }
        sol.far_field_change = t * change;
        setup.hint = root.c;
        root = find_boundary_constant(w, solver, setup);
        sweeps += root.sweeps;
        steps += root.steps;
        monotone = monotone && root.monotone;
        mu = discrete_measure(w, root.u, sol.tol_obs, g);
    }
    if (!monotone) log::warn("solve_obstacle: mass(c) was not monotone during bisection");

    const std::vector<double>& u = root.u;
    sol.boundary_constant = root.c;
    sol.mass = root.mass;
    sol.laplacian_mass = root.flux;
    sol.sweeps = sweeps;
    sol.bisection_steps = steps;
    sol.mass_monotone = monotone;
    sol.window_i0 = w.i0;
    sol.window_j0 = w.j0;
    sol.window_nx = w.nx;
    sol.window_ny = w.ny;
    sol.z_ref = {ref_i, ref_j};
    sol.measure = std::move(mu);

    // Assemble full-grid outputs; outside the window qhat continues as the
    // far field t phi + c.
    sol.qhat = ScalarField(g);
    sol.coincidence = RegionMask(g);
    RegionMask outside(g, true);
    for (int j = 0; j < w.ny; ++j)
        for (int i = 0; i < w.nx; ++i) {
            const std::size_t k = w.idx(i, j);
            sol.qhat(i + w.i0, j + w.j0) = u[k];
            outside.set(i + w.i0, j + w.j0, false);
            if (w.constrained[k] && w.obstacle[k] - u[k] <= sol.tol_obs) sol.coincidence.set(i + w.i0, j + w.j0, true);
        }
    if (!outside.empty()) {
        if (params.far_field_passes > 0) {
            const ScalarField phi = far_field(sol.measure, outside);
            for (std::size_t k = 0; k < g.size(); ++k)
                if (outside[k]) sol.qhat[k] = t * phi[k] + sol.boundary_constant;
        } else {
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (!outside[k]) continue;
                const Node n = g.node(k);
                const double di = n.i - ref_i, dj = n.j - ref_j;
                sol.qhat[k] = t * std::log((di * di + dj * dj) * g.h * g.h) + sol.boundary_constant;
            }
        }
    }

    double residual = 0.0;
    for (int j = 1; j < w.ny - 1; ++j)
        for (int i = 1; i < w.nx - 1; ++i) {
            const std::size_t k = w.idx(i, j);
            const double avg = 0.25 * ((u[k + 1] + u[k - 1]) + (u[k + w.nx] + u[k - w.nx]));
            const double target = w.constrained[k] ? std::min(avg, w.obstacle[k]) : avg;
            residual = std::max(residual, std::fabs(u[k] - target));
        }
    sol.residual = residual;
    sol.complementarity_fraction =
        complementarity_fraction(sol.qhat, Q, lp.constrained, sol.tol_obs, w.i0, w.j0, w.nx, w.ny);
    if (sol.complementarity_fraction < 1.0) {
        std::ostringstream os;
        os << "complementarity certificate failed on " << (1.0 - sol.complementarity_fraction) * 100.0
           << "% of interior nodes (residual " << residual << ")";
        throw NumericalError(os.str());
    }

    // The droplet must keep clear of the box edge.
    const int margin = params.margin_cells;
    for (const Node n : sol.coincidence.nodes())
        if (n.i < margin || n.j < margin || n.i >= g.nx - margin || n.j >= g.ny - margin)
            throw BoxTooSmallError("droplet reaches within " + std::to_string(margin) +
                                   " cells of the box edge; enlarge the box");

    if (std::fabs(sol.mass - t) > sol.tol_mass) {
        std::ostringstream os;
        os << "coincidence mass " << sol.mass << " misses t = " << t << " by more than tol_mass = " << sol.tol_mass;
        throw NumericalError(os.str());
    }
    return sol;
}

RegionMask remove_shallow(const RegionMask& coincidence, const ScalarField& laplQ, double r_shallow,
                          double eps_mass) {
    const Grid2D& g = coincidence.grid();
    require_same_grid(g, laplQ.grid(), "remove_shallow");
    if (r_shallow < 2.0 * g.h * (1.0 - 1e-12)) throw PreconditionError("r_shallow must be at least 2h");
    const int reach = static_cast<int>(std::floor(r_shallow / g.h + 1e-9));
    const double r2 = r_shallow * r_shallow + 1e-12 * g.h * g.h;
    const double dA = g.cell_dA();

    RegionMask cur = coincidence;
    for (;;) {
        RegionMask next = cur;
        bool changed = false;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!cur(i, j)) continue;
                double m = 0.0;
                for (int dj = -reach; dj <= reach; ++dj)
                    for (int di = -reach; di <= reach; ++di) {
                        if ((double(di) * di + double(dj) * dj) * g.h * g.h > r2) continue;
                        if (cur.at(i + di, j + dj)) m += std::fabs(laplQ(i + di, j + dj));
                    }
                if (m * dA < eps_mass) {
                    next.set(i, j, false);
                    changed = true;
                }
            }
        if (!changed) return cur;
        cur = std::move(next);
    }
}

}  // namespace droplab
