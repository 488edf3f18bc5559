#include "droplab/field.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "droplab/log.hpp"
#include "droplab/simd/kernels.hpp"

namespace droplab::field {

double integrate_dA(const ScalarField& f, const RegionMask& m) {
    require_same_grid(f.grid(), m.grid(), "integrate_dA");
    double sum = 0.0;
    for (std::size_t k = 0; k < f.grid().size(); ++k)
        if (m[k]) sum += f[k];
    return sum * f.grid().cell_dA();
}

ScalarField laplacian(const ScalarField& f) {
    const Grid2D& g = f.grid();
    ScalarField out(g);
    const double scale = 1.0 / (4.0 * g.h * g.h);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (g.on_boundary_ring(i, j)) {
                out.mark_undefined(g.index(i, j));
                continue;
            }
            out(i, j) = (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) * scale;
        }
    return out;
}

double self_cell_log_radius() {
    // By symmetry the square splits into 8 triangles with apex at the centre.
    // In polar form the radial integral is closed form:
    //   int_0^R log(r) r dr = R^2/2 (log R - 1/2),  R(theta) = 1/(2 cos theta).
    static const double value = [] {
        constexpr int n = 4096;  // composite Simpson, even
        const double a = 0.0;
        const double b = std::numbers::pi / 4.0;
        const double step = (b - a) / n;
        auto g = [](double theta) {
            const double r = 0.5 / std::cos(theta);
            return 0.5 * r * r * (std::log(r) - 0.5);
        };
        double s = g(a) + g(b);
        for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * g(a + k * step);
        return 8.0 * s * step / 3.0;
    }();
    return value;
}

ScalarField log_potential(const ScalarField& density, const RegionMask& support, const RegionMask& targets) {
    const Grid2D& g = density.grid();
    require_same_grid(g, support.grid(), "log_potential support");
    require_same_grid(g, targets.grid(), "log_potential targets");

    ScalarField out(g);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!targets[k]) out.mark_undefined(k);

    int imin, jmin, imax, jmax;
    if (!support.bounding_box(imin, jmin, imax, jmax)) {
        log::warn("log_potential: empty support, returning zero field");
        return out;
    }

    // Kernel table indexed by (|dj|, di + nx - 1).
    const int width = 2 * g.nx - 1;
    std::vector<double> kernel(static_cast<std::size_t>(width) * static_cast<std::size_t>(g.ny));
    const double log_h2 = 2.0 * std::log(g.h);
    for (int dj = 0; dj < g.ny; ++dj)
        for (int di = -(g.nx - 1); di <= g.nx - 1; ++di) {
            double v;
            if (di == 0 && dj == 0)
                v = -2.0 * (std::log(g.h) + self_cell_log_radius());
            else
                v = -(log_h2 + std::log(double(di) * di + double(dj) * dj));
            kernel[static_cast<std::size_t>(dj) * width + static_cast<std::size_t>(di + g.nx - 1)] = v;
        }

    struct Row {
        int j, lo, hi;  // columns [lo, hi)
    };
    std::vector<Row> rows;
    std::vector<double> weighted(g.size(), 0.0);
    for (int j = jmin; j <= jmax; ++j) {
        int lo = -1, hi = -1;
        for (int i = imin; i <= imax; ++i)
            if (support(i, j)) {
                weighted[g.index(i, j)] = density(i, j);
                if (lo < 0) lo = i;
                hi = i + 1;
            }
        if (lo >= 0) rows.push_back({j, lo, hi});
    }

    const auto backend = simd::active_backend();
    const double dA = g.cell_dA();
    for (int tj = 0; tj < g.ny; ++tj)
        for (int ti = 0; ti < g.nx; ++ti) {
            if (!targets(ti, tj)) continue;
            double acc[4] = {0.0, 0.0, 0.0, 0.0};
            for (const Row& r : rows) {
                const int dj = std::abs(tj - r.j);
                const double* k = kernel.data() + static_cast<std::size_t>(dj) * width +
                                  static_cast<std::size_t>(g.nx - 1 - ti + r.lo);
                simd::dot_accumulate(backend, weighted.data() + g.index(r.lo, r.j), k,
                                     static_cast<std::size_t>(r.hi - r.lo), acc);
            }
            out(ti, tj) = simd::lane_sum(acc) * dA;
        }
    return out;
}

namespace {

template <class Visit>
void flood(const Grid2D& g, std::vector<std::uint8_t>& seen, const std::vector<std::uint8_t>& allowed,
           std::size_t seed, Visit&& visit) {
    std::deque<std::size_t> queue{seed};
    seen[seed] = 1;
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        visit(k);
        const Node n = g.node(k);
        const Node nb[4] = {{n.i + 1, n.j}, {n.i - 1, n.j}, {n.i, n.j + 1}, {n.i, n.j - 1}};
        for (const Node& q : nb) {
            if (!g.contains(q.i, q.j)) continue;
            const std::size_t kk = g.index(q);
            if (allowed[kk] && !seen[kk]) {
                seen[kk] = 1;
                queue.push_back(kk);
            }
        }
    }
}

}  // namespace

std::vector<RegionMask> connected_components(const RegionMask& m) {
    const Grid2D& g = m.grid();
    std::vector<std::uint8_t> allowed(m.raw().begin(), m.raw().end());
    std::vector<std::uint8_t> seen(g.size(), 0);
    std::vector<std::pair<std::size_t, RegionMask>> parts;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!allowed[k] || seen[k]) continue;
        RegionMask comp(g);
        std::size_t cells = 0;
        flood(g, seen, allowed, k, [&](std::size_t kk) {
            comp.set(kk, true);
            ++cells;
        });
        parts.emplace_back(cells, std::move(comp));
    }
    std::stable_sort(parts.begin(), parts.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<RegionMask> out;
    out.reserve(parts.size());
    for (auto& p : parts) out.push_back(std::move(p.second));
    return out;
}

RegionMask polynomial_hull(const RegionMask& m) {
    if (m.touches_boundary_ring())
        throw PreconditionError("polynomial_hull: mask touches the grid boundary ring");
    const Grid2D& g = m.grid();
    std::vector<std::uint8_t> outside(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) outside[k] = m[k] ? 0 : 1;
    std::vector<std::uint8_t> seen(g.size(), 0);
    // Every boundary-ring node is in the complement; flood the unbounded part.
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.on_boundary_ring(i, j)) continue;
            const std::size_t k = g.index(i, j);
            if (!seen[k]) flood(g, seen, outside, k, [](std::size_t) {});
        }
    RegionMask hull(g);
    for (std::size_t k = 0; k < g.size(); ++k) hull.set(k, !seen[k]);
    return hull;
}

Complex dbar(const ScalarField& f, int i, int j) {
    const double h = f.grid().h;
    const double fx = (f(i + 1, j) - f(i - 1, j)) / (2.0 * h);
    const double fy = (f(i, j + 1) - f(i, j - 1)) / (2.0 * h);
    return 0.5 * Complex(fx, fy);
}

}  // namespace droplab::field
