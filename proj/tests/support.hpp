#pragma once

// Geometry helpers shared by the test programs.

#include <algorithm>
#include <cmath>
#include <limits>

#include "droplab/grid.hpp"

namespace support {

using droplab::Complex;
using droplab::RegionMask;

/// Hausdorff distance between the node set of `m` and the closed disk,
/// measured on grid nodes.
inline double hausdorff_to_disk(const RegionMask& m, Complex c, double R) {
    const auto& g = m.grid();
    double d = 0.0;
    const auto members = m.nodes();
    for (const auto& n : members) d = std::max(d, std::abs(g.z(n) - c) - R);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Complex z = g.z(i, j);
            if (std::abs(z - c) > R || m(i, j)) continue;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& n : members) best = std::min(best, std::abs(g.z(n) - z));
            d = std::max(d, best);
        }
    return d;
}

/// Mask shifted by (di, dj) cells; nodes shifted off the grid are dropped.
inline RegionMask shifted(const RegionMask& m, int di, int dj) {
    RegionMask out(m.grid());
    for (const auto& n : m.nodes())
        if (m.grid().contains(n.i + di, n.j + dj)) out.set(n.i + di, n.j + dj, true);
    return out;
}

}  // namespace support
