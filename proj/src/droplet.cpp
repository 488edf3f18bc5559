#include "droplab/droplet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "droplab/field.hpp"
#include "droplab/log.hpp"

namespace droplab {

namespace {

nlohmann::json node_json(const Grid2D& g, Node n) {
    return {{"i", n.i}, {"j", n.j}, {"x", g.x(n.i)}, {"y", g.y(n.j)}};
}

ScalarField masked_density(const RegionMask& mask, const ScalarField& laplQ) {
    ScalarField d(mask.grid());
    for (std::size_t k = 0; k < mask.grid().size(); ++k)
        if (mask[k]) d[k] = laplQ[k];
    return d;
}

}  // namespace

nlohmann::json Droplet::to_json() const {
    return {{"t", t},
            {"mass", mass},
            {"robin", robin},
            {"spread", spread},
            {"cells", mask.count()},
            {"potential", potential_ref},
            {"localization", localization_ref},
            {"degenerate", degenerate}};
}

nlohmann::json RobinEstimate::to_json() const {
    return {{"gamma_star", gamma_star}, {"spread", spread},       {"energy_form", energy_form},
            {"tol_flat", tol_flat},     {"tol_robin", tol_robin}, {"flat", flat},
            {"consistent", consistent}};
}

nlohmann::json NodeCheck::to_json(const Grid2D& g) const {
    if (!applicable) return {{"pass", pass}, {"applicable", false}};
    return {{"pass", pass}, {"worst_value", worst_value}, {"worst_node", node_json(g, worst_node)}};
}

ScalarField frostman_field(const RegionMask& S, const ScalarField& density, const ScalarField& Q) {
    ScalarField w = field::log_potential(density, S, S);
    for (std::size_t k = 0; k < w.grid().size(); ++k)
        if (S[k]) w[k] += Q[k];
    return w;
}

double default_tol_flat(const RegionMask& mask, const ScalarField& Q) {
    int i0, j0, i1, j1;
    if (!mask.bounding_box(i0, j0, i1, j1)) return 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            lo = std::min(lo, Q(i, j));
            hi = std::max(hi, Q(i, j));
        }
    return 0.05 * (hi - lo);
}

RobinEstimate robin_constant(const RegionMask& mask, const ScalarField& density, const ScalarField& Q,
                             std::optional<double> tol_flat, double tol_robin) {
    require_same_grid(mask.grid(), Q.grid(), "robin_constant");
    if (mask.interior().empty()) throw DegenerateError("droplet has no interior node; Robin constant undefined");
    const ScalarField w = frostman_field(mask, density, Q);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0, wsum = 0.0, mass = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < mask.grid().size(); ++k) {
        if (!mask[k]) continue;
        lo = std::min(lo, w[k]);
        hi = std::max(hi, w[k]);
        sum += w[k];
        wsum += w[k] * density[k];
        mass += density[k];
        ++n;
    }
    RobinEstimate r;
    r.gamma_star = sum / double(n);
    r.spread = hi - lo;
    // int (U + Q) dsigma / t, which is the double log integral plus the
    // field term, divided by the mass.
    r.energy_form = mass > 0.0 ? wsum / mass : std::numeric_limits<double>::quiet_NaN();
    r.tol_flat = tol_flat.value_or(default_tol_flat(mask, Q));
    r.tol_robin = tol_robin;
    r.flat = r.spread <= r.tol_flat;
    r.consistent = std::fabs(r.gamma_star - r.energy_form) <= 3.0 * tol_robin;
    if (!r.flat) {
        std::ostringstream os;
        os << "droplet not converged: U + Q spread " << r.spread << " exceeds tol_flat " << r.tol_flat;
        log::warn(os.str());
    }
    if (!r.consistent) {
        std::ostringstream os;
        os << "Robin constant estimates disagree: Frostman mean " << r.gamma_star << ", energy form "
           << r.energy_form;
        log::warn(os.str());
    }
    return r;
}

RobinEstimate robin_constant(const Droplet& d, const ScalarField& Q, std::optional<double> tol_flat,
                             double tol_robin) {
    return robin_constant(d.mask, d.density, Q, tol_flat, tol_robin);
}

Droplet make_droplet(const ObstacleSolution& sol, const ScalarField& laplQ, const ScalarField& Q,
                     const DropletOptions& opts) {
    const Grid2D& g = laplQ.grid();
    require_same_grid(g, sol.coincidence.grid(), "make_droplet");
    Droplet d;
    d.t = sol.t;
    d.potential_ref = opts.potential_ref;
    d.localization_ref = opts.localization_ref;
    d.mask = remove_shallow(sol.coincidence, laplQ, opts.r_shallow.value_or(3.0 * g.h),
                            opts.eps_mass.value_or(1e-6 * sol.t));
    d.density = masked_density(d.mask, laplQ);
    d.measure = sol.measure;
    d.mass = field::integrate_dA(d.density, d.mask);
    if (std::fabs(d.mass - sol.t) > sol.tol_mass) {
        std::ostringstream os;
        os << "droplet mass " << d.mass << " after shallow-point removal misses t = " << sol.t
           << " by more than tol_mass = " << sol.tol_mass;
        throw InconsistencyError(os.str());
    }
    if (d.mask.interior().empty()) {
        d.degenerate = true;
        log::warn("droplet has no interior node; flagged degenerate");
        return d;
    }
    const RobinEstimate r = robin_constant(d, Q, opts.tol_flat, opts.tol_robin);
    d.robin = r.gamma_star;
    d.spread = r.spread;
    return d;
}

double default_inequality_tol(const Droplet& d, const ScalarField& Q) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < Q.grid().size(); ++k)
        if (d.mask[k]) {
            lo = std::min(lo, Q[k]);
            hi = std::max(hi, Q[k]);
        }
    const double tol_obs = d.mask.empty() ? 0.0 : 1e-8 * (hi - lo);
    return std::max(tol_obs, 2.0 * d.spread);
}

NodeCheck verify_frostman(const Droplet& d, const ScalarField& Q, const RegionMask& off_mask,
                          std::optional<double> tol) {
    require_same_grid(d.mask.grid(), off_mask.grid(), "verify_frostman");
    if (!(off_mask & d.mask).empty()) throw PreconditionError("verify_frostman: off_mask intersects the droplet");
    NodeCheck c;
    if (off_mask.empty()) {
        c.applicable = false;
        return c;
    }
    const double tl = tol.value_or(default_inequality_tol(d, Q));
    const ScalarField u = field::log_potential(d.density, d.mask, off_mask);
    c.worst_value = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < Q.grid().size(); ++k) {
        if (!off_mask[k]) continue;
        const double margin = u[k] + Q[k] - d.robin;
        if (margin < c.worst_value) {
            c.worst_value = margin;
            c.worst_node = Q.grid().node(k);
        }
    }
    c.pass = c.worst_value >= -tl;
    return c;
}

nlohmann::json LocalDropletReport::to_json(const Grid2D& g) const {
    return {{"t", t},
            {"robin", robin},
            {"spread", spread},
            {"tol", tol},
            {"tol_flat", tol_flat},
            {"pass", pass},
            {"density_nonnegative", density_nonnegative.to_json(g)},
            {"no_shallow_points", no_shallow_points.to_json(g)},
            {"positive_mass", positive_mass.to_json(g)},
            {"flat", flat.to_json(g)},
            {"frostman_outside", frostman_outside.to_json(g)}};
}

LocalDropletReport verify_local_droplet(const RegionMask& S, const Localization& loc, const ScalarField& Q,
                                        const ScalarField& laplQ, const LocalDropletOptions& opts) {
    const Grid2D& g = Q.grid();
    require_same_grid(g, S.grid(), "verify_local_droplet");
    require_same_grid(g, laplQ.grid(), "verify_local_droplet");
    if (S.empty()) throw PreconditionError("verify_local_droplet: S is empty");
    const RegionMask sigma = loc.is_all() ? RegionMask(g, true) : loc.sigma();
    if (!S.subset_of(sigma)) throw PreconditionError("verify_local_droplet: S is not contained in Sigma");

    LocalDropletReport rep;
    const ScalarField density = masked_density(S, laplQ);
    rep.tol_flat = opts.tol_flat.value_or(default_tol_flat(S, Q));

    // (iii) mass
    rep.t = field::integrate_dA(density, S);
    rep.positive_mass.worst_value = rep.t;
    rep.positive_mass.pass = rep.t > 0.0;

    // (iv) flatness; also fixes gamma*
    const ScalarField w = frostman_field(S, density, Q);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0, qlo = lo, qhi = -lo;
    std::size_t n = 0;
    Node lo_node{}, hi_node{};
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!S[k]) continue;
        if (w[k] < lo) {
            lo = w[k];
            lo_node = g.node(k);
        }
        if (w[k] > hi) {
            hi = w[k];
            hi_node = g.node(k);
        }
        qlo = std::min(qlo, Q[k]);
        qhi = std::max(qhi, Q[k]);
        sum += w[k];
        ++n;
    }
    rep.robin = sum / double(n);
    rep.spread = hi - lo;
    rep.flat.worst_value = rep.spread;
    rep.flat.worst_node = (hi - rep.robin > rep.robin - lo) ? hi_node : lo_node;
    rep.flat.pass = rep.spread <= rep.tol_flat;
    rep.tol = opts.tol.value_or(std::max(1e-8 * (qhi - qlo), 2.0 * rep.spread));

    // (i) density sign
    rep.density_nonnegative.worst_value = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k)
        if (S[k] && laplQ[k] < rep.density_nonnegative.worst_value) {
            rep.density_nonnegative.worst_value = laplQ[k];
            rep.density_nonnegative.worst_node = g.node(k);
        }
    rep.density_nonnegative.pass = rep.density_nonnegative.worst_value >= -rep.tol;

    // (ii) shallow points
    const RegionMask kept = remove_shallow(S, laplQ, opts.r_shallow.value_or(3.0 * g.h),
                                           opts.eps_mass.value_or(1e-6 * std::max(rep.t, 0.0)));
    const RegionMask removed = S - kept;
    rep.no_shallow_points.worst_value = double(removed.count());
    if (!removed.empty()) rep.no_shallow_points.worst_node = removed.nodes().front();
    rep.no_shallow_points.pass = removed.empty();

    // (v) Frostman inequality on Sigma \ S
    const RegionMask outside = sigma - S;
    if (outside.empty()) {
        rep.frostman_outside.applicable = false;
    } else {
        const ScalarField u = field::log_potential(density, S, outside);
        rep.frostman_outside.worst_value = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!outside[k]) continue;
            const double margin = u[k] + Q[k] - rep.robin;
            if (margin < rep.frostman_outside.worst_value) {
                rep.frostman_outside.worst_value = margin;
                rep.frostman_outside.worst_node = g.node(k);
            }
        }
        rep.frostman_outside.pass = rep.frostman_outside.worst_value >= -rep.tol;
    }

    rep.pass = rep.density_nonnegative.pass && rep.no_shallow_points.pass && rep.positive_mass.pass &&
               rep.flat.pass && rep.frostman_outside.pass;
    return rep;
}

ScalarField droplet_obstacle(const Droplet& d, const RegionMask& targets) {
    ScalarField q = field::log_potential(d.density, d.mask, targets);
    for (std::size_t k = 0; k < q.grid().size(); ++k)
        if (targets[k]) q[k] = d.robin - q[k];
    return q;
}

nlohmann::json DominationReport::to_json(const Grid2D& g) const {
    return {{"dominated", dominated}, {"worst_excess", worst_excess}, {"witness", node_json(g, witness)},
            {"tol", tol}};
}

DominationReport check_domination(const Droplet& s1, const Droplet& s2, const ScalarField& Q,
                                  std::optional<double> tol) {
    require_same_grid(s1.mask.grid(), s2.mask.grid(), "check_domination");
    require_same_grid(s1.mask.grid(), Q.grid(), "check_domination");
    if (!s1.mask.subset_of(s2.mask.dilated(1)))
        throw PreconditionError("check_domination: S1 is not contained in S2 (one-cell tolerance)");
    DominationReport rep;
    rep.tol = tol.value_or(default_inequality_tol(s1, Q));
    const ScalarField qhat = droplet_obstacle(s1, s2.mask);
    rep.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < Q.grid().size(); ++k) {
        if (!s2.mask[k]) continue;
        const double excess = qhat[k] - Q[k];
        if (excess > rep.worst_excess) {
            rep.worst_excess = excess;
            rep.witness = Q.grid().node(k);
        }
    }
    rep.dominated = rep.worst_excess <= rep.tol;
    return rep;
}

nlohmann::json HullInclusionReport::to_json() const {
    return {{"fraction", fraction}, {"boundary_nodes", boundary_nodes}, {"pass", pass}};
}

HullInclusionReport hull_boundary_inclusion(const RegionMask& s_star_t0, const RegionMask& s_t) {
    require_same_grid(s_star_t0.grid(), s_t.grid(), "hull_boundary_inclusion");
    HullInclusionReport rep;
    const RegionMask b = field::polynomial_hull(s_star_t0).boundary();
    rep.boundary_nodes = b.count();
    if (rep.boundary_nodes == 0) return rep;
    const std::size_t inside = (b & s_t.dilated(1)).count();
    rep.fraction = double(inside) / double(rep.boundary_nodes);
    rep.pass = inside == rep.boundary_nodes;
    return rep;
}

NodeCheck dbar_boundary_check(const RegionMask& S, const ScalarField& Q, const ScalarField& laplQ,
                              std::optional<double> bound) {
    require_same_grid(S.grid(), Q.grid(), "dbar_boundary_check");
    NodeCheck c;
    const RegionMask inner = S.interior();
    if (inner.empty()) {
        c.applicable = false;
        return c;
    }
    const ScalarField w = frostman_field(S, masked_density(S, laplQ), Q);
    for (const Node n : inner.nodes()) {
        const double m = std::abs(field::dbar(w, n.i, n.j));
        if (m > c.worst_value) {
            c.worst_value = m;
            c.worst_node = n;
        }
    }
    c.pass = c.worst_value <= bound.value_or(5.0 * S.grid().h);
    return c;
}

}  // namespace droplab
