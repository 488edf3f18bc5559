#include <doctest.h>

#include <cmath>
#include <map>

#include "droplab/droplet.hpp"
#include "droplab/field.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace droplab;

namespace {

struct Quadratic {
    Grid2D g;
    SampledPotential sp;
    std::map<double, ObstacleSolution> sols;
    std::map<double, Droplet> drops;

    explicit Quadratic(double h) : g(Grid2D::centered(2.5, h)), sp(sample_potential(PotentialSpec::quadratic(), g)) {}

    const Droplet& droplet(double t) {
        if (!drops.count(t)) {
            sols.emplace(t, solve_obstacle(sp.Q, sp.laplQ, Localization::all(), t));
            drops.emplace(t, make_droplet(sols.at(t), sp.laplQ, sp.Q));
        }
        return drops.at(t);
    }
};

Quadratic& coarse() {
    static Quadratic q(0.05);
    return q;
}

Quadratic& fine() {
    static Quadratic q(0.02);
    return q;
}

}  // namespace

TEST_CASE("quadratic droplet at t=1") {
    auto& q = coarse();
    const Droplet& d = q.droplet(1.0);
    CHECK(support::hausdorff_to_disk(d.mask, {0, 0}, 1.0) <= 2.0 * q.g.h);
    for (const Node& n : d.mask.nodes()) CHECK(d.density(n.i, n.j) == 1.0);
    CHECK(d.robin == doctest::Approx(oracle::quadratic_robin(1.0)).epsilon(0.02));
    CHECK(d.spread <= 0.03);
    CHECK(std::fabs(d.mass - 1.0) <= q.sols.at(1.0).tol_mass);
    const RobinEstimate r = robin_constant(d, q.sp.Q);
    CHECK(r.energy_form == doctest::Approx(1.0).epsilon(0.03));
    CHECK(r.flat);
    CHECK(r.consistent);
    CHECK_FALSE(d.degenerate);
}

TEST_CASE("Robin constant follows t - t log t") {
    auto& q = coarse();
    for (double t : {0.25, 0.5}) {
        INFO("t = " << t);
        CHECK(q.droplet(t).robin == doctest::Approx(oracle::quadratic_robin(t)).epsilon(0.02));
    }
}

TEST_CASE("Frostman inequality outside the droplet") {
    auto& q = fine();
    const Droplet& d = q.droplet(1.0);
    auto margin_at = [&](Complex z) {
        const Node n = q.g.nearest(z);
        RegionMask off(q.g);
        off.set(n.i, n.j, true);
        return verify_frostman(d, q.sp.Q, off);
    };
    // Point charge outside the disk: U = -log|z|^2, so the margin at 2 is
    // 4 - log 4 - 1.
    const NodeCheck at2 = margin_at({2.0, 0.0});
    CHECK(at2.pass);
    CHECK(at2.worst_value == doctest::Approx(3.0 - std::log(4.0)).epsilon(0.03 / 1.614));
    CHECK(margin_at({1.1, 0.0}).worst_value > 0.0);
    CHECK(std::fabs(margin_at({1.0 + 2 * q.g.h, 0.0}).worst_value) < 0.02);
    CHECK(verify_frostman(d, q.sp.Q, d.mask.complement()).pass);
    CHECK_THROWS_AS(verify_frostman(d, q.sp.Q, d.mask), PreconditionError);
}

TEST_CASE("degenerate droplets") {
    auto& q = coarse();
    RegionMask single(q.g);
    const Node o = q.g.nearest({0, 0});
    single.set(o.i, o.j, true);
    CHECK_THROWS_AS(robin_constant(single, q.sp.laplQ, q.sp.Q), DegenerateError);
    CHECK_THROWS_AS(solve_obstacle(q.sp.Q, q.sp.laplQ, Localization::all(), 1e-4), DegenerateError);
}

TEST_CASE("local droplet characterization") {
    auto& q = coarse();
    const RegionMask disk = RegionMask::disk(q.g, {0, 0}, 1.0);
    const LocalDropletReport ok = verify_local_droplet(disk, Localization::all(), q.sp.Q, q.sp.laplQ);
    CHECK(ok.pass);
    CHECK(ok.density_nonnegative.pass);
    CHECK(ok.flat.pass);
    CHECK(ok.frostman_outside.pass);
    CHECK(ok.t == doctest::Approx(1.0).epsilon(0.02));

    const RegionMask ann = RegionMask::annulus(q.g, {0, 0}, 0.5, std::sqrt(1.25));
    const LocalDropletReport bad = verify_local_droplet(ann, Localization::all(), q.sp.Q, q.sp.laplQ);
    CHECK_FALSE(bad.pass);
    CHECK_FALSE(bad.flat.pass);
    // U + Q on the annulus varies by 0.25 log 5 between the two circles.
    CHECK(bad.spread == doctest::Approx(0.25 * std::log(5.0)).epsilon(0.05));
}

TEST_CASE("dbar of U + Q vanishes inside a droplet only") {
    auto& q = fine();
    const Droplet& d = q.droplet(1.0);
    CHECK(dbar_boundary_check(d.mask, q.sp.Q, q.sp.laplQ).pass);
    const RegionMask ann = RegionMask::annulus(q.g, {0, 0}, 0.5, std::sqrt(1.25));
    CHECK_FALSE(dbar_boundary_check(ann, q.sp.Q, q.sp.laplQ).pass);
}

TEST_CASE("droplets of one potential are dominated in t") {
    auto& q = coarse();
    const DominationReport r = check_domination(q.droplet(0.5), q.droplet(1.0), q.sp.Q);
    CHECK(r.dominated);
    CHECK(r.worst_excess <= r.tol);
    CHECK_THROWS_AS(check_domination(q.droplet(1.0), q.droplet(0.25), q.sp.Q), PreconditionError);
}

TEST_CASE("hull boundary of an earlier coincidence set lies in later droplets") {
    auto& q = coarse();
    q.droplet(0.25);
    const HullInclusionReport r = hull_boundary_inclusion(q.sols.at(0.25).coincidence, q.droplet(0.5).mask);
    CHECK(r.pass);
    CHECK(r.fraction == 1.0);
    CHECK(r.boundary_nodes > 0);
}

TEST_CASE("droplet obstacle rebuilt from the potential matches the solver") {
    auto& q = coarse();
    const Droplet& d = q.droplet(1.0);
    const ScalarField rebuilt = droplet_obstacle(d, RegionMask(q.g, true));
    const ObstacleSolution& s = q.sols.at(1.0);
    // Far from the droplet the nodal mask area differs from t by O(h), so
    // compare near the droplet only.
    double worst = 0.0;
    for (int j = 0; j < q.g.ny; ++j)
        for (int i = 0; i < q.g.nx; ++i)
            if (std::abs(q.g.z(i, j)) <= 1.2) worst = std::max(worst, std::fabs(rebuilt(i, j) - s.qhat(i, j)));
    CHECK(worst < 0.02);
}
