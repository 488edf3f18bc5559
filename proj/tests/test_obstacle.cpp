#include <doctest.h>

#include <cmath>

#include "droplab/field.hpp"
#include "droplab/obstacle.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace droplab;

namespace {

struct Setup {
    Grid2D g;
    SampledPotential sp;
    explicit Setup(const PotentialSpec& spec, double half = 2.5, double h = 0.05)
        : g(Grid2D::centered(half, h)), sp(sample_potential(spec, g)) {}
};

const Setup& quadratic() {
    static const Setup s(PotentialSpec::quadratic());
    return s;
}

const ObstacleSolution& quadratic_t1() {
    static const ObstacleSolution s = solve_obstacle(quadratic().sp.Q, quadratic().sp.laplQ, Localization::all(), 1.0);
    return s;
}

// Recomputes the complementarity disjunction node by node.
double recheck_complementarity(const ObstacleSolution& s, const ScalarField& Q) {
    const Grid2D& g = Q.grid();
    std::size_t ok = 0, total = 0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            const double u = s.qhat(i, j);
            const double avg = 0.25 * (s.qhat(i + 1, j) + s.qhat(i - 1, j) + s.qhat(i, j + 1) + s.qhat(i, j - 1));
            const bool below = u <= Q(i, j) + s.tol_obs;
            const bool contact = Q(i, j) - u <= s.tol_obs;
            const bool harmonic = std::fabs(u - avg) <= s.tol_obs;
            ++total;
            if (below && (contact || harmonic)) ++ok;
        }
    return double(ok) / double(total);
}

}  // namespace

TEST_CASE("quadratic t=1 reproduces the radial closed form") {
    const auto& s = quadratic_t1();
    const auto& g = quadratic().g;
    CHECK(s.boundary_constant == doctest::Approx(oracle::quadratic_boundary_constant(1.0)).epsilon(0.02));
    CHECK(support::hausdorff_to_disk(s.coincidence, {0, 0}, 1.0) <= 2.0 * g.h);
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            worst = std::max(worst, std::fabs(s.qhat(i, j) - oracle::quadratic_qhat(std::abs(g.z(i, j)), 1.0)));
    CHECK(worst < 0.03);
    const Node two = g.nearest({2.0, 0.0});
    CHECK(s.qhat(two.i, two.j) == doctest::Approx(std::log(4.0) + 1.0).epsilon(0.01));
    CHECK(std::fabs(s.mass - 1.0) <= s.tol_mass);
    CHECK(s.mass_monotone);
}

TEST_CASE("complementarity certificate holds at every interior node") {
    const auto& s = quadratic_t1();
    CHECK(s.complementarity_fraction == 1.0);
    CHECK(recheck_complementarity(s, quadratic().sp.Q) == 1.0);
    const auto& g = quadratic().g;
    ScalarField bad = quadratic().sp.Q;
    for (auto& v : bad.values()) v += 1.0;
    CHECK(complementarity_fraction(bad, quadratic().sp.Q, RegionMask(g, true), s.tol_obs, 0, 0, g.nx, g.ny) < 1.0);
}

TEST_CASE("droplet radius scales like sqrt(t)") {
    const auto& q = quadratic();
    const auto s = solve_obstacle(q.sp.Q, q.sp.laplQ, Localization::all(), 0.25);
    CHECK(support::hausdorff_to_disk(s.coincidence, {0, 0}, 0.5) <= 2.0 * q.g.h);
    CHECK(s.boundary_constant == doctest::Approx(oracle::quadratic_boundary_constant(0.25)).epsilon(0.03));
    // Monotone in t: qhat and the coincidence set grow.
    const auto& big = quadratic_t1();
    for (std::size_t k = 0; k < q.g.size(); ++k) CHECK(s.qhat[k] <= big.qhat[k] + big.tol_obs);
    CHECK(s.coincidence.subset_of(big.coincidence.dilated(1)));
}

TEST_CASE("a localization containing the droplet does not change it") {
    const auto& q = quadratic();
    const auto loc = Localization::region(RegionMask::disk(q.g, {0, 0}, 1.6), "disk(1.6)");
    const auto s = solve_obstacle(q.sp.Q, q.sp.laplQ, loc, 1.0);
    const auto& ref = quadratic_t1();
    CHECK(s.coincidence.subset_of(ref.coincidence.dilated(1)));
    CHECK(ref.coincidence.subset_of(s.coincidence.dilated(1)));
}

TEST_CASE("the minimum of Q is always in the coincidence set") {
    const auto& q = quadratic();
    const Node o = q.g.nearest({0, 0});
    for (double t : {0.05, 0.3}) {
        const auto s = solve_obstacle(q.sp.Q, q.sp.laplQ, Localization::all(), t);
        CHECK(s.coincidence(o.i, o.j));
    }
}

TEST_CASE("convex potentials give simply connected droplets") {
    const Setup a(PotentialSpec::anisotropic(0.5));
    const auto s = solve_obstacle(a.sp.Q, a.sp.laplQ, Localization::all(), 0.5);
    CHECK(field::connected_components(s.coincidence).size() == 1);
    CHECK(field::polynomial_hull(s.coincidence) == s.coincidence);
}

TEST_CASE("solver errors") {
    const auto& q = quadratic();
    CHECK_THROWS_AS(solve_obstacle(q.sp.Q, q.sp.laplQ, Localization::all(), 2.0 * q.g.h * q.g.h), DegenerateError);
    CHECK_THROWS_AS(solve_obstacle(q.sp.Q, q.sp.laplQ, Localization::all(), 6.0), BoxTooSmallError);
    CHECK_THROWS_AS(solve_obstacle(q.sp.Q, q.sp.laplQ, Localization::all(), -1.0), PreconditionError);
}

TEST_CASE("shallow point removal") {
    const Grid2D g = Grid2D::centered(6.0, 0.1);
    const RegionMask disk = RegionMask::disk(g, {0, 0}, 1.0);
    ScalarField lap(g, 1.0);
    CHECK(remove_shallow(disk, lap, 0.3, 1e-6) == disk);

    RegionMask with_block = disk;
    const Node c = g.nearest({5.0, 0.0});
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            with_block.set(c.i + di, c.j + dj, true);
            lap(c.i + di, c.j + dj) = 0.0;
        }
    CHECK(remove_shallow(with_block, lap, 0.3, 1e-6) == disk);
    CHECK(remove_shallow(RegionMask(g), lap, 0.3, 1e-6).empty());
    CHECK_THROWS_AS(remove_shallow(disk, lap, 0.1, 1e-6), PreconditionError);
}
