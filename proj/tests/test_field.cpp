#include <doctest.h>

#include <cmath>

#include "droplab/field.hpp"
#include "oracles.hpp"

using namespace droplab;

TEST_CASE("integrate_dA of 1 over the unit disk is about 1") {
    const Grid2D g = Grid2D::centered(1.5, 0.01);
    const RegionMask d = RegionMask::disk(g, {0, 0}, 1.0);
    CHECK(field::integrate_dA(ScalarField(g, 1.0), d) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(field::integrate_dA(ScalarField(g, 1.0), RegionMask(g)) == 0.0);
}

TEST_CASE("quarter Laplacian of |z|^2 is 1 and the boundary ring is undefined") {
    const Grid2D g = Grid2D::centered(1.0, 0.05);
    const ScalarField L = field::laplacian(ScalarField::sample(g, [](Complex z) { return std::norm(z); }));
    CHECK_FALSE(L.defined(0, 0));
    CHECK_FALSE(L.defined(g.nx - 1, 5));
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) CHECK(L(i, j) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("self-cell radius matches a direct cell average") {
    CHECK(field::self_cell_log_radius() == doctest::Approx(oracle::unit_cell_mean_log()).epsilon(1e-5));
}

TEST_CASE("log potential of a uniform disk matches the closed form") {
    const Grid2D g = Grid2D::centered(1.6, 0.02);
    const RegionMask S = RegionMask::disk(g, {0, 0}, 1.0);
    const ScalarField U = field::log_potential(ScalarField(g, 1.0), S, RegionMask(g, true));
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            worst = std::max(worst, std::fabs(U(i, j) - oracle::disk_log_potential(g.z(i, j), 1.0)));
    // Staircase boundary error is O(h).
    CHECK(worst < 2.0 * g.h);
}

TEST_CASE("log potential leaves non-target nodes undefined") {
    const Grid2D g = Grid2D::centered(1.0, 0.1);
    const RegionMask S = RegionMask::disk(g, {0, 0}, 0.5);
    const ScalarField U = field::log_potential(ScalarField(g, 1.0), S, S);
    CHECK(U.defined(g.index(g.nearest({0, 0}))));
    CHECK_FALSE(U.defined(g.index(g.nearest({0.9, 0.9}))));
}

TEST_CASE("Laplacian of the log potential recovers minus the density") {
    const Grid2D g = Grid2D::centered(1.5, 0.02);
    const RegionMask S = RegionMask::disk(g, {0, 0}, 1.0);
    const ScalarField L = field::laplacian(field::log_potential(ScalarField(g, 1.0), S, RegionMask(g, true)));
    double worst = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            const double r = std::abs(g.z(i, j));
            if (std::fabs(r - 1.0) < 3.0 * g.h) continue;
            worst = std::max(worst, std::fabs(L(i, j) + (S(i, j) ? 1.0 : 0.0)));
        }
    CHECK(worst < 0.05);
}

TEST_CASE("dbar of |z|^2 is z") {
    const Grid2D g = Grid2D::centered(1.0, 0.01);
    const ScalarField f = ScalarField::sample(g, [](Complex z) { return std::norm(z); });
    const Node n = g.nearest({0.3, -0.4});
    const Complex d = field::dbar(f, n.i, n.j);
    CHECK(d.real() == doctest::Approx(g.z(n).real()).epsilon(1e-9));
    CHECK(d.imag() == doctest::Approx(g.z(n).imag()).epsilon(1e-9));
}

TEST_CASE("components come largest first") {
    const Grid2D g = Grid2D::centered(2.0, 0.05);
    const RegionMask a = RegionMask::disk(g, {-1, 0}, 0.5) | RegionMask::disk(g, {1, 0}, 0.3);
    const auto comps = field::connected_components(a);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].count() > comps[1].count());
    CHECK((comps[0] | comps[1]) == a);
}

TEST_CASE("polynomial hull fills holes") {
    const Grid2D g = Grid2D::centered(1.5, 0.05);
    const RegionMask ann = RegionMask::annulus(g, {0, 0}, 0.4, 1.0);
    const RegionMask hull = field::polynomial_hull(ann);
    const RegionMask filled = RegionMask::disk(g, {0, 0}, 1.0) | ann;
    CHECK(hull == filled);
    CHECK(ann.subset_of(hull));
    CHECK_THROWS_AS(field::polynomial_hull(RegionMask(g, true)), PreconditionError);
}
