#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "droplab/field.hpp"
#include "droplab/io.hpp"
#include "droplab/potential.hpp"

using namespace droplab;

TEST_CASE("closed-form Laplacians") {
    const Grid2D g = Grid2D::centered(2.0, 0.05);
    CHECK(PotentialSpec::quadratic().laplacian({0.7, -0.2}) == 1.0);
    CHECK(PotentialSpec::anisotropic(0.5).laplacian({0.3, 1.1}) == doctest::Approx(1.0));
    CHECK(PotentialSpec::quartic(0.0).laplacian({0.6, 0.8}) == doctest::Approx(2.0));
    CHECK(PotentialSpec::two_well(1.0).laplacian({0.6, 0.8}) == doctest::Approx(1.0));
    const SampledPotential sp = sample_potential(PotentialSpec::quadratic(), g);
    for (double v : sp.laplQ.values()) CHECK(v == 1.0);
}

TEST_CASE("stencil Laplacian agrees with the closed forms to second order") {
    const PotentialSpec specs[] = {PotentialSpec::quadratic(), PotentialSpec::anisotropic(0.3),
                                   PotentialSpec::quartic(-0.5), PotentialSpec::two_well(1.0)};
    for (const auto& spec : specs) {
        double err[2];
        int k = 0;
        for (double h : {0.04, 0.02}) {
            const Grid2D g = Grid2D::centered(2.0, h);
            const SampledPotential sp = sample_potential(spec, g);
            const ScalarField L = field::laplacian(sp.Q);
            double worst = 0.0;
            for (int j = 1; j < g.ny - 1; ++j)
                for (int i = 1; i < g.nx - 1; ++i) worst = std::max(worst, std::fabs(L(i, j) - sp.laplQ(i, j)));
            err[k++] = worst;
        }
        INFO(spec.id());
        // Quadratic families are exact; others must shrink like h^2.
        CHECK((err[1] < 1e-9 || err[1] < 0.3 * err[0]));
    }
}

TEST_CASE("family values and gradients") {
    const auto tw = PotentialSpec::two_well(1.0);
    CHECK(tw.value({1.0, 0.0}) == 0.0);
    CHECK(tw.value({-1.0, 0.0}) == 0.0);
    const auto q = PotentialSpec::quartic(0.5);
    CHECK(q.value({1.0, 0.0}) == doctest::Approx(1.0));
    const Complex z(0.3, -0.7);
    const double e = 1e-6;
    for (const auto& spec : {PotentialSpec::anisotropic(0.3), q, tw}) {
        const Complex gr = spec.gradient(z);
        const double dx = (spec.value(z + Complex(e, 0)) - spec.value(z - Complex(e, 0))) / (2 * e);
        const double dy = (spec.value(z + Complex(0, e)) - spec.value(z - Complex(0, e))) / (2 * e);
        CHECK(gr.real() == doctest::Approx(dx).epsilon(1e-6));
        CHECK(gr.imag() == doctest::Approx(dy).epsilon(1e-6));
    }
    CHECK_THROWS_AS(PotentialSpec::anisotropic(1.0), ConfigurationError);
    CHECK_THROWS_AS(PotentialSpec::two_well(0.0), ConfigurationError);
}

TEST_CASE("growth check") {
    const Grid2D g3 = Grid2D::centered(3.0, 0.05);
    CHECK(check_growth(PotentialSpec::quadratic(), g3, 1.0).pass);
    CHECK_FALSE(check_growth(PotentialSpec::quadratic(), g3, 1e6).pass);
    CHECK(check_growth(PotentialSpec::two_well(1.0), g3, 0.1).pass);
    // R^2 - t log R^2 increasing at R means 2R - 2t/R > 0, i.e. t < R^2.
    for (double t : {0.5, 2.0, 8.0}) CHECK(check_growth(PotentialSpec::quadratic(), g3, t).pass == (t < 9.0));
}

TEST_CASE("grid-sampled potentials") {
    const Grid2D g = Grid2D::centered(2.0, 0.05);
    const ScalarField Q = ScalarField::sample(g, [](Complex z) { return std::norm(z); });
    CHECK_THROWS_AS(PotentialSpec::grid_sampled(Q, 0.0), ConfigurationError);
    const auto spec = PotentialSpec::grid_sampled(Q, 2.0);
    CHECK(spec.value({0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-2));
    CHECK_THROWS(spec.laplacian({0, 0}));
    const SampledPotential sp = sample_potential(spec, g);
    CHECK(sp.laplQ(10, 10) == doctest::Approx(1.0));
    CHECK(sp.laplQ(0, 0) == doctest::Approx(1.0));
    CHECK_FALSE(check_growth(spec, g, 3.0).t_max_pass);

    const auto dir = std::filesystem::temp_directory_path() / "droplab_test_potential";
    std::filesystem::create_directories(dir);
    io::write_field(dir, "q", Q);
    const auto from_file = PotentialSpec::grid_sampled_file((dir / "q.json").string(), 2.0);
    CHECK(from_file.value({0.25, 0.0}) == doctest::Approx(spec.value({0.25, 0.0})));
    CHECK_THROWS_AS(PotentialSpec::grid_sampled_file((dir / "missing.json").string(), 1.0), IoError);
}

TEST_CASE("localization") {
    const Grid2D g = Grid2D::centered(2.5, 0.05);
    const ScalarField Q = sample_potential(PotentialSpec::quadratic(), g).Q;
    const auto all = localize(Q, Localization::all());
    CHECK(all.constrained.count() == g.size());
    const auto disk = localize(Q, Localization::region(RegionMask::disk(g, {0, 0}, 1.0)));
    CHECK_FALSE(disk.constrained(g.nearest({2.0, 0.0}).i, g.nearest({2.0, 0.0}).j));
    const auto half = localize(Q, Localization::region(RegionMask::from_predicate(g, [](Complex z) { return z.real() < 0; })));
    const Node n = g.nearest({1.0, 0.0});
    CHECK_FALSE(half.constrained(n.i, n.j));
    CHECK_THROWS_AS(localize(Q, Localization::region(RegionMask(g))), PreconditionError);
}
