#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "droplab/gas.hpp"
#include "droplab/rng.hpp"
#include "oracles.hpp"

using namespace droplab;

TEST_CASE("energy of small configurations") {
    const auto Q = PotentialSpec::quadratic();
    CHECK(energy({{0, 0}, {1, 0}}, Q, 1.0) == doctest::Approx(1.0));
    CHECK(energy({{0, 0}, {2, 0}}, Q, 1.0) == doctest::Approx(4.0 - 2.0 * std::log(2.0)));
    CHECK(energy({{0.5, 0.5}, {0.5, 0.5}}, Q, 1.0) == std::numeric_limits<double>::infinity());
    CHECK(rescaled_energy({{0, 0}, {1, 0}}, Q, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("energy is bitwise invariant under permutation") {
    const auto Q = PotentialSpec::two_well(1.0);
    CounterRng rng(7);
    PointConfiguration z(9);
    for (auto& p : z) p = {rng.normal(), rng.normal()};
    const double e = energy(z, Q, 3.0);
    for (int k = 0; k < 20; ++k) {
        std::next_permutation(z.begin(), z.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
        CHECK(energy(z, Q, 3.0) == e);
    }
}

TEST_CASE("sampler is deterministic in the seed") {
    McmcConfig c;
    c.n = 3;
    c.m = 3.0;
    c.burn_in = 200;
    c.n_samples = 300;
    c.seed = 11;
    const auto Q = PotentialSpec::quadratic();
    const auto a = mcmc_sample(c, Q);
    const auto b = mcmc_sample(c, Q);
    REQUIRE(a.samples.size() == 300);
    CHECK(a.samples == b.samples);
    c.seed = 12;
    CHECK(mcmc_sample(c, Q).samples != a.samples);
    CHECK(a.acceptance_rate > 0.2);
    CHECK(samples_csv(a).rfind("sample_index,particle_index,x,y", 0) == 0);
}

TEST_CASE("one particle samples the Gaussian law") {
    McmcConfig c;
    c.n = 1;
    c.m = 1.0;
    c.n_samples = 20000;
    c.thinning = 2;
    c.seed = 5;
    const auto run = mcmc_sample(c, PotentialSpec::quadratic());
    std::vector<double> r;
    for (const auto& s : run.samples) r.push_back(std::abs(s[0]));
    CHECK(oracle::ks_distance(r, oracle::n1_radial_cdf) <= 0.02);

    const Grid2D g = Grid2D::centered(3.0, 0.1);
    const auto [mean, var] = linear_statistic(run, ScalarField(g, 1.0));
    CHECK(mean == 1.0);
    CHECK(var == 0.0);
    const ScalarField hist = intensity_histogram(run, g);
    double total = 0.0;
    for (double v : hist.values()) total += v * g.cell_dA();
    // Samples beyond the grid (probability e^-9 per draw) are not counted.
    CHECK(total <= 1.0 + 1e-12);
    CHECK(total >= 0.999);
}

TEST_CASE("sampler rejects invalid configurations") {
    McmcConfig c;
    c.n = 0;
    CHECK_THROWS_AS(mcmc_sample(c, PotentialSpec::quadratic()), ConfigurationError);
    c.n = 2;
    c.beta = -1.0;
    CHECK_THROWS_AS(mcmc_sample(c, PotentialSpec::quadratic()), ConfigurationError);
}

TEST_CASE("Fekete points for one and two particles") {
    const auto Q = PotentialSpec::quadratic();
    const auto one = fekete_minimize(1, 1.0, Q, 3);
    REQUIRE(one.points.size() == 1);
    CHECK(std::abs(one.points[0]) < 1e-6);
    for (double m : {1.0, 2.0, 4.0}) {
        const auto two = fekete_minimize(2, m, Q, 3);
        CHECK(std::abs(two.points[0] - two.points[1]) == doctest::Approx(oracle::pair_distance(m)).epsilon(1e-6));
        CHECK(std::abs(two.points[0] + two.points[1]) < 1e-6);
    }
}

TEST_CASE("Fekete energies with m = n - 1 increase toward gamma") {
    // With m = n - 1, I# is an average over the n(n-1)/2 pairs of a weighted
    // energy that tends to gamma = 3/2 from below.
    const auto Q = PotentialSpec::quadratic();
    double prev = -std::numeric_limits<double>::infinity();
    for (int n = 3; n <= 8; ++n) {
        const auto f = fekete_minimize(n, n - 1.0, Q, 1);
        INFO("n = " << n);
        CHECK(f.rescaled >= prev - 1e-9);
        CHECK(f.rescaled <= 1.5);
        CHECK_FALSE(f.line_search_failed);
        prev = f.rescaled;
    }
}

TEST_CASE("aggregation check is nonnegative for beta <= 2") {
    CounterRng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Atom> atoms(1 + trial % 7);
        for (auto& a : atoms) a = {{rng.normal(), rng.normal()}, rng.uniform()};
        const double beta = 0.1 + 1.9 * rng.uniform();
        CHECK(aggregation_check(atoms, beta) >= -1e-12);
    }
    CHECK(aggregation_check({{{0, 0}, 1.0}, {{1, 0}, 1.0}}, 2.0) == doctest::Approx(2.0));
    CHECK(aggregation_check({{{0, 0}, 1.0}}, 1.5) == 0.0);
}

TEST_CASE("one-point aggregation test") {
    const std::vector<Atom> atoms{{{0, 0}, 1.0}, {{1, 0}, 1.0}};
    const auto t = aggregation_test(atoms, 2.0, {0.5, 0.0});
    CHECK(t.pair_side == doctest::Approx(0.5));
    CHECK(t.field_side == doctest::Approx(0.25 * 2.0));
    CHECK(t.holds());
}
