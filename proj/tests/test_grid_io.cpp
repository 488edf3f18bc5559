#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "droplab/grid.hpp"
#include "droplab/io.hpp"

using namespace droplab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("droplab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("centered grid puts nodes on the box edges and the origin") {
    const Grid2D g = Grid2D::centered(2.5, 0.02);
    CHECK(g.nx == 251);
    CHECK(g.ny == 251);
    CHECK(g.x(0) == doctest::Approx(-2.5));
    CHECK(g.x(g.nx - 1) == doctest::Approx(2.5));
    const Node o = g.nearest({0.0, 0.0});
    CHECK(std::abs(g.z(o)) < 1e-12);
    CHECK(g.cell_dA() == doctest::Approx(0.02 * 0.02 / std::numbers::pi));
}

TEST_CASE("grid construction rejects bad geometry") {
    CHECK_THROWS_AS(Grid2D::make(0, 0, -1.0, 20, 20), ConfigurationError);
    CHECK_THROWS_AS(Grid2D::make(0, 0, 0.1, 4, 20), ConfigurationError);
    CHECK_THROWS_AS(Grid2D::centered(1.0, 0.0), ConfigurationError);
}

TEST_CASE("index and node round trip") {
    const Grid2D g = Grid2D::make(-1, -2, 0.1, 21, 31);
    for (std::size_t k : {std::size_t(0), std::size_t(17), g.size() - 1}) CHECK(g.index(g.node(k)) == k);
    CHECK(g.index(3, 2) == std::size_t(2 * 21 + 3));
}

TEST_CASE("mask algebra") {
    const Grid2D g = Grid2D::centered(1.0, 0.1);
    const RegionMask a = RegionMask::disk(g, {0, 0}, 0.5);
    const RegionMask b = RegionMask::disk(g, {0.3, 0}, 0.5);
    CHECK((a & b).subset_of(a));
    CHECK(a.subset_of(a | b));
    CHECK(((a - b) & b).empty());
    CHECK(a.subset_of(a.dilated()));
    CHECK(a.interior().subset_of(a));
    CHECK((a.interior() | a.boundary()) == a);
    CHECK(a.complement().count() + a.count() == g.size());
    int i0, j0, i1, j1;
    REQUIRE(a.bounding_box(i0, j0, i1, j1));
    CHECK(i0 == 5);
    CHECK(i1 == 15);
    CHECK_FALSE(RegionMask(g).bounding_box(i0, j0, i1, j1));
}

TEST_CASE("disk mask area converges to pi r^2") {
    const Grid2D g = Grid2D::centered(1.5, 0.01);
    const RegionMask d = RegionMask::disk(g, {0, 0}, 1.0);
    CHECK(double(d.count()) * g.h * g.h == doctest::Approx(std::numbers::pi).epsilon(0.01));
}

TEST_CASE("field dump round trip") {
    const fs::path dir = scratch_dir("field");
    const Grid2D g = Grid2D::make(-1.0, 0.5, 0.05, 17, 23);
    const ScalarField f = ScalarField::sample(g, [](Complex z) { return std::sin(z.real()) * z.imag(); });
    io::write_field(dir, "f", f);
    CHECK(fs::file_size(dir / "f.f64") == g.size() * sizeof(double));
    const ScalarField back = io::read_field(dir / "f.json");
    CHECK(back.grid() == g);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(back[k] == f[k]);
    const ScalarField stem = io::read_field(dir / "f");
    CHECK(stem.grid() == g);
    const auto side = nlohmann::json::parse(std::ifstream(dir / "f.json"));
    for (const char* key : {"nx", "ny", "x0", "y0", "h", "name"}) CHECK(side.contains(key));
}

TEST_CASE("mask dump is binary PGM with maxval 255") {
    const fs::path dir = scratch_dir("mask");
    const Grid2D g = Grid2D::centered(1.0, 0.1);
    const RegionMask m = RegionMask::annulus(g, {0, 0}, 0.3, 0.8);
    io::write_mask(dir, "m", m);
    std::ifstream in(dir / "m.pgm", std::ios::binary);
    std::string magic;
    int w, h, maxval;
    in >> magic >> w >> h >> maxval;
    CHECK(magic == "P5");
    CHECK(w == g.nx);
    CHECK(h == g.ny);
    CHECK(maxval == 255);
    const RegionMask back = io::read_mask(dir / "m.pgm");
    CHECK(back == m);
}

TEST_CASE("reading a missing field reports an io error") {
    CHECK_THROWS_AS(io::read_field("/nonexistent/droplab/none.json"), IoError);
}
