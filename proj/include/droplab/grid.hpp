#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "droplab/errors.hpp"

namespace droplab {

using Complex = std::complex<double>;

/// Integer node address on a grid.
struct Node {
    int i = 0;
    int j = 0;
    friend bool operator==(const Node&, const Node&) = default;
};

/// Uniform square-cell discretization of a box in the plane.
///
/// Node (i, j) sits at (x0 + i*h, y0 + j*h); storage is row-major with j
/// selecting the row. Cells are the closed squares of side h centred on
/// nodes, so sets and integrals are unions/sums over those cells.
struct Grid2D {
    double x0 = 0.0;
    double y0 = 0.0;
    double h = 0.0;
    int nx = 0;
    int ny = 0;

    static constexpr int kMinNodes = 16;

    /// Validated constructor; throws ConfigurationError on bad geometry.
    static Grid2D make(double x0, double y0, double h, int nx, int ny);
    /// Square box [-half_width, half_width]^2 with spacing h. The node count
    /// is rounded so that the box edges are nodes.
    static Grid2D centered(double half_width, double h);

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
    std::size_t index(Node n) const { return index(n.i, n.j); }
    Node node(std::size_t idx) const {
        return {static_cast<int>(idx % static_cast<std::size_t>(nx)),
                static_cast<int>(idx / static_cast<std::size_t>(nx))};
    }
    double x(int i) const { return x0 + i * h; }
    double y(int j) const { return y0 + j * h; }
    Complex z(int i, int j) const { return {x(i), y(j)}; }
    Complex z(Node n) const { return z(n.i, n.j); }
    bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
    bool on_boundary_ring(int i, int j) const {
        return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
    }
    /// Nearest node to a plane point, clamped into the grid.
    Node nearest(Complex p) const;
    /// Cell mass factor for dA = dvol/pi.
    double cell_dA() const;

    /// Sub-grid covering nodes [i0, i0+nx) x [j0, j0+ny) of this grid.
    Grid2D window(int i0, int j0, int wnx, int wny) const;

    friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Throws ConfigurationError unless the two grids are identical.
void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what);

/// Real field sampled at grid nodes. Nodes listed in the optional undefined
/// set carry no meaningful value (stored as 0).
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid2D& grid, double fill = 0.0);
    ScalarField(const Grid2D& grid, std::vector<double> values);

    template <class F>
    static ScalarField sample(const Grid2D& grid, F&& f) {
        ScalarField out(grid);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) out(i, j) = f(grid.z(i, j));
        return out;
    }

    const Grid2D& grid() const { return grid_; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }

    bool has_undefined() const { return !undefined_.empty(); }
    bool defined(std::size_t k) const { return undefined_.empty() || undefined_[k] == 0; }
    bool defined(int i, int j) const { return defined(grid_.index(i, j)); }
    void mark_undefined(std::size_t k);

    /// Bilinear interpolation; points outside the box are clamped.
    double interpolate(Complex p) const;

private:
    Grid2D grid_{};
    std::vector<double> values_;
    std::vector<std::uint8_t> undefined_;
};

/// Boolean set on grid nodes, read as the union of closed cells centred on
/// member nodes.
class RegionMask {
public:
    RegionMask() = default;
    explicit RegionMask(const Grid2D& grid, bool fill = false);

    template <class P>
    static RegionMask from_predicate(const Grid2D& grid, P&& pred) {
        RegionMask out(grid);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) out.set(i, j, pred(grid.z(i, j)));
        return out;
    }
    static RegionMask disk(const Grid2D& grid, Complex center, double radius);
    static RegionMask annulus(const Grid2D& grid, Complex center, double r_in, double r_out);

    const Grid2D& grid() const { return grid_; }
    bool operator()(int i, int j) const { return members_[grid_.index(i, j)] != 0; }
    bool operator[](std::size_t k) const { return members_[k] != 0; }
    bool at(int i, int j) const { return grid_.contains(i, j) && (*this)(i, j); }
    void set(int i, int j, bool v) { members_[grid_.index(i, j)] = v ? 1 : 0; }
    void set(std::size_t k, bool v) { members_[k] = v ? 1 : 0; }
    std::span<const std::uint8_t> raw() const { return members_; }

    std::size_t count() const;
    bool empty() const { return count() == 0; }
    bool touches_boundary_ring(int margin = 0) const;
    std::vector<Node> nodes() const;

    RegionMask operator|(const RegionMask& o) const;
    RegionMask operator&(const RegionMask& o) const;
    /// Set difference this \ o.
    RegionMask operator-(const RegionMask& o) const;
    RegionMask complement() const;
    /// Dilation by `cells` in the max-norm (3x3 square per step).
    RegionMask dilated(int cells = 1) const;
    /// Nodes of the mask with at least one 4-neighbour outside it.
    RegionMask boundary() const;
    /// Nodes whose four neighbours are all members.
    RegionMask interior() const;
    bool subset_of(const RegionMask& o) const;
    /// Bounding box in node indices; returns false if empty.
    bool bounding_box(int& imin, int& jmin, int& imax, int& jmax) const;

    friend bool operator==(const RegionMask& a, const RegionMask& b) {
        return a.grid_ == b.grid_ && a.members_ == b.members_;
    }

private:
    Grid2D grid_{};
    std::vector<std::uint8_t> members_;
};

}  // namespace droplab
