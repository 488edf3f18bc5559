#include "droplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace droplab {

Grid2D Grid2D::make(double x0, double y0, double h, int nx, int ny) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw ConfigurationError("grid spacing h must be positive and finite");
    if (!std::isfinite(x0) || !std::isfinite(y0))
        throw ConfigurationError("grid corner must be finite");
    if (nx < kMinNodes || ny < kMinNodes)
        throw ConfigurationError("grid needs at least 16 nodes per axis, got " +
                                 std::to_string(nx) + "x" + std::to_string(ny));
    return Grid2D{x0, y0, h, nx, ny};
}

Grid2D Grid2D::centered(double half_width, double h) {
    if (!(half_width > 0.0)) throw ConfigurationError("half_width must be positive");
    if (!(h > 0.0)) throw ConfigurationError("grid spacing h must be positive");
    const int cells = static_cast<int>(std::lround(2.0 * half_width / h));
    // Keep the node at the origin exact when the box is symmetric.
    const int n = cells + 1;
    const double x0 = -0.5 * cells * h;
    return make(x0, x0, h, n, n);
}

Node Grid2D::nearest(Complex p) const {
    int i = static_cast<int>(std::lround((p.real() - x0) / h));
    int j = static_cast<int>(std::lround((p.imag() - y0) / h));
    return {std::clamp(i, 0, nx - 1), std::clamp(j, 0, ny - 1)};
}

double Grid2D::cell_dA() const { return h * h / std::numbers::pi; }

Grid2D Grid2D::window(int i0, int j0, int wnx, int wny) const {
    if (i0 < 0 || j0 < 0 || i0 + wnx > nx || j0 + wny > ny)
        throw PreconditionError("window exceeds grid");
    return make(x(i0), y(j0), h, wnx, wny);
}

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
    if (!(a == b)) throw ConfigurationError(std::string("grid mismatch in ") + what);
}

ScalarField::ScalarField(const Grid2D& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const Grid2D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw ConfigurationError("field length does not match grid");
}

void ScalarField::mark_undefined(std::size_t k) {
    if (undefined_.empty()) undefined_.assign(values_.size(), 0);
    undefined_[k] = 1;
    values_[k] = 0.0;
}

double ScalarField::interpolate(Complex p) const {
    const double fx = std::clamp((p.real() - grid_.x0) / grid_.h, 0.0, double(grid_.nx - 1));
    const double fy = std::clamp((p.imag() - grid_.y0) / grid_.h, 0.0, double(grid_.ny - 1));
    const int i = std::min(static_cast<int>(fx), grid_.nx - 2);
    const int j = std::min(static_cast<int>(fy), grid_.ny - 2);
    const double a = fx - i;
    const double b = fy - j;
    const auto& f = *this;
    return (1 - a) * (1 - b) * f(i, j) + a * (1 - b) * f(i + 1, j) + (1 - a) * b * f(i, j + 1) +
           a * b * f(i + 1, j + 1);
}

RegionMask::RegionMask(const Grid2D& grid, bool fill) : grid_(grid), members_(grid.size(), fill ? 1 : 0) {}

RegionMask RegionMask::disk(const Grid2D& grid, Complex center, double radius) {
    return from_predicate(grid, [&](Complex z) { return std::abs(z - center) <= radius; });
}

RegionMask RegionMask::annulus(const Grid2D& grid, Complex center, double r_in, double r_out) {
    return from_predicate(grid, [&](Complex z) {
        const double r = std::abs(z - center);
        return r >= r_in && r <= r_out;
    });
}

std::size_t RegionMask::count() const {
    return static_cast<std::size_t>(std::count(members_.begin(), members_.end(), std::uint8_t{1}));
}

bool RegionMask::touches_boundary_ring(int margin) const {
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i)
            if ((*this)(i, j) && (i <= margin || j <= margin || i >= grid_.nx - 1 - margin ||
                                  j >= grid_.ny - 1 - margin))
                return true;
    return false;
}

std::vector<Node> RegionMask::nodes() const {
    std::vector<Node> out;
    for (std::size_t k = 0; k < members_.size(); ++k)
        if (members_[k]) out.push_back(grid_.node(k));
    return out;
}

RegionMask RegionMask::operator|(const RegionMask& o) const {
    require_same_grid(grid_, o.grid_, "mask union");
    RegionMask out(grid_);
    for (std::size_t k = 0; k < members_.size(); ++k) out.members_[k] = members_[k] | o.members_[k];
    return out;
}

RegionMask RegionMask::operator&(const RegionMask& o) const {
    require_same_grid(grid_, o.grid_, "mask intersection");
    RegionMask out(grid_);
    for (std::size_t k = 0; k < members_.size(); ++k) out.members_[k] = members_[k] & o.members_[k];
    return out;
}

RegionMask RegionMask::operator-(const RegionMask& o) const {
    require_same_grid(grid_, o.grid_, "mask difference");
    RegionMask out(grid_);
    for (std::size_t k = 0; k < members_.size(); ++k)
        out.members_[k] = members_[k] && !o.members_[k] ? 1 : 0;
    return out;
}

RegionMask RegionMask::complement() const {
    RegionMask out(grid_);
    for (std::size_t k = 0; k < members_.size(); ++k) out.members_[k] = members_[k] ? 0 : 1;
    return out;
}

RegionMask RegionMask::dilated(int cells) const {
    RegionMask cur = *this;
    for (int step = 0; step < cells; ++step) {
        RegionMask next = cur;
        for (int j = 0; j < grid_.ny; ++j)
            for (int i = 0; i < grid_.nx; ++i) {
                if (!cur(i, j)) continue;
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di)
                        if (grid_.contains(i + di, j + dj)) next.set(i + di, j + dj, true);
            }
        cur = std::move(next);
    }
    return cur;
}

RegionMask RegionMask::boundary() const {
    RegionMask out(grid_);
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i)
            if ((*this)(i, j) &&
                (!at(i + 1, j) || !at(i - 1, j) || !at(i, j + 1) || !at(i, j - 1)))
                out.set(i, j, true);
    return out;
}

RegionMask RegionMask::interior() const { return *this - boundary(); }

bool RegionMask::subset_of(const RegionMask& o) const {
    require_same_grid(grid_, o.grid_, "mask inclusion");
    for (std::size_t k = 0; k < members_.size(); ++k)
        if (members_[k] && !o.members_[k]) return false;
    return true;
}

bool RegionMask::bounding_box(int& imin, int& jmin, int& imax, int& jmax) const {
    imin = grid_.nx;
    jmin = grid_.ny;
    imax = -1;
    jmax = -1;
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i)
            if ((*this)(i, j)) {
                imin = std::min(imin, i);
                imax = std::max(imax, i);
                jmin = std::min(jmin, j);
                jmax = std::max(jmax, j);
            }
    return imax >= 0;
}

}  // namespace droplab
