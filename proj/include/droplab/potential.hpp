#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "droplab/grid.hpp"

namespace droplab {

enum class Family { Quadratic, AnisotropicQuadratic, Quartic, TwoWell, GridSampled };

const char* family_name(Family f);

/// The external field Q.
///
/// Builtin families carry closed-form values, gradients and quarter
/// Laplacians. A grid-sampled field is evaluated by bilinear interpolation
/// and differentiated with the field stencils; it must declare t_max.
class PotentialSpec {
public:
    static PotentialSpec quadratic();
    /// Q = (1+c) x^2 + (1-c) y^2, |c| < 1.
    static PotentialSpec anisotropic(double c);
    /// Q = |z|^4/2 + a |z|^2.
    static PotentialSpec quartic(double a);
    /// Q = |z^2 - d^2|^2 / (4 d^2); minima at +-d, Laplacian |z|^2/d^2.
    static PotentialSpec two_well(double d);
    static PotentialSpec grid_sampled(ScalarField samples, double t_max, std::string source = "memory");
    /// Loads a field dump (see io::read_field).
    static PotentialSpec grid_sampled_file(const std::string& path, double t_max);

    Family family() const { return family_; }
    double param() const { return param_; }
    std::optional<double> t_max() const { return t_max_; }
    double delta0() const { return delta0_; }
    double C0() const { return C0_; }
    /// Overrides the extra-growth certificate Q >= (1+delta0) log(1+|z|^2) - C0.
    void set_certificate(double delta0, double C0);

    double value(Complex z) const;
    /// (dQ/dx, dQ/dy) packed as a complex number.
    Complex gradient(Complex z) const;
    bool has_closed_form_laplacian() const { return family_ != Family::GridSampled; }
    /// Closed-form quarter Laplacian; throws for grid-sampled fields.
    double laplacian(Complex z) const;

    /// Stable identifier used in manifests, e.g. "quartic(a=0)".
    std::string id() const;
    nlohmann::json to_json() const;

    const ScalarField* samples() const { return samples_.get(); }

private:
    PotentialSpec(Family f, double param);
    void compute_default_certificate();

    Family family_ = Family::Quadratic;
    double param_ = 0.0;
    std::optional<double> t_max_;
    double delta0_ = 0.5;
    double C0_ = 0.0;
    std::string source_;
    std::shared_ptr<const ScalarField> samples_;
};

struct SampledPotential {
    ScalarField Q;
    ScalarField laplQ;
};

/// Q at every node plus its quarter Laplacian (closed form for builtin
/// families, field::laplacian for sampled ones, whose outer ring is then
/// filled from the nearest interior node).
SampledPotential sample_potential(const PotentialSpec& spec, const Grid2D& grid);

struct GrowthReport {
    bool pass = false;
    bool radial_pass = false;
    bool certificate_pass = false;
    bool t_max_pass = true;
    double worst_radial = 0.0;  ///< smallest radial increment found
    Node worst_radial_node{};
    double worst_certificate = 0.0;  ///< smallest Q - ((1+delta0) log(1+|z|^2) - C0)
    Node worst_certificate_node{};
    nlohmann::json to_json() const;
};

/// Checks that Q - t log|z|^2 increases radially across the three outermost
/// node rings and that the extra-growth certificate holds at every node.
GrowthReport check_growth(const PotentialSpec& spec, const Grid2D& grid, double t);

/// A localization Sigma: either the whole box or a closed node set.
class Localization {
public:
    static Localization all() { return Localization(); }
    static Localization region(RegionMask sigma, std::string id = "mask");

    bool is_all() const { return !sigma_.has_value(); }
    const RegionMask& sigma() const { return *sigma_; }
    const std::string& id() const { return id_; }

private:
    std::optional<RegionMask> sigma_;
    std::string id_ = "all";
};

/// Q restricted to Sigma. Nodes off Sigma carry Q = +infinity, represented by
/// dropping the obstacle constraint there.
struct LocalizedPotential {
    ScalarField Q;
    RegionMask constrained;
};

LocalizedPotential localize(const ScalarField& Q, const Localization& loc);

}  // namespace droplab
