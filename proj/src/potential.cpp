#include "droplab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "droplab/field.hpp"
#include "droplab/io.hpp"

namespace droplab {

const char* family_name(Family f) {
    switch (f) {
        case Family::Quadratic: return "quadratic";
        case Family::AnisotropicQuadratic: return "anisotropic_quadratic";
        case Family::Quartic: return "quartic";
        case Family::TwoWell: return "two_well";
        case Family::GridSampled: return "grid_sampled";
    }
    return "?";
}

PotentialSpec::PotentialSpec(Family f, double param) : family_(f), param_(param) {}

PotentialSpec PotentialSpec::quadratic() {
    PotentialSpec s(Family::Quadratic, 0.0);
    s.compute_default_certificate();
    return s;
}

PotentialSpec PotentialSpec::anisotropic(double c) {
    if (!(std::fabs(c) < 1.0)) throw ConfigurationError("anisotropic_quadratic needs |c| < 1");
    PotentialSpec s(Family::AnisotropicQuadratic, c);
    s.compute_default_certificate();
    return s;
}

PotentialSpec PotentialSpec::quartic(double a) {
    if (!std::isfinite(a)) throw ConfigurationError("quartic parameter a must be finite");
    PotentialSpec s(Family::Quartic, a);
    s.compute_default_certificate();
    return s;
}

PotentialSpec PotentialSpec::two_well(double d) {
    if (!(d > 0.0)) throw ConfigurationError("two_well needs d > 0");
    PotentialSpec s(Family::TwoWell, d);
    s.compute_default_certificate();
    return s;
}

PotentialSpec PotentialSpec::grid_sampled(ScalarField samples, double t_max, std::string source) {
    if (!(t_max > 0.0)) throw ConfigurationError("grid_sampled potentials must declare t_max > 0");
    for (std::size_t k = 0; k < samples.grid().size(); ++k)
        if (!std::isfinite(samples[k])) throw ConfigurationError("grid_sampled potential has non-finite values");
    PotentialSpec s(Family::GridSampled, 0.0);
    s.t_max_ = t_max;
    s.source_ = std::move(source);
    s.samples_ = std::make_shared<const ScalarField>(std::move(samples));
    s.compute_default_certificate();
    return s;
}

PotentialSpec PotentialSpec::grid_sampled_file(const std::string& path, double t_max) {
    return grid_sampled(io::read_field(path), t_max, path);
}

void PotentialSpec::set_certificate(double delta0, double C0) {
    if (!(delta0 >= 0.0)) throw ConfigurationError("delta0 must be >= 0");
    delta0_ = delta0;
    C0_ = C0;
}

void PotentialSpec::compute_default_certificate() {
    // C0 = sup (1+delta0) log(1+|z|^2) - Q. Builtin families outgrow the log,
    // so the sup is attained at moderate radius; scan a polar net out to 50.
    double worst = -std::numeric_limits<double>::infinity();
    auto consider = [&](Complex z) {
        worst = std::max(worst, (1.0 + delta0_) * std::log1p(std::norm(z)) - value(z));
    };
    if (samples_) {
        const Grid2D& g = samples_->grid();
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) consider(g.z(i, j));
    } else {
        // Coarse polar net, then a fine net around each coarse local winner.
        const double dth = 2.0 * std::numbers::pi / 64.0;
        double best_r = 0.0, best_th = 0.0;
        for (int ir = 0; ir <= 5000; ++ir) {
            const double r = 0.01 * ir;
            for (int it = 0; it < 64; ++it) {
                const double before = worst;
                consider(std::polar(r, dth * it));
                if (worst > before) best_r = r, best_th = dth * it;
            }
        }
        for (int a = -100; a <= 100; ++a)
            for (int b = -100; b <= 100; ++b)
                consider(std::polar(std::max(0.0, best_r + 1e-4 * a), best_th + 0.01 * dth * b));
    }
    C0_ = worst + 1e-6 * (1.0 + std::fabs(worst));
}

double PotentialSpec::value(Complex z) const {
    const double x = z.real(), y = z.imag(), r2 = std::norm(z);
    switch (family_) {
        case Family::Quadratic: return r2;
        case Family::AnisotropicQuadratic: return (1.0 + param_) * x * x + (1.0 - param_) * y * y;
        case Family::Quartic: return 0.5 * r2 * r2 + param_ * r2;
        case Family::TwoWell: {
            const double d2 = param_ * param_;
            return std::norm(z * z - d2) / (4.0 * d2);
        }
        case Family::GridSampled: return samples_->interpolate(z);
    }
    return 0.0;
}

Complex PotentialSpec::gradient(Complex z) const {
    const double x = z.real(), y = z.imag(), r2 = std::norm(z);
    switch (family_) {
        case Family::Quadratic: return 2.0 * z;
        case Family::AnisotropicQuadratic: return {2.0 * (1.0 + param_) * x, 2.0 * (1.0 - param_) * y};
        case Family::Quartic: return (2.0 * r2 + 2.0 * param_) * z;
        case Family::TwoWell: {
            // Qx + i Qy = 2 dQ/dzbar = (z^2 - d^2) conj(z) / d^2.
            const double d2 = param_ * param_;
            return (z * z - d2) * std::conj(z) / d2;
        }
        case Family::GridSampled: {
            const double e = 1e-3 * samples_->grid().h;
            return {(value(z + Complex(e, 0)) - value(z - Complex(e, 0))) / (2 * e),
                    (value(z + Complex(0, e)) - value(z - Complex(0, e))) / (2 * e)};
        }
    }
    return {};
}

double PotentialSpec::laplacian(Complex z) const {
    const double r2 = std::norm(z);
    switch (family_) {
        case Family::Quadratic:
        case Family::AnisotropicQuadratic: return 1.0;
        case Family::Quartic: return 2.0 * r2 + param_;
        case Family::TwoWell: return r2 / (param_ * param_);
        case Family::GridSampled: break;
    }
    throw PreconditionError("grid_sampled potentials have no closed-form Laplacian");
}

std::string PotentialSpec::id() const {
    std::ostringstream os;
    os << family_name(family_);
    switch (family_) {
        case Family::AnisotropicQuadratic: os << "(c=" << param_ << ")"; break;
        case Family::Quartic: os << "(a=" << param_ << ")"; break;
        case Family::TwoWell: os << "(d=" << param_ << ")"; break;
        case Family::GridSampled: os << "(" << source_ << ")"; break;
        case Family::Quadratic: break;
    }
    return os.str();
}

nlohmann::json PotentialSpec::to_json() const {
    nlohmann::json j{{"family", family_name(family_)}, {"delta0", delta0_}, {"C0", C0_}};
    switch (family_) {
        case Family::AnisotropicQuadratic: j["c"] = param_; break;
        case Family::Quartic: j["a"] = param_; break;
        case Family::TwoWell: j["d"] = param_; break;
        case Family::GridSampled: j["file"] = source_; break;
        case Family::Quadratic: break;
    }
    j["t_max"] = t_max_ ? nlohmann::json(*t_max_) : nlohmann::json("unbounded");
    return j;
}

SampledPotential sample_potential(const PotentialSpec& spec, const Grid2D& grid) {
    if (spec.family() != Family::GridSampled) {
        return {ScalarField::sample(grid, [&](Complex z) { return spec.value(z); }),
                ScalarField::sample(grid, [&](Complex z) { return spec.laplacian(z); })};
    }
    ScalarField Q = spec.samples()->grid() == grid
                        ? *spec.samples()
                        : ScalarField::sample(grid, [&](Complex z) { return spec.value(z); });
    ScalarField lap = field::laplacian(Q);
    ScalarField filled(grid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const int ii = std::clamp(i, 1, grid.nx - 2);
            const int jj = std::clamp(j, 1, grid.ny - 2);
            filled(i, j) = lap(ii, jj);
        }
    return {std::move(Q), std::move(filled)};
}

nlohmann::json GrowthReport::to_json() const {
    return {{"pass", pass},
            {"radial_pass", radial_pass},
            {"certificate_pass", certificate_pass},
            {"t_max_pass", t_max_pass},
            {"worst_radial", worst_radial},
            {"worst_radial_node", {worst_radial_node.i, worst_radial_node.j}},
            {"worst_certificate", worst_certificate},
            {"worst_certificate_node", {worst_certificate_node.i, worst_certificate_node.j}}};
}

GrowthReport check_growth(const PotentialSpec& spec, const Grid2D& grid, double t) {
    GrowthReport rep;
    rep.worst_radial = std::numeric_limits<double>::infinity();
    rep.worst_certificate = std::numeric_limits<double>::infinity();
    auto shifted = [&](Complex z) { return spec.value(z) - t * std::log(std::norm(z)); };
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const Complex z = grid.z(i, j);
            const int ring = std::min({i, j, grid.nx - 1 - i, grid.ny - 1 - j});
            if (ring <= 2) {
                const double r = std::abs(z);
                if (r > grid.h) {
                    const Complex inward = z * (1.0 - grid.h / r);
                    const double inc = shifted(z) - shifted(inward);
                    if (inc < rep.worst_radial) {
                        rep.worst_radial = inc;
                        rep.worst_radial_node = {i, j};
                    }
                }
            }
            const double cert = spec.value(z) - ((1.0 + spec.delta0()) * std::log1p(std::norm(z)) - spec.C0());
            if (cert < rep.worst_certificate) {
                rep.worst_certificate = cert;
                rep.worst_certificate_node = {i, j};
            }
        }
    rep.radial_pass = rep.worst_radial > 0.0;
    rep.certificate_pass = rep.worst_certificate >= 0.0;
    if (spec.t_max()) rep.t_max_pass = t <= *spec.t_max();
    rep.pass = rep.radial_pass && rep.certificate_pass && rep.t_max_pass;
    return rep;
}

Localization Localization::region(RegionMask sigma, std::string id) {
    Localization loc;
    loc.sigma_ = std::move(sigma);
    loc.id_ = std::move(id);
    return loc;
}

LocalizedPotential localize(const ScalarField& Q, const Localization& loc) {
    if (loc.is_all()) return {Q, RegionMask(Q.grid(), true)};
    require_same_grid(Q.grid(), loc.sigma().grid(), "localize");
    if (loc.sigma().empty()) throw PreconditionError("localization Sigma is empty");
    return {Q, loc.sigma()};
}

}  // namespace droplab
