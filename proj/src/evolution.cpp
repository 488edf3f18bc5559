#include "droplab/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "droplab/field.hpp"
#include "droplab/log.hpp"

namespace droplab {

nlohmann::json DropletChain::manifest() const {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t k = 0; k < droplets.size(); ++k) {
        nlohmann::json e = solutions[k].manifest();
        e["droplet"] = droplets[k].to_json();
        e["robin"] = droplets[k].robin;
        if (k + 1 < droplets.size() && k < dominated.size()) e["dominated_by_next"] = bool(dominated[k]);
        entries.push_back(std::move(e));
    }
    nlohmann::json j{{"potential", potential_ref},
                     {"localization", localization_ref},
                     {"t_values", t_values},
                     {"complete", complete},
                     {"masks_monotone", masks_monotone},
                     {"qhat_monotone", qhat_monotone},
                     {"correctly_indexed", correctly_indexed},
                     {"entries", entries}};
    if (!complete) j["error"] = {{"kind", error_kind}, {"message", error_message}};
    return j;
}

DropletChain evolve_chain(const ScalarField& Q, const ScalarField& laplQ, const Localization& loc,
                          const std::vector<double>& t_list, const ChainOptions& opts) {
    if (t_list.empty()) throw PreconditionError("evolve_chain: empty t list");
    for (std::size_t k = 1; k < t_list.size(); ++k)
        if (!(t_list[k] > t_list[k - 1])) throw PreconditionError("evolve_chain: t values must strictly increase");

    DropletChain chain;
    chain.potential_ref = opts.droplet.potential_ref;
    chain.localization_ref = loc.id();

    // Solves are independent of each other, so the result does not depend on
    // how many run at once.
    const std::size_t n = t_list.size();
    std::vector<std::optional<ObstacleSolution>> sols(n);
    std::vector<std::optional<Droplet>> drops(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < n;) {
            try {
                sols[k] = solve_obstacle(Q, laplQ, loc, t_list[k], opts.obstacle);
                DropletOptions dopt = opts.droplet;
                dopt.localization_ref = loc.id();
                drops[k] = make_droplet(*sols[k], laplQ, Q, dopt);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int jobs = std::clamp(opts.jobs, 1, static_cast<int>(n));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t k = 0; k < n; ++k) {
        if (errors[k]) {
            chain.complete = false;
            try {
                std::rethrow_exception(errors[k]);
            } catch (const Error& e) {
                chain.error_kind = e.kind();
                chain.error_message = e.what();
            } catch (const std::exception& e) {
                chain.error_kind = "internal";
                chain.error_message = e.what();
            }
            std::ostringstream os;
            os << "chain stopped at t = " << t_list[k] << ": " << chain.error_message;
            log::warn(os.str());
            break;
        }
        chain.t_values.push_back(t_list[k]);
        chain.solutions.push_back(std::move(*sols[k]));
        chain.droplets.push_back(std::move(*drops[k]));
    }

    for (std::size_t k = 0; k < chain.size(); ++k) {
        const ObstacleSolution& s = chain.solutions[k];
        if (std::fabs(chain.droplets[k].mass - s.t) > s.tol_mass) chain.correctly_indexed = false;
        if (k == 0) continue;
        const ObstacleSolution& p = chain.solutions[k - 1];
        if (!chain.droplets[k - 1].mask.subset_of(chain.droplets[k].mask.dilated(1))) chain.masks_monotone = false;
        const double tol = std::max(p.tol_obs, s.tol_obs);
        for (std::size_t idx = 0; idx < Q.grid().size(); ++idx)
            if (p.qhat[idx] > s.qhat[idx] + tol) {
                chain.qhat_monotone = false;
                break;
            }
    }
    if (!chain.masks_monotone) log::warn("evolve_chain: droplet masks are not nested");
    if (!chain.qhat_monotone) log::warn("evolve_chain: qhat is not monotone in t");

    if (opts.check_domination)
        for (std::size_t k = 0; k + 1 < chain.size(); ++k)
            chain.dominated.push_back(check_domination(chain.droplets[k], chain.droplets[k + 1], Q).dominated);
    return chain;
}

DropletChain evolve_chain(const PotentialSpec& spec, const Grid2D& grid, const Localization& loc,
                          const std::vector<double>& t_list, const ChainOptions& opts) {
    const SampledPotential sp = sample_potential(spec, grid);
    ChainOptions o = opts;
    o.droplet.potential_ref = spec.id();
    return evolve_chain(sp.Q, sp.laplQ, loc, t_list, o);
}

const char* moment_kind_name(MomentKind k) {
    switch (k) {
        case MomentKind::Const: return "const";
        case MomentKind::Re: return "re";
        case MomentKind::Im: return "im";
    }
    return "?";
}

bool MomentEntry::pass() const { return std::fabs(value - expected) <= tolerance; }

bool MomentReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const MomentEntry& e) { return e.pass(); });
}

nlohmann::json MomentReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries)
        rows.push_back({{"k", e.k},
                        {"kind", moment_kind_name(e.kind)},
                        {"value", e.value},
                        {"expected", e.expected},
                        {"tolerance", e.tolerance},
                        {"pass", e.pass()}});
    return {{"t", t}, {"t_prime", t_prime}, {"a", {a.real(), a.imag()}}, {"pass", pass()}, {"moments", rows}};
}

namespace {

void require_nested(const Droplet& s1, const Droplet& s2, const char* what) {
    require_same_grid(s1.mask.grid(), s2.mask.grid(), what);
    if (!s1.mask.subset_of(s2.mask.dilated(1)))
        throw PreconditionError(std::string(what) + ": S is not contained in S' (one-cell tolerance)");
}

bool has_measure(const Droplet& d) { return d.measure.grid().size() == d.mask.grid().size() && d.mask.grid().size() > 0; }

/// Weight per dA of the growth between s1 and s2 at node k: the difference of
/// the discrete equilibrium measures when both are known, otherwise laplQ on
/// S' \ S.
class GrowthWeight {
public:
    GrowthWeight(const Droplet& s1, const Droplet& s2)
        : s1_(s1), s2_(s2), discrete_(has_measure(s1) && has_measure(s2)) {}
    double operator()(std::size_t k) const {
        if (discrete_) return s2_.measure[k] - s1_.measure[k];
        return (s2_.mask[k] && !s1_.mask[k]) ? s2_.density[k] : 0.0;
    }

private:
    const Droplet& s1_;
    const Droplet& s2_;
    bool discrete_;
};

Complex centroid(const Droplet& d) {
    const Grid2D& g = d.mask.grid();
    const ScalarField& w = has_measure(d) ? d.measure : d.density;
    Complex s = 0.0;
    double m = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (w[k] != 0.0) {
            s += w[k] * g.z(g.node(k));
            m += w[k];
        }
    if (!(m > 0.0)) throw PreconditionError("droplet carries no mass");
    return s / m;
}

}  // namespace

MomentReport richardson_moments(const Droplet& s1, const Droplet& s2, const MomentOptions& opts) {
    require_nested(s1, s2, "richardson_moments");
    const Grid2D& g = s1.mask.grid();
    MomentReport rep;
    rep.t = s1.t;
    rep.t_prime = s2.t;
    rep.a = opts.a.value_or(centroid(s1));
    const Node an = g.nearest(rep.a);
    if (!g.contains(an.i, an.j) || !s1.mask.interior()(an.i, an.j) || std::abs(g.z(an) - rep.a) > g.h)
        throw PreconditionError("richardson_moments: a is not an interior point of S");
    if (opts.k_max < 0) throw ConfigurationError("k_max must be >= 0");

    const GrowthWeight weight(s1, s2);
    const double dA = g.cell_dA();
    std::vector<double> re(opts.k_max + 1, 0.0), im(opts.k_max + 1, 0.0);
    double mass = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double w = weight(k) * dA;
        if (w == 0.0) continue;
        mass += w;
        const Complex inv = 1.0 / (g.z(g.node(k)) - rep.a);
        Complex p = 1.0;
        for (int q = 1; q <= opts.k_max; ++q) {
            p *= inv;
            re[q] += w * p.real();
            im[q] += w * p.imag();
        }
    }
    const double dt = s2.t - s1.t;
    const double tol_const = opts.tol_const.value_or(std::max(1e-3, 4.0 * g.h) * s2.t);
    rep.entries.push_back({0, MomentKind::Const, mass, dt, tol_const});
    const double tol_k = opts.k_tol_factor * std::fabs(dt);
    for (int q = 1; q <= opts.k_max; ++q) {
        rep.entries.push_back({q, MomentKind::Re, re[q], 0.0, tol_k});
        rep.entries.push_back({q, MomentKind::Im, im[q], 0.0, tol_k});
    }
    return rep;
}

double richardson_inequality(const Droplet& s1, const Droplet& s2, Complex a, Complex b) {
    require_nested(s1, s2, "richardson_inequality");
    const Grid2D& g = s1.mask.grid();
    const Node an = g.nearest(a), bn = g.nearest(b);
    if (!s2.mask(an.i, an.j) || s1.mask.dilated(1)(an.i, an.j))
        throw PreconditionError("richardson_inequality: a must lie in S' away from S");
    if (!s1.mask.interior()(bn.i, bn.j)) throw PreconditionError("richardson_inequality: b must be interior to S");
    const Complex za = g.z(an), zb = g.z(bn);
    const double self = 2.0 * (std::log(g.h) + field::self_cell_log_radius());
    const GrowthWeight weight(s1, s2);
    double sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double w = weight(k);
        if (w == 0.0) continue;
        const Node n = g.node(k);
        const Complex z = g.z(n);
        const double la = (n == an) ? self : std::log(std::norm(z - za));
        const double lb = (n == bn) ? self : std::log(std::norm(z - zb));
        sum += (la - lb) * w;
    }
    return sum * g.cell_dA();
}

double harmonic_measure_quotient(const DropletChain& chain, std::size_t i, const ScalarField& f) {
    if (i + 1 >= chain.size()) throw PreconditionError("harmonic_measure_quotient: need entries i and i+1");
    const Droplet& s1 = chain.droplets[i];
    const Droplet& s2 = chain.droplets[i + 1];
    require_same_grid(s1.mask.grid(), f.grid(), "harmonic_measure_quotient");
    if ((s2.mask - s1.mask).empty()) throw DegenerateError("harmonic_measure_quotient: S_t' \\ S_t is empty");
    const Grid2D& g = f.grid();
    const GrowthWeight weight(s1, s2);
    double sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (const double w = weight(k); w != 0.0) sum += f[k] * w;
    return sum * g.cell_dA() / (s2.t - s1.t);
}

ScalarField backward_potential(const RegionMask& K_star, const ScalarField& laplQ) {
    ScalarField density(K_star.grid());
    for (std::size_t k = 0; k < density.grid().size(); ++k)
        if (K_star[k]) density[k] = laplQ[k];
    ScalarField u = field::log_potential(density, K_star, RegionMask(K_star.grid(), true));
    for (auto& v : u.values()) v = -v;
    return u;
}

DropletChain backward_hele_shaw(const RegionMask& K_star, const ScalarField& laplQ, std::vector<double> t_list,
                                const ChainOptions& opts) {
    const Grid2D& g = K_star.grid();
    require_same_grid(g, laplQ.grid(), "backward_hele_shaw");
    if (K_star.empty()) throw PreconditionError("backward_hele_shaw: K_* is empty");
    if (t_list.empty()) throw PreconditionError("backward_hele_shaw: empty t list");
    for (std::size_t k = 0; k < g.size(); ++k)
        if (K_star[k] && laplQ[k] < 0.0) throw PreconditionError("backward_hele_shaw: laplQ < 0 on K_*");
    double t_star = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (K_star[k]) t_star += laplQ[k];
    t_star *= g.cell_dA();
    for (double t : t_list) {
        if (!(t > 0.0)) throw PreconditionError("backward_hele_shaw: t must be positive");
        if (t >= t_star) {
            std::ostringstream os;
            os << "t exceeds terminal mass: t = " << t << " >= t_* = " << t_star;
            throw PreconditionError(os.str());
        }
    }
    const double r_shallow = opts.droplet.r_shallow.value_or(3.0 * g.h);
    const double eps = opts.droplet.eps_mass.value_or(1e-6 * t_star);
    if (!(remove_shallow(K_star, laplQ, r_shallow, eps) == K_star))
        throw PreconditionError("backward_hele_shaw: K_* has Q-shallow points");

    std::sort(t_list.begin(), t_list.end());
    t_list.erase(std::unique(t_list.begin(), t_list.end()), t_list.end());

    const ScalarField qt = backward_potential(K_star, laplQ);
    ChainOptions o = opts;
    o.check_domination = true;
    if (o.droplet.potential_ref == "unknown") o.droplet.potential_ref = "backward(K_*)";
    return evolve_chain(qt, laplQ, Localization::region(K_star, "K_*"), t_list, o);
}

std::string moments_csv(const std::vector<MomentReport>& reports) {
    std::ostringstream os;
    os.precision(17);
    os << "t,t_prime,k,kind,value,expected\n";
    for (const auto& r : reports)
        for (const auto& e : r.entries)
            os << r.t << ',' << r.t_prime << ',' << e.k << ',' << moment_kind_name(e.kind) << ',' << e.value << ','
               << e.expected << '\n';
    return os.str();
}

}  // namespace droplab
