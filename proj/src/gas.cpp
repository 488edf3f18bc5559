#include "droplab/gas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "droplab/log.hpp"
#include "droplab/rng.hpp"

namespace droplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool canonical_less(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

double pair_term(Complex a, Complex b) {
    const double d2 = std::norm(a - b);
    return d2 > 0.0 ? -std::log(d2) : kInf;
}

/// Energy change when point j moves to w.
double delta_energy(const PointConfiguration& z, std::size_t j, Complex w, const PotentialSpec& Q, double m) {
    double d = m * (Q.value(w) - Q.value(z[j]));
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (k == j) continue;
        const double dn = std::norm(w - z[k]);
        if (!(dn > 0.0)) return kInf;
        d += -std::log(dn) + std::log(std::norm(z[j] - z[k]));
    }
    return d;
}

}  // namespace

double energy(const PointConfiguration& z, const PotentialSpec& Q, double m) {
    PointConfiguration s = z;
    std::sort(s.begin(), s.end(), canonical_less);
    double pairs = 0.0, field = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        field += Q.value(s[j]);
        for (std::size_t k = j + 1; k < s.size(); ++k) {
            const double p = pair_term(s[j], s[k]);
            if (p == kInf) return kInf;
            pairs += p;
        }
    }
    return pairs + m * field;
}

double rescaled_energy(const PointConfiguration& z, const PotentialSpec& Q, double m) {
    const double n = double(z.size());
    if (n < 2) throw PreconditionError("rescaled energy needs at least two points");
    return 2.0 * energy(z, Q, m) / (n * (n - 1.0));
}

nlohmann::json McmcConfig::to_json() const {
    nlohmann::json j{{"n", n},
                     {"m", m},
                     {"beta", beta},
                     {"burn_in", burn_in},
                     {"n_samples", n_samples},
                     {"thinning", thinning},
                     {"seed", seed},
                     {"box_half_width", box_half_width}};
    j["step_sigma"] = step_sigma ? nlohmann::json(*step_sigma) : nlohmann::json(1.0 / std::sqrt(m));
    return j;
}

nlohmann::json McmcRun::to_json() const {
    return {{"config", config.to_json()},
            {"acceptance_rate", acceptance_rate},
            {"step_sigma", step_sigma},
            {"samples", samples.size()}};
}

McmcRun mcmc_sample(const McmcConfig& cfg, const PotentialSpec& Q) {
    if (cfg.n < 1) throw ConfigurationError("mcmc: n must be >= 1");
    if (!(cfg.m > 0.0)) throw ConfigurationError("mcmc: m must be positive");
    if (!(cfg.beta > 0.0)) throw ConfigurationError("mcmc: beta must be positive");
    if (cfg.n_samples < 1) throw ConfigurationError("mcmc: n_samples must be >= 1");
    if (cfg.thinning < 1 || cfg.burn_in < 0) throw ConfigurationError("mcmc: thinning >= 1 and burn_in >= 0 required");
    double sigma = cfg.step_sigma.value_or(1.0 / std::sqrt(cfg.m));
    if (!(sigma > 0.0)) throw ConfigurationError("mcmc: step_sigma must be positive");

    McmcRun run;
    run.config = cfg;
    CounterRng init(cfg.seed, 0), moves(cfg.seed, 1);
    const std::size_t n = static_cast<std::size_t>(cfg.n);
    const double scale = 0.5 * std::sqrt(double(cfg.n) / cfg.m);
    PointConfiguration z(n);
    for (auto& p : z) p = Complex(init.normal(), init.normal()) * scale;

    const double half_beta = 0.5 * cfg.beta;
    const double box = cfg.box_half_width;
    long accepted = 0, proposed = 0;
    auto sweep = [&] {
        for (std::size_t j = 0; j < n; ++j) {
            const Complex w = z[j] + Complex(moves.normal(), moves.normal()) * sigma;
            const double u = moves.uniform();
            ++proposed;
            if (std::fabs(w.real()) > box || std::fabs(w.imag()) > box) continue;
            const double dE = delta_energy(z, j, w, Q, cfg.m);
            if (dE == kInf) continue;
            if (dE <= 0.0 || u < std::exp(-half_beta * dE)) {
                z[j] = w;
                ++accepted;
            }
        }
    };

    // Burn-in with step adaptation in windows of 50 sweeps.
    for (long s = 0; s < cfg.burn_in;) {
        accepted = proposed = 0;
        const long window = std::min<long>(50, cfg.burn_in - s);
        for (long k = 0; k < window; ++k) sweep();
        s += window;
        const double rate = double(accepted) / double(proposed);
        if (rate < 0.2) sigma *= 0.8;
        else if (rate > 0.5) sigma *= 1.25;
    }

    accepted = proposed = 0;
    run.samples.reserve(static_cast<std::size_t>(cfg.n_samples));
    for (long s = 0; s < cfg.n_samples; ++s) {
        for (long k = 0; k < cfg.thinning; ++k) sweep();
        run.samples.push_back(z);
    }
    run.step_sigma = sigma;
    run.acceptance_rate = double(accepted) / double(proposed);
    if (run.acceptance_rate < 0.01) {
        std::ostringstream os;
        os << "mcmc acceptance collapsed to " << run.acceptance_rate << " (step " << sigma << ")";
        throw ConfigurationError(os.str());
    }
    return run;
}

ScalarField intensity_histogram(const McmcRun& run, const Grid2D& grid) {
    if (run.samples.empty()) throw PreconditionError("intensity_histogram: run has no samples");
    ScalarField counts(grid);
    for (const auto& conf : run.samples)
        for (const Complex& p : conf) {
            const double fi = (p.real() - grid.x0) / grid.h, fj = (p.imag() - grid.y0) / grid.h;
            const long i = std::lround(fi), j = std::lround(fj);
            if (i < 0 || j < 0 || i >= grid.nx || j >= grid.ny) continue;
            counts(int(i), int(j)) += 1.0;
        }
    const double norm = 1.0 / (double(run.samples.size()) * grid.cell_dA());
    for (auto& v : counts.values()) v *= norm;
    return counts;
}

std::pair<double, double> linear_statistic(const McmcRun& run, const ScalarField& f) {
    if (run.samples.empty()) throw PreconditionError("linear_statistic: run has no samples");
    const Grid2D& g = f.grid();
    double mean = 0.0, m2 = 0.0;
    long count = 0;
    for (const auto& conf : run.samples) {
        double s = 0.0;
        for (const Complex& p : conf) s += f[g.index(g.nearest(p))];
        s /= double(conf.size());
        ++count;
        const double d = s - mean;
        mean += d / double(count);
        m2 += d * (s - mean);
    }
    return {mean, count > 1 ? m2 / double(count - 1) : 0.0};
}

nlohmann::json FeketeResult::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) pts.push_back({p.real(), p.imag()});
    return {{"energy", energy},
            {"rescaled_energy", rescaled},
            {"gradient_norm", gradient_norm},
            {"iterations", iterations},
            {"line_search_failed", line_search_failed},
            {"best_seed", best_seed},
            {"points", pts}};
}

namespace {

void energy_gradient(const PointConfiguration& z, const PotentialSpec& Q, double m, std::vector<Complex>& g) {
    const std::size_t n = z.size();
    g.assign(n, Complex(0.0, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        g[j] += m * Q.gradient(z[j]);
        for (std::size_t k = j + 1; k < n; ++k) {
            const Complex d = z[j] - z[k];
            const Complex f = -2.0 * d / std::norm(d);
            g[j] += f;
            g[k] -= f;
        }
    }
}

double dot(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
    return s;
}

FeketeResult descend(PointConfiguration z, double m, const PotentialSpec& Q, const FeketeOptions& opts) {
    FeketeResult r;
    const std::size_t n = z.size();
    std::vector<Complex> g, g_new, s(n), y(n);
    double f = energy(z, Q, m);
    energy_gradient(z, Q, m, g);
    double alpha = 1e-3;
    int it = 0;
    for (; it < opts.iterations; ++it) {
        const double gg = dot(g, g);
        if (std::sqrt(gg) <= opts.gradient_tol * std::max(1.0, std::fabs(f))) break;
        PointConfiguration trial(n);
        double a = alpha, f_new = kInf;
        int back = 0;
        for (; back < 60; ++back) {
            for (std::size_t k = 0; k < n; ++k) trial[k] = z[k] - a * g[k];
            f_new = energy(trial, Q, m);
            if (f_new <= f - 1e-4 * a * gg) break;
            a *= 0.5;
        }
        if (back == 60) {
            r.line_search_failed = true;
            break;
        }
        energy_gradient(trial, Q, m, g_new);
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = trial[k] - z[k];
            y[k] = g_new[k] - g[k];
        }
        const double sy = dot(s, y);
        alpha = sy > 0.0 ? dot(s, s) / sy : 2.0 * a;
        z = std::move(trial);
        g.swap(g_new);
        f = f_new;
    }
    r.points = std::move(z);
    r.energy = f;
    r.rescaled = n >= 2 ? 2.0 * f / (double(n) * (double(n) - 1.0)) : f;
    r.gradient_norm = std::sqrt(dot(g, g));
    r.iterations = it;
    return r;
}

}  // namespace

FeketeResult fekete_minimize(int n, double m, const PotentialSpec& Q, std::uint64_t seed,
                             const FeketeOptions& opts) {
    if (n < 1) throw ConfigurationError("fekete: n must be >= 1");
    if (!(m > 0.0)) throw ConfigurationError("fekete: m must be positive");
    if (opts.multistart < 1) throw ConfigurationError("fekete: multistart must be >= 1");
    FeketeResult best;
    best.energy = kInf;
    const double scale = 0.5 * std::sqrt(double(n) / m);
    for (int start = 0; start < opts.multistart; ++start) {
        CounterRng rng(seed, static_cast<std::uint64_t>(start));
        PointConfiguration z(static_cast<std::size_t>(n));
        for (auto& p : z) p = Complex(rng.normal(), rng.normal()) * scale;
        FeketeResult r = descend(std::move(z), m, Q, opts);
        r.best_seed = static_cast<std::uint64_t>(start);
        if (r.energy < best.energy) best = std::move(r);
    }
    if (best.line_search_failed) log::warn("fekete_minimize: line search failed; returning best iterate");
    return best;
}

double aggregation_check(const std::vector<Atom>& atoms, double beta) {
    double s = 0.0;
    for (const Atom& a : atoms) {
        if (!(a.weight >= 0.0)) throw PreconditionError("aggregation_check: weights must be >= 0");
        for (const Atom& b : atoms)
            s += a.weight * b.weight *
                 (std::pow(std::abs(a.point), beta) + std::pow(std::abs(b.point), beta) -
                  std::pow(std::abs(a.point - b.point), beta));
    }
    return s;
}

AggregationTest aggregation_test(const std::vector<Atom>& atoms, double beta, Complex zeta) {
    double total = 0.0, pairs = 0.0, field = 0.0;
    for (const Atom& a : atoms) {
        total += a.weight;
        field += a.weight * std::pow(std::abs(zeta - a.point), beta);
        for (const Atom& b : atoms) pairs += a.weight * b.weight * std::pow(std::abs(a.point - b.point), beta);
    }
    if (!(total > 0.0)) throw PreconditionError("aggregation_test: measure has no mass");
    return {pairs / (2.0 * total), field};
}

std::string samples_csv(const McmcRun& run) {
    std::ostringstream os;
    os.precision(17);
    os << "sample_index,particle_index,x,y\n";
    for (std::size_t s = 0; s < run.samples.size(); ++s)
        for (std::size_t j = 0; j < run.samples[s].size(); ++j)
            os << s << ',' << j << ',' << run.samples[s][j].real() << ',' << run.samples[s][j].imag() << '\n';
    return os.str();
}

}  // namespace droplab
