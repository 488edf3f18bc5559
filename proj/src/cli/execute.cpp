#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <thread>

#include "droplab/cli.hpp"
#include "droplab/detgas.hpp"
#include "droplab/field.hpp"
#include "droplab/io.hpp"
#include "droplab/log.hpp"
#include "droplab/simd/kernels.hpp"

#ifndef DROPLAB_VERSION
#define DROPLAB_VERSION "unknown"
#endif

namespace droplab::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    json results = json::object();
    json tolerances = json::object();
    bool pass = true;
};

DropletOptions droplet_options(const RunConfig& cfg, const std::string& loc_ref) {
    DropletOptions d = cfg.droplet;
    d.potential_ref = cfg.potential.id();
    d.localization_ref = loc_ref;
    return d;
}

void write_chain(const fs::path& dir, const DropletChain& chain, Outcome& out) {
    for (std::size_t k = 0; k < chain.size(); ++k) {
        const std::string stem = "droplet_" + std::to_string(k);
        io::write_mask(dir, stem, chain.droplets[k].mask);
        io::write_field(dir, "qhat_" + std::to_string(k), chain.solutions[k].qhat);
    }
    io::write_json(dir / "chain.json", chain.manifest()["entries"]);
    out.results["chain"] = chain.manifest();
    out.results["chain"].erase("entries");
    out.pass = out.pass && chain.complete && chain.masks_monotone && chain.qhat_monotone && chain.correctly_indexed;
    if (!chain.complete) throw Error(chain.error_kind, chain.error_message);
}

Outcome run_droplet(const RunConfig& cfg, const fs::path& dir) {
    Outcome out;
    const SampledPotential sp = sample_potential(cfg.potential, cfg.grid);
    const Localization loc = build_localization(cfg.localization, cfg.grid);
    const ObstacleSolution sol = solve_obstacle(sp.Q, sp.laplQ, loc, cfg.t, cfg.obstacle);
    const Droplet d = make_droplet(sol, sp.laplQ, sp.Q, droplet_options(cfg, loc.id()));
    const RobinEstimate r = robin_constant(d, sp.Q, cfg.droplet.tol_flat, cfg.droplet.tol_robin);

    io::write_field(dir, "qhat", sol.qhat);
    io::write_field(dir, "density", d.density);
    io::write_field(dir, "measure", d.measure);
    io::write_mask(dir, "coincidence", sol.coincidence);
    io::write_mask(dir, "droplet", d.mask);

    out.results = sol.manifest();
    out.results["robin"] = d.robin;
    out.results["robin_estimate"] = r.to_json();
    out.results["droplet"] = d.to_json();
    out.tolerances = {{"tol_obs", sol.tol_obs},
                      {"tol_mass", sol.tol_mass},
                      {"tol_flat", r.tol_flat},
                      {"tol_robin", r.tol_robin}};
    out.pass = r.flat && r.consistent && sol.complementarity_fraction == 1.0 && !d.degenerate;
    return out;
}

ChainOptions chain_options(const RunConfig& cfg, int jobs) {
    ChainOptions o;
    o.obstacle = cfg.obstacle;
    o.droplet = cfg.droplet;
    o.jobs = jobs;
    return o;
}

Outcome run_evolve(const RunConfig& cfg, const fs::path& dir, int jobs) {
    Outcome out;
    const Localization loc = build_localization(cfg.localization, cfg.grid);
    const DropletChain chain = evolve_chain(cfg.potential, cfg.grid, loc, cfg.t_list, chain_options(cfg, jobs));
    write_chain(dir, chain, out);
    return out;
}

Outcome run_richardson(const RunConfig& cfg, const fs::path& dir, int jobs) {
    Outcome out;
    const Localization loc = build_localization(cfg.localization, cfg.grid);
    const DropletChain chain = evolve_chain(cfg.potential, cfg.grid, loc, cfg.t_list, chain_options(cfg, jobs));
    write_chain(dir, chain, out);
    MomentOptions mo;
    mo.a = cfg.a;
    mo.k_max = cfg.k_max;
    mo.k_tol_factor = cfg.k_tol_factor;
    std::vector<MomentReport> reports;
    json rj = json::array();
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        reports.push_back(richardson_moments(chain.droplets[k], chain.droplets[k + 1], mo));
        rj.push_back(reports.back().to_json());
        out.pass = out.pass && reports.back().pass();
    }
    io::write_text(dir / "moments.csv", moments_csv(reports));
    out.results["moments"] = rj;
    out.tolerances = {{"k_tol_factor", cfg.k_tol_factor}, {"tol_const", "max(1e-3, 4h) * t'"}};
    return out;
}

Outcome run_backward(const RunConfig& cfg, const fs::path& dir, int jobs) {
    Outcome out;
    const SampledPotential sp = sample_potential(cfg.potential, cfg.grid);
    const RegionMask k_star = build_region(cfg.region, cfg.grid);
    io::write_mask(dir, "k_star", k_star);
    io::write_field(dir, "qtilde", backward_potential(k_star, sp.laplQ));
    ChainOptions o = chain_options(cfg, jobs);
    o.droplet.potential_ref = "backward(" + cfg.potential.id() + ")";
    const DropletChain chain = backward_hele_shaw(k_star, sp.laplQ, cfg.t_list, o);
    write_chain(dir, chain, out);
    for (bool d : chain.dominated) out.pass = out.pass && d;
    out.results["terminal_mass"] = field::integrate_dA(sp.laplQ, k_star);
    return out;
}

Outcome run_mcmc(const RunConfig& cfg, const fs::path& dir, int jobs) {
    Outcome out;
    std::vector<std::optional<McmcRun>> runs(static_cast<std::size_t>(cfg.chains));
    std::vector<std::exception_ptr> errors(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < runs.size();) {
            try {
                McmcConfig c = cfg.mcmc;
                c.seed = cfg.seed + k;
                runs[k] = mcmc_sample(c, cfg.potential);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int workers = std::max(1, std::min(jobs, cfg.chains));
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    McmcRun all;
    all.config = cfg.mcmc;
    json chains = json::array();
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const McmcRun& r = *runs[k];
        io::write_text(dir / (runs.size() == 1 ? std::string("samples.csv") : "samples_" + std::to_string(k) + ".csv"),
                       samples_csv(r));
        chains.push_back(r.to_json());
        all.samples.insert(all.samples.end(), r.samples.begin(), r.samples.end());
    }
    out.results["chains"] = chains;
    const ScalarField r2 = ScalarField::sample(cfg.grid, [](Complex z) { return std::norm(z); });
    const auto [mean_r2, var_r2] = linear_statistic(all, r2);
    out.results["mean_abs_z_squared"] = mean_r2;
    out.results["var_abs_z_squared"] = var_r2;
    if (cfg.histogram) {
        const ScalarField hist = intensity_histogram(all, cfg.grid);
        io::write_field(dir, "intensity", hist);
        out.results["intensity_integral"] = field::integrate_dA(hist, RegionMask(cfg.grid, true));
    }
    out.tolerances = {{"acceptance_floor", 0.01}, {"adaptation_band", {0.2, 0.5}}};
    return out;
}

Outcome run_detgas(const RunConfig& cfg, const fs::path& dir) {
    Outcome out;
    GramSchmidtOptions go;
    go.tol_gs = cfg.tol_gs;
    const OrthoBasis b = gram_schmidt(cfg.potential, cfg.n, cfg.m, cfg.grid, go);
    io::write_json(dir / "basis.json", b.to_json());
    io::write_text(dir / "intensity.csv", intensity_csv(b, cfg.grid));
    const ScalarField f = intensity_field(b, cfg.grid);
    const double trace = field::integrate_dA(f, RegionMask(cfg.grid, true));
    out.results = {{"n", b.n},
                   {"m", b.m},
                   {"log_z", partition_function_beta2(b)},
                   {"gram_residual", b.gram_residual},
                   {"trace", trace}};
    out.pass = std::fabs(trace - cfg.n) <= 1e-3 * cfg.n;
    if (!cfg.n_list.empty()) {
        const auto rows = free_energy_check(cfg.potential, cfg.n_list, cfg.analytic_norms, cfg.grid);
        io::write_text(dir / "free_energy.csv", free_energy_csv(rows));
        json fj = json::array();
        for (const auto& r : rows)
            fj.push_back({{"n", r.n},
                          {"log_z", r.log_z},
                          {"free_energy", r.free_energy},
                          {"target", r.target ? json(*r.target) : json(nullptr)}});
        out.results["free_energy"] = fj;
    }
    out.tolerances = {{"tol_gs", cfg.tol_gs}, {"trace_rel_tol", 1e-3}};
    return out;
}

Outcome run_verify(const RunConfig& cfg, const fs::path& dir) {
    Outcome out;
    const SampledPotential sp = sample_potential(cfg.potential, cfg.grid);
    const Localization loc = build_localization(cfg.localization, cfg.grid);
    const RegionMask S = build_region(cfg.region, cfg.grid);
    io::write_mask(dir, "candidate", S);
    LocalDropletOptions o;
    o.tol = cfg.verify_tol;
    o.tol_flat = cfg.droplet.tol_flat;
    o.r_shallow = cfg.droplet.r_shallow;
    o.eps_mass = cfg.droplet.eps_mass;
    const LocalDropletReport r = verify_local_droplet(S, loc, sp.Q, sp.laplQ, o);
    io::write_json(dir / "report.json", r.to_json(cfg.grid));
    out.results = r.to_json(cfg.grid);
    out.tolerances = {{"tol", r.tol}, {"tol_flat", r.tol_flat}};
    out.pass = r.pass;
    return out;
}

}  // namespace

const char* version() { return DROPLAB_VERSION; }

json error_json(const std::exception& e) {
    json j = {{"message", e.what()}};
    if (const auto* de = dynamic_cast<const Error*>(&e)) j["kind"] = de->kind();
    else j["kind"] = "internal";
    if (const auto* ce = dynamic_cast<const ConfigErrors*>(&e)) j["errors"] = ce->errors();
    return {{"error", j}};
}

int execute(const RunConfig& cfg, const ExecOptions& opts) {
    const fs::path dir = opts.output_dir;
    fs::create_directories(dir);
    fs::remove(dir / "error.json");
    const auto start = std::chrono::steady_clock::now();
    json manifest = {{"version", version()},
                     {"command", cfg.command},
                     {"config", cfg.resolved},
                     {"defaults", defaults_table()},
                     {"jobs", opts.jobs},
                     {"simd_backend", simd::backend_name(simd::active_backend())}};
    int status = 0;
    try {
        Outcome out;
        const int jobs = std::max(1, opts.jobs);
        if (cfg.command == "droplet") out = run_droplet(cfg, dir);
        else if (cfg.command == "evolve") out = run_evolve(cfg, dir, jobs);
        else if (cfg.command == "richardson") out = run_richardson(cfg, dir, jobs);
        else if (cfg.command == "heleshaw-backward") out = run_backward(cfg, dir, jobs);
        else if (cfg.command == "mcmc") out = run_mcmc(cfg, dir, jobs);
        else if (cfg.command == "detgas") out = run_detgas(cfg, dir);
        else if (cfg.command == "verify") out = run_verify(cfg, dir);
        else throw ConfigurationError("unknown command '" + cfg.command + "'");
        manifest["results"] = std::move(out.results);
        manifest["tolerances"] = std::move(out.tolerances);
        manifest["pass"] = out.pass;
        status = out.pass ? 0 : 1;
        if (!out.pass) log::warn("run finished but an internal check failed; see manifest.json");
    } catch (const std::exception& e) {
        const json err = error_json(e);
        io::write_json(dir / "error.json", err);
        manifest["error"] = err["error"];
        manifest["pass"] = false;
        log::warn(std::string("run failed: ") + e.what());
        status = 2;
    }
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::write_json(dir / "manifest.json", manifest);
    return status;
}

}  // namespace droplab::cli
