#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "droplab/cli.hpp"
#include "droplab/io.hpp"

namespace droplab::cli {

using json = nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "; " : "") + v[k];
    return s;
}

/// Strict reader over one JSON object: typed lookups record problems instead
/// of throwing, and finish() reports keys nobody asked for.
class Reader {
public:
    Reader(const json& j, std::string path, std::vector<std::string>& errs)
        : j_(j), path_(std::move(path)), errs_(errs) {
        if (!j_.is_object()) fail("", "must be a JSON object");
    }

    bool has(const std::string& k) const { return j_.is_object() && j_.contains(k); }

    std::optional<double> real(const std::string& k, bool required = false) {
        const json* v = get(k, required);
        if (!v) return {};
        // Resolved configs spell formula defaults as "default".
        if (!required && v->is_string() && v->get<std::string>() == "default") return {};
        if (!v->is_number()) return fail(k, "must be a number"), std::nullopt;
        return v->get<double>();
    }
    std::optional<long> integer(const std::string& k, bool required = false) {
        const json* v = get(k, required);
        if (!v) return {};
        if (!v->is_number_integer()) return fail(k, "must be an integer"), std::nullopt;
        return v->get<long>();
    }
    std::optional<std::uint64_t> seed(const std::string& k) {
        const json* v = get(k, false);
        if (!v) return {};
        if (!v->is_number_unsigned()) return fail(k, "must be a nonnegative integer"), std::nullopt;
        return v->get<std::uint64_t>();
    }
    std::optional<bool> boolean(const std::string& k) {
        const json* v = get(k, false);
        if (!v) return {};
        if (!v->is_boolean()) return fail(k, "must be true or false"), std::nullopt;
        return v->get<bool>();
    }
    std::optional<std::string> str(const std::string& k, bool required = false) {
        const json* v = get(k, required);
        if (!v) return {};
        if (!v->is_string()) return fail(k, "must be a string"), std::nullopt;
        return v->get<std::string>();
    }
    std::optional<std::vector<double>> reals(const std::string& k, bool required = false) {
        const json* v = get(k, required);
        if (!v) return {};
        std::vector<double> out;
        if (!v->is_array()) return fail(k, "must be an array of numbers"), std::nullopt;
        for (const auto& e : *v) {
            if (!e.is_number()) return fail(k, "must be an array of numbers"), std::nullopt;
            out.push_back(e.get<double>());
        }
        return out;
    }
    std::optional<Complex> point(const std::string& k, bool required = false) {
        auto v = reals(k, required);
        if (!v) return {};
        if (v->size() != 2) return fail(k, "must be [x, y]"), std::nullopt;
        return Complex((*v)[0], (*v)[1]);
    }
    const json* any(const std::string& k, bool required = false) { return get(k, required); }

    void fail(const std::string& k, const std::string& msg) {
        errs_.push_back((k.empty() ? path_ : qualified(k)) + " " + msg);
    }
    std::string qualified(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    void finish() {
        if (!j_.is_object()) return;
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) errs_.push_back("unknown key '" + qualified(k) + "'");
    }

private:
    const json* get(const std::string& k, bool required) {
        used_.insert(k);
        if (!j_.is_object() || !j_.contains(k)) {
            if (required) errs_.push_back("missing required key '" + qualified(k) + "'");
            return nullptr;
        }
        return &j_.at(k);
    }

    const json& j_;
    std::string path_;
    std::vector<std::string>& errs_;
    std::set<std::string> used_;
};

void positive(Reader& r, const std::string& k, const std::optional<double>& v) {
    if (v && !(*v > 0.0)) r.fail(k, "must be positive");
}

std::optional<PotentialSpec> parse_potential(const json& j, std::vector<std::string>& errs, json& out) {
    Reader r(j, "potential", errs);
    const auto family = r.str("family", true);
    std::optional<PotentialSpec> spec;
    out = json::object();
    if (family) {
        out["family"] = *family;
        try {
            if (*family == "quadratic") {
                spec = PotentialSpec::quadratic();
            } else if (*family == "anisotropic") {
                const double c = r.real("c").value_or(0.3);
                out["c"] = c;
                if (!(std::fabs(c) < 1.0)) r.fail("c", "must satisfy |c| < 1");
                else spec = PotentialSpec::anisotropic(c);
            } else if (*family == "quartic") {
                const double a = r.real("a").value_or(0.0);
                out["a"] = a;
                spec = PotentialSpec::quartic(a);
            } else if (*family == "two_well") {
                const double d = r.real("d").value_or(1.0);
                out["d"] = d;
                if (!(d > 0.0)) r.fail("d", "must be positive");
                else spec = PotentialSpec::two_well(d);
            } else if (*family == "grid_sampled") {
                const auto path = r.str("path", true);
                const auto t_max = r.real("t_max", true);
                positive(r, "t_max", t_max);
                if (path && t_max && *t_max > 0.0) {
                    out["path"] = *path;
                    out["t_max"] = *t_max;
                    spec = PotentialSpec::grid_sampled_file(*path, *t_max);
                }
            } else {
                r.fail("family", "must be one of quadratic, anisotropic, quartic, two_well, grid_sampled");
            }
        } catch (const Error& e) {
            errs.push_back(std::string("potential: ") + e.what());
            spec.reset();
        }
    }
    if (const json* cert = r.any("certificate")) {
        Reader c(*cert, "potential.certificate", errs);
        const auto d0 = c.real("delta0", true), c0 = c.real("C0", true);
        c.finish();
        if (d0 && !(*d0 > 0.0)) c.fail("delta0", "must be positive");
        if (spec && d0 && c0 && *d0 > 0.0) {
            spec->set_certificate(*d0, *c0);
            out["certificate"] = {{"delta0", *d0}, {"C0", *c0}};
        }
    }
    r.finish();
    return spec;
}

std::optional<Grid2D> parse_grid(const json* j, std::vector<std::string>& errs, json& out) {
    const json& d = defaults_table()["grid"];
    if (!j) {
        out = d;
        return Grid2D::centered(d["half_width"].get<double>(), d["h"].get<double>());
    }
    Reader r(*j, "grid", errs);
    try {
        if (r.has("nx") || r.has("ny") || r.has("x0") || r.has("y0")) {
            const auto x0 = r.real("x0", true), y0 = r.real("y0", true), h = r.real("h", true);
            const auto nx = r.integer("nx", true), ny = r.integer("ny", true);
            r.finish();
            if (x0 && y0 && h && nx && ny) {
                out = {{"x0", *x0}, {"y0", *y0}, {"h", *h}, {"nx", *nx}, {"ny", *ny}};
                return Grid2D::make(*x0, *y0, *h, int(*nx), int(*ny));
            }
            return {};
        }
        const double hw = r.real("half_width").value_or(d["half_width"].get<double>());
        const double h = r.real("h").value_or(d["h"].get<double>());
        r.finish();
        out = {{"half_width", hw}, {"h", h}};
        return Grid2D::centered(hw, h);
    } catch (const Error& e) {
        errs.push_back(std::string("grid: ") + e.what());
        return {};
    }
}

void check_region_shape(const json& j, const std::string& path, std::vector<std::string>& errs) {
    if (!j.is_object() || j.size() != 1) {
        errs.push_back(path + " must be {\"disk\": ...}, {\"annulus\": ...} or {\"mask\": path}");
        return;
    }
    const std::string kind = j.begin().key();
    const json& body = j.begin().value();
    if (kind == "mask") {
        if (!body.is_string()) errs.push_back(path + ".mask must be a file path");
        return;
    }
    Reader r(body, path + "." + kind, errs);
    r.point("center");
    if (kind == "disk") {
        positive(r, "radius", r.real("radius", true));
    } else if (kind == "annulus") {
        const auto a = r.real("r_in", true), b = r.real("r_out", true);
        if (a && b && !(0.0 <= *a && *a < *b)) r.fail("r_in", "must satisfy 0 <= r_in < r_out");
    } else {
        errs.push_back(path + ": unknown region kind '" + kind + "'");
        return;
    }
    r.finish();
}

void parse_obstacle(const json* j, ObstacleParams& p, std::vector<std::string>& errs, json& out) {
    if (j) {
        Reader r(*j, "obstacle", errs);
        if (auto v = r.real("tol_obs")) p.tol_obs = *v;
        if (auto v = r.real("tol_mass")) p.tol_mass = *v;
        if (auto v = r.real("omega")) p.omega = *v;
        if (auto v = r.integer("max_sweeps")) p.max_sweeps = int(*v);
        if (auto v = r.integer("max_bisection")) p.max_bisection = int(*v);
        if (auto v = r.integer("margin_cells")) p.margin_cells = int(*v);
        if (auto v = r.integer("far_field_passes")) p.far_field_passes = int(*v);
        positive(r, "tol_obs", p.tol_obs);
        positive(r, "tol_mass", p.tol_mass);
        if (p.omega && !(*p.omega > 0.0 && *p.omega < 2.0)) r.fail("omega", "must lie in (0, 2)");
        if (p.max_sweeps < 1) r.fail("max_sweeps", "must be >= 1");
        if (p.max_bisection < 1) r.fail("max_bisection", "must be >= 1");
        if (p.margin_cells < 1) r.fail("margin_cells", "must be >= 1");
        if (p.far_field_passes < 0) r.fail("far_field_passes", "must be >= 0");
        r.finish();
    }
    out = {{"max_sweeps", p.max_sweeps},
           {"max_bisection", p.max_bisection},
           {"margin_cells", p.margin_cells},
           {"far_field_passes", p.far_field_passes}};
    out["tol_obs"] = p.tol_obs ? json(*p.tol_obs) : json("default");
    out["tol_mass"] = p.tol_mass ? json(*p.tol_mass) : json("default");
    out["omega"] = p.omega ? json(*p.omega) : json("default");
}

void parse_droplet_opts(const json* j, DropletOptions& d, std::vector<std::string>& errs, json& out) {
    if (j) {
        Reader r(*j, "droplet", errs);
        if (auto v = r.real("r_shallow")) d.r_shallow = *v;
        if (auto v = r.real("eps_mass")) d.eps_mass = *v;
        if (auto v = r.real("tol_flat")) d.tol_flat = *v;
        if (auto v = r.real("tol_robin")) d.tol_robin = *v;
        positive(r, "r_shallow", d.r_shallow);
        positive(r, "eps_mass", d.eps_mass);
        positive(r, "tol_flat", d.tol_flat);
        if (!(d.tol_robin > 0.0)) r.fail("tol_robin", "must be positive");
        r.finish();
    }
    out = {{"tol_robin", d.tol_robin}};
    out["r_shallow"] = d.r_shallow ? json(*d.r_shallow) : json("default");
    out["eps_mass"] = d.eps_mass ? json(*d.eps_mass) : json("default");
    out["tol_flat"] = d.tol_flat ? json(*d.tol_flat) : json("default");
}

std::vector<double> parse_t_list(Reader& r, std::size_t min_size, bool increasing) {
    auto v = r.reals("t_list", true);
    if (!v) return {};
    if (increasing)
        for (std::size_t k = 1; k < v->size(); ++k)
            if (!((*v)[k] > (*v)[k - 1])) {
                r.fail("t_list", "must be strictly increasing");
                break;
            }
    if (v->size() < min_size) r.fail("t_list", "needs at least " + std::to_string(min_size) + " entries");
    for (double t : *v)
        if (!(t > 0.0)) {
            r.fail("t_list", "entries must be positive");
            break;
        }
    return *v;
}

}  // namespace

ConfigErrors::ConfigErrors(std::vector<std::string> errors)
    : ConfigurationError(join(errors)), errors_(std::move(errors)) {}

const json& defaults_table() {
    static const json d = {
        {"grid", {{"half_width", 2.5}, {"h", 0.02}}},
        {"seed", 1},
        {"localization", "all"},
        {"obstacle",
         {{"tol_obs", "1e-8 * (max Q - min Q) over constrained nodes"},
          {"tol_mass", "max(1e-3, 4h) * t"},
          {"omega", "2 / (1 + sin(pi / (N - 1))), N = longest window side"},
          {"max_sweeps", 400000},
          {"max_bisection", 80},
          {"margin_cells", 10},
          {"far_field_passes", 2}}},
        {"droplet",
         {{"r_shallow", "3h"},
          {"eps_mass", "1e-6 * t"},
          {"tol_flat", "0.05 * (max Q - min Q) over the droplet bounding box"},
          {"tol_robin", 0.01}}},
        {"richardson", {{"k_max", 4}, {"a", "mass centroid of the smaller droplet"}, {"k_tol_factor", 5e-3}}},
        {"verify", {{"tol", "max(1e-8 * Q range on S, 2 * spread)"}}},
        {"mcmc",
         {{"m", "n"},
          {"beta", 2.0},
          {"step_sigma", "1 / sqrt(m)"},
          {"burn_in", 2000},
          {"n_samples", 10000},
          {"thinning", 1},
          {"box_half_width", 10.0},
          {"chains", 1},
          {"histogram", true}}},
        {"detgas", {{"m", "n"}, {"tol_gs", 1e-8}, {"analytic_norms", false}}},
    };
    return d;
}

RunConfig parse_config(const json& j) {
    std::vector<std::string> errs;
    RunConfig cfg;
    Reader top(j, "", errs);
    if (!j.is_object()) throw ConfigErrors(errs);

    const auto command = top.str("command", true);
    if (command && std::find(commands().begin(), commands().end(), *command) == commands().end())
        top.fail("command", "must be one of droplet, evolve, richardson, heleshaw-backward, mcmc, detgas, verify");
    cfg.command = command.value_or("");
    json resolved = {{"command", cfg.command}};

    json pot_out;
    std::optional<PotentialSpec> spec;
    if (const json* p = top.any("potential", true)) spec = parse_potential(*p, errs, pot_out);
    if (spec) cfg.potential = *spec;
    resolved["potential"] = pot_out;

    json grid_out;
    const auto grid = parse_grid(top.any("grid"), errs, grid_out);
    if (grid) cfg.grid = *grid;
    resolved["grid"] = grid_out;

    cfg.seed = top.seed("seed").value_or(defaults_table()["seed"].get<std::uint64_t>());
    resolved["seed"] = cfg.seed;
    if (auto o = top.str("output_dir")) {
        cfg.output_dir = *o;
        resolved["output_dir"] = *o;
    }

    const std::string& c = cfg.command;
    const bool solver = c == "droplet" || c == "evolve" || c == "richardson" || c == "heleshaw-backward";
    if (solver || c == "verify") {
        json o;
        parse_obstacle(top.any("obstacle"), cfg.obstacle, errs, o);
        if (solver) resolved["obstacle"] = o;
        parse_droplet_opts(top.any("droplet"), cfg.droplet, errs, o);
        resolved["droplet"] = o;
    }
    if (c == "droplet" || c == "evolve" || c == "richardson" || c == "verify") {
        cfg.localization = "all";
        if (const json* l = top.any("localization")) {
            if (l->is_string() && l->get<std::string>() == "all") cfg.localization = "all";
            else {
                check_region_shape(*l, "localization", errs);
                cfg.localization = *l;
            }
        }
        resolved["localization"] = cfg.localization;
    }

    double t_growth = 0.0;
    if (c == "droplet") {
        const auto t = top.real("t", true);
        if (t && !(*t > 0.0)) top.fail("t", "must be positive");
        cfg.t = t.value_or(0.0);
        resolved["t"] = cfg.t;
        t_growth = cfg.t;
    } else if (c == "evolve" || c == "richardson" || c == "heleshaw-backward") {
        cfg.t_list = parse_t_list(top, c == "richardson" ? 2 : 1, c != "heleshaw-backward");
        resolved["t_list"] = cfg.t_list;
        if (c != "heleshaw-backward")
            for (double t : cfg.t_list) t_growth = std::max(t_growth, t);
        if (c == "richardson") {
            cfg.k_max = int(top.integer("k_max").value_or(4));
            if (cfg.k_max < 1) top.fail("k_max", "must be >= 1");
            cfg.a = top.point("a");
            cfg.k_tol_factor = top.real("k_tol_factor").value_or(5e-3);
            if (!(cfg.k_tol_factor > 0.0)) top.fail("k_tol_factor", "must be positive");
            resolved["k_max"] = cfg.k_max;
            resolved["k_tol_factor"] = cfg.k_tol_factor;
            resolved["a"] = cfg.a ? json{cfg.a->real(), cfg.a->imag()} : json("default");
        }
        if (c == "heleshaw-backward") {
            if (const json* k = top.any("k_star", true)) {
                check_region_shape(*k, "k_star", errs);
                cfg.region = *k;
            }
            resolved["k_star"] = cfg.region;
        }
    } else if (c == "verify") {
        if (const json* s = top.any("candidate", true)) {
            check_region_shape(*s, "candidate", errs);
            cfg.region = *s;
        }
        cfg.verify_tol = top.real("tol");
        positive(top, "tol", cfg.verify_tol);
        resolved["candidate"] = cfg.region;
        resolved["tol"] = cfg.verify_tol ? json(*cfg.verify_tol) : json("default");
    } else if (c == "mcmc") {
        McmcConfig& m = cfg.mcmc;
        m.n = int(top.integer("n", true).value_or(1));
        m.m = top.real("m").value_or(double(m.n));
        m.beta = top.real("beta").value_or(2.0);
        m.step_sigma = top.real("step_sigma");
        m.burn_in = top.integer("burn_in").value_or(2000);
        m.n_samples = top.integer("n_samples").value_or(10000);
        m.thinning = top.integer("thinning").value_or(1);
        m.box_half_width = top.real("box_half_width").value_or(10.0);
        m.seed = cfg.seed;
        cfg.chains = int(top.integer("chains").value_or(1));
        cfg.histogram = top.boolean("histogram").value_or(true);
        if (m.n < 1) top.fail("n", "must be >= 1");
        if (!(m.m > 0.0)) top.fail("m", "must be positive");
        if (!(m.beta > 0.0)) top.fail("beta", "must be positive");
        positive(top, "step_sigma", m.step_sigma);
        if (m.burn_in < 0) top.fail("burn_in", "must be >= 0");
        if (m.n_samples < 1) top.fail("n_samples", "must be >= 1");
        if (m.thinning < 1) top.fail("thinning", "must be >= 1");
        if (!(m.box_half_width > 0.0)) top.fail("box_half_width", "must be positive");
        if (cfg.chains < 1) top.fail("chains", "must be >= 1");
        json mj = m.to_json();
        mj.erase("seed");
        for (const auto& [k, v] : mj.items()) resolved[k] = v;
        resolved["chains"] = cfg.chains;
        resolved["histogram"] = cfg.histogram;
        if (m.n >= 1 && m.m > 0.0) t_growth = double(m.n) / m.m;
    } else if (c == "detgas") {
        cfg.n = int(top.integer("n", true).value_or(1));
        cfg.m = top.real("m").value_or(double(cfg.n));
        cfg.tol_gs = top.real("tol_gs").value_or(1e-8);
        cfg.analytic_norms = top.boolean("analytic_norms").value_or(false);
        if (auto l = top.reals("n_list")) {
            for (double v : *l) {
                if (v != std::floor(v) || v < 2) {
                    top.fail("n_list", "entries must be integers >= 2");
                    break;
                }
                cfg.n_list.push_back(int(v));
            }
        }
        if (cfg.n < 1) top.fail("n", "must be >= 1");
        if (!(cfg.m > 0.0)) top.fail("m", "must be positive");
        positive(top, "tol_gs", cfg.tol_gs);
        if (cfg.analytic_norms && spec && spec->family() != Family::Quadratic)
            top.fail("analytic_norms", "requires the quadratic family");
        resolved["n"] = cfg.n;
        resolved["m"] = cfg.m;
        resolved["tol_gs"] = cfg.tol_gs;
        resolved["analytic_norms"] = cfg.analytic_norms;
        resolved["n_list"] = cfg.n_list;
    }
    top.finish();

    // Growth precondition, checked before any compute.
    if (errs.empty() && spec && grid && t_growth > 0.0) {
        const GrowthReport g = check_growth(cfg.potential, cfg.grid, t_growth);
        if (!g.pass) {
            std::ostringstream os;
            os << "potential fails the growth check at t=" << t_growth << ": " << g.to_json().dump();
            errs.push_back(os.str());
        }
    }
    if (!errs.empty()) throw ConfigErrors(std::move(errs));
    cfg.resolved = std::move(resolved);
    return cfg;
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigErrors({std::string("malformed JSON: ") + e.what()});
    }
    return parse_config(j);
}

RegionMask build_region(const json& region, const Grid2D& grid) {
    if (!region.is_object() || region.size() != 1) throw ConfigurationError("region must have exactly one kind");
    const std::string kind = region.begin().key();
    const json& body = region.begin().value();
    if (kind == "mask") {
        RegionMask m = io::read_mask(body.get<std::string>());
        require_same_grid(m.grid(), grid, "region mask");
        return m;
    }
    Complex c(0.0, 0.0);
    if (body.contains("center")) c = Complex(body["center"][0].get<double>(), body["center"][1].get<double>());
    if (kind == "disk") return RegionMask::disk(grid, c, body["radius"].get<double>());
    return RegionMask::annulus(grid, c, body["r_in"].get<double>(), body["r_out"].get<double>());
}

Localization build_localization(const json& loc, const Grid2D& grid) {
    if (loc.is_string()) return Localization::all();
    return Localization::region(build_region(loc, grid), loc.dump());
}

}  // namespace droplab::cli
