#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "droplab/droplet.hpp"
#include "droplab/evolution.hpp"
#include "droplab/gas.hpp"
#include "droplab/grid.hpp"
#include "droplab/obstacle.hpp"
#include "droplab/potential.hpp"

namespace droplab::cli {

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"droplet", "evolve", "richardson", "heleshaw-backward",
                                           "mcmc",    "detgas", "verify"};
    return c;
}

/// Every default used by the runner, echoed into each manifest. Entries that
/// depend on the run are given as formulas.
const nlohmann::json& defaults_table();

/// Validated run description. `resolved` is the full config with defaults
/// filled in; rerunning it reproduces the run.
struct RunConfig {
    std::string command;
    PotentialSpec potential = PotentialSpec::quadratic();
    Grid2D grid;
    std::uint64_t seed = 1;
    std::string output_dir;
    nlohmann::json localization;  ///< "all" or a region description
    ObstacleParams obstacle;
    DropletOptions droplet;

    double t = 0.0;                ///< droplet
    std::vector<double> t_list;    ///< evolve, richardson, heleshaw-backward
    int k_max = 4;                 ///< richardson
    std::optional<Complex> a;      ///< richardson moment centre
    double k_tol_factor = 5e-3;    ///< richardson
    nlohmann::json region;         ///< heleshaw-backward K_star, verify candidate
    std::optional<double> verify_tol;

    McmcConfig mcmc;  ///< mcmc (n, m, beta, ...)
    int chains = 1;
    bool histogram = true;

    int n = 0;  ///< detgas
    double m = 0.0;
    std::vector<int> n_list;
    bool analytic_norms = false;
    double tol_gs = 1e-8;

    nlohmann::json resolved;
};

/// Validation failure carrying every problem found.
class ConfigErrors : public ConfigurationError {
public:
    explicit ConfigErrors(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Strict parse: unknown keys, missing required keys and out-of-range values
/// are all collected and reported together in one ConfigurationError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);

/// Builds a region mask on the grid from {"disk": {...}}, {"annulus": {...}}
/// or {"mask": path}.
RegionMask build_region(const nlohmann::json& region, const Grid2D& grid);
Localization build_localization(const nlohmann::json& loc, const Grid2D& grid);

struct ExecOptions {
    std::filesystem::path output_dir;
    int jobs = 1;
};

/// Runs the command and writes its artifacts plus manifest.json. Returns 0
/// when every internal check passed, 1 when a check failed, and 2 after a
/// module error (error.json written).
int execute(const RunConfig& cfg, const ExecOptions& opts);

/// error.json body for an exception.
nlohmann::json error_json(const std::exception& e);

const char* version();

}  // namespace droplab::cli
