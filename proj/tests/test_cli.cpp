#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "droplab/cli.hpp"

using namespace droplab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("droplab_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json droplet_config() {
    return {{"command", "droplet"},
            {"potential", {{"family", "quadratic"}}},
            {"grid", {{"half_width", 2.0}, {"h", 0.05}}},
            {"t", 0.5}};
}

json detgas_config() {
    return {{"command", "detgas"},
            {"potential", {{"family", "quadratic"}}},
            {"grid", {{"half_width", 2.2}, {"h", 0.05}}},
            {"n", 16},
            {"n_list", {4, 8}},
            {"analytic_norms", true}};
}

// Every file under dir except the manifest, by relative path.
std::map<std::string, std::string> artifacts(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json")
            out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

int run_cli(const std::string& args) {
    const char* exe = std::getenv("DROPLAB_CLI");
    REQUIRE(exe != nullptr);
    const int status = std::system((std::string(exe) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("valid configs resolve every default") {
    const auto cfg = cli::parse_config(droplet_config());
    CHECK(cfg.command == "droplet");
    CHECK(cfg.t == 0.5);
    CHECK(cfg.grid.h == doctest::Approx(0.05));
    for (const char* key : {"command", "potential", "grid", "t", "seed", "obstacle"}) CHECK(cfg.resolved.contains(key));
    // The resolved config parses to the same run.
    const auto again = cli::parse_config(cfg.resolved);
    CHECK(again.resolved == cfg.resolved);

    const auto mc = cli::parse_config_text(R"({"command":"mcmc","potential":{"family":"quadratic"},"n":4})");
    CHECK(mc.mcmc.n == 4);
    CHECK(mc.mcmc.m == 4.0);
    CHECK(cli::defaults_table().is_object());
}

TEST_CASE("invalid configs report every error together") {
    json j = droplet_config();
    j["t"] = -1.0;
    j["foo"] = 3;
    try {
        cli::parse_config(j);
        FAIL("expected ConfigErrors");
    } catch (const cli::ConfigErrors& e) {
        CHECK(e.errors().size() >= 2);
        bool unknown = false;
        for (const auto& s : e.errors()) unknown = unknown || s.find("unknown key 'foo'") != std::string::npos;
        CHECK(unknown);
    }
    CHECK_THROWS_AS(cli::parse_config_text("{not json"), ConfigurationError);
    CHECK_THROWS_AS(cli::parse_config_text(R"({"command":"nope"})"), ConfigurationError);
    CHECK_THROWS_AS(cli::parse_config_text(R"({"command":"evolve","t_list":[0.5,0.4]})"), ConfigurationError);
    CHECK_THROWS_AS(cli::parse_config_text(R"({"command":"mcmc"})"), ConfigurationError);
    // Growth fails before any solve.
    CHECK_THROWS_AS(cli::parse_config_text(R"({"command":"droplet","grid":{"half_width":1.0,"h":0.05},"t":50})"),
                    ConfigurationError);
}

TEST_CASE("regions from descriptions") {
    const Grid2D g = Grid2D::centered(2.0, 0.05);
    const auto d = cli::build_region(json{{"disk", {{"center", {0.5, 0}}, {"radius", 0.5}}}}, g);
    CHECK(d == RegionMask::disk(g, {0.5, 0}, 0.5));
    const auto a = cli::build_region(json{{"annulus", {{"r_in", 0.2}, {"r_out", 0.8}}}}, g);
    CHECK(a == RegionMask::annulus(g, {0, 0}, 0.2, 0.8));
    CHECK_THROWS(cli::build_region(json{{"square", 1}}, g));
}

TEST_CASE("runs are reproducible and write only into the output directory") {
    const fs::path root = scratch("repro");
    for (const json& j : {droplet_config(), detgas_config()}) {
        const auto cfg = cli::parse_config(j);
        const fs::path a = root / (cfg.command + "_a"), b = root / (cfg.command + "_b");
        CHECK(cli::execute(cfg, {a, 1}) == 0);
        CHECK(cli::execute(cfg, {b, 1}) == 0);
        const auto fa = artifacts(a), fb = artifacts(b);
        CHECK(!fa.empty());
        CHECK(fa == fb);
        json ma = json::parse(slurp(a / "manifest.json")), mb = json::parse(slurp(b / "manifest.json"));
        CHECK(ma.at("pass") == true);
        for (const char* key : {"version", "command", "config", "defaults", "results", "tolerances"}) CHECK(ma.contains(key));
        ma.erase("wall_time_s");
        mb.erase("wall_time_s");
        CHECK(ma == mb);
        CHECK_FALSE(fs::exists(a / "error.json"));
    }
    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(root)) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 4);
    CHECK(fs::exists(root / "droplet_a" / "droplet.pgm"));
    CHECK(fs::exists(root / "detgas_a" / "basis.json"));
}

TEST_CASE("backward flow past the terminal mass is an error") {
    const fs::path out = scratch("backward");
    const auto cfg = cli::parse_config(json{{"command", "heleshaw-backward"},
                                            {"potential", {{"family", "quadratic"}}},
                                            {"grid", {{"half_width", 2.0}, {"h", 0.05}}},
                                            {"k_star", {{"disk", {{"radius", 1.0}}}}},
                                            {"t_list", {0.5, 1.2}}});
    CHECK(cli::execute(cfg, {out, 1}) == 2);
    REQUIRE(fs::exists(out / "error.json"));
    const json e = json::parse(slurp(out / "error.json"));
    CHECK(e.at("error").at("message").get<std::string>().find("terminal mass") != std::string::npos);
    CHECK(e.at("error").at("kind") == "precondition");
}

TEST_CASE("command line binary") {
    const fs::path dir = scratch("binary");
    std::ofstream(dir / "dg.json") << detgas_config().dump();
    std::ofstream(dir / "bad.json") << R"({"command":"detgas","n":-3,"bogus":1})";
    CHECK(run_cli("detgas --config " + (dir / "dg.json").string() + " --output " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    CHECK(run_cli("detgas --config " + (dir / "bad.json").string() + " --output " + (dir / "bad").string()) == 2);
    CHECK(fs::exists(dir / "bad" / "error.json"));
    // The subcommand must agree with the config.
    CHECK(run_cli("mcmc --config " + (dir / "dg.json").string() + " --output " + (dir / "x").string()) == 2);
    CHECK(run_cli("detgas --config " + (dir / "missing.json").string()) != 0);
    CHECK(run_cli("--version") == 0);
}
