// droplab: batch runner. Numeric parameters come from a JSON config; flags
// only choose paths, parallelism and verbosity.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "droplab/cli.hpp"
#include "droplab/io.hpp"
#include "droplab/log.hpp"

namespace {

int report_config_error(const std::exception& e, const std::string& output) {
    std::cerr << "droplab: invalid configuration\n";
    if (const auto* ce = dynamic_cast<const droplab::cli::ConfigErrors*>(&e))
        for (const auto& msg : ce->errors()) std::cerr << "  - " << msg << "\n";
    else
        std::cerr << "  - " << e.what() << "\n";
    if (!output.empty()) {
        try {
            std::filesystem::create_directories(output);
            droplab::io::write_json(std::filesystem::path(output) / "error.json", droplab::cli::error_json(e));
        } catch (const std::exception& w) {
            std::cerr << "droplab: could not write error.json: " << w.what() << "\n";
        }
    }
    return 2;
}

int run(const std::string& command, const std::string& config_path, std::string output, int jobs) {
    nlohmann::json j;
    try {
        std::ifstream in(config_path);
        if (!in) throw droplab::IoError("cannot open config '" + config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        j = nlohmann::json::parse(ss.str());
        if (!j.is_object()) throw droplab::ConfigurationError("config must be a JSON object");
        if (!j.contains("command")) j["command"] = command;
        if (j["command"] != command)
            throw droplab::ConfigurationError("config command '" + j["command"].dump() +
                                              "' does not match subcommand '" + command + "'");
        if (output.empty() && j.contains("output_dir") && j["output_dir"].is_string())
            output = j["output_dir"].get<std::string>();
        if (output.empty()) throw droplab::ConfigurationError("no output directory: pass --output or set output_dir");
    } catch (const nlohmann::json::parse_error& e) {
        return report_config_error(droplab::ConfigurationError(std::string("malformed JSON: ") + e.what()), output);
    } catch (const std::exception& e) {
        return report_config_error(e, output);
    }

    droplab::cli::RunConfig cfg;
    try {
        cfg = droplab::cli::parse_config(j);
    } catch (const std::exception& e) {
        return report_config_error(e, output);
    }
    const int status = droplab::cli::execute(cfg, {output, jobs});
    std::cout << (status == 0 ? "ok" : status == 1 ? "checks failed" : "error") << ": " << output
              << "/manifest.json\n";
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"droplab: equilibrium droplets, Laplacian growth and Coulomb gas runs"};
    app.set_version_flag("--version", std::string(droplab::cli::version()));
    app.require_subcommand(1);

    std::string config, output;
    int jobs = 1;
    bool verbose = false;
    for (const auto& name : droplab::cli::commands()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " command");
        sub->add_option("--config", config, "JSON run config")->required()->check(CLI::ExistingFile);
        sub->add_option("--output", output, "output directory (overrides output_dir)");
        sub->add_option("--jobs", jobs, "concurrent independent solves or chains")->check(CLI::PositiveNumber);
        sub->add_flag("--verbose", verbose, "log progress to stderr");
    }
    CLI11_PARSE(app, argc, argv);

    droplab::log::set_level(verbose ? droplab::log::Level::Info : droplab::log::Level::Warn);
    const std::string command = app.get_subcommands().front()->get_name();
    return run(command, config, output, jobs);
}
