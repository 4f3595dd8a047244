// anyonpt <runner> --config <file> [--jobs N] [--output DIR]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical error.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "anyonpt/experiment.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anyonic PT-symmetric Schrodinger simulations"};
    app.require_subcommand(1, 1);
    std::string config_path;
    unsigned jobs = 1;
    std::string output;
    std::string runner_name;

    for (const char* name : {"spectrum", "delocalize", "scatter", "amplify", "lasermap"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--jobs,-j", jobs, "worker threads for the sweep")->check(CLI::PositiveNumber);
        sub->add_option("--output,-o", output, "output directory (overrides ANYONPT_OUTPUT and the config)");
        sub->callback([&runner_name, name] { runner_name = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        auto cfg = anyonpt::load_config(config_path);
        if (cfg.experiment != anyonpt::parse_runner(runner_name))
            throw anyonpt::ConfigError(config_path + ": config is for '" + anyonpt::to_string(cfg.experiment) +
                                       "', not '" + runner_name + "'");
        anyonpt::RunOptions opt;
        opt.jobs = jobs;
        opt.output_dir = cfg.output_dir;
        if (const char* env = std::getenv("ANYONPT_OUTPUT"); env && *env) opt.output_dir = env;
        if (!output.empty()) opt.output_dir = output;

        const auto summary = anyonpt::run_experiment(cfg, opt);
        std::cout << "wrote " << summary.files.size() << " files to " << summary.output_dir.string() << '\n';
        return exit_ok;
    } catch (const anyonpt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const anyonpt::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const anyonpt::ContractError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const anyonpt::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}
