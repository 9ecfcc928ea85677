#include "mal/cli/commands.hpp"
#include "mal/cli/config.hpp"
#include "mal/error.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace mal::cli;
    CLI::App app{"Numerical lab for least-action principles on the flat torus"};
    app.require_subcommand(1);

    std::string config_path;
    auto* solve = app.add_subcommand("solve", "solve an eps-geodesic or weak geodesic between fixture endpoints");
    solve->add_option("--config", config_path, "INI experiment config")->required();

    std::string suites;
    auto* verify = app.add_subcommand("verify", "run verification suites and print JSON-lines records");
    verify->add_option("--config", config_path, "INI experiment config")->required();
    verify->add_option("--suite", suites, "comma-separated suite names (overrides verification.suites)");

    std::string in_csv;
    std::string out_csv;
    auto* rearrange = app.add_subcommand("rearrange", "decreasing rearrangement of a value,weight CSV");
    rearrange->add_option("--in", in_csv, "input CSV")->required();
    rearrange->add_option("--out", out_csv, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_config_error;
    }

    try {
        if (*rearrange) return cmd_rearrange(in_csv, out_csv, std::cerr);
        ExperimentConfig config = parse_config(config_path);
        if (*verify && !suites.empty()) {
            config.verification.suites = split_list(suites, "--suite");
            config.validate();
        }
        const RunContext ctx{config, std::filesystem::path(config_path).parent_path(), std::cout, std::cerr};
        return *solve ? cmd_solve(ctx) : cmd_verify(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const mal::HomogeneityRequired& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const mal::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_solver_failure;
    }
}
