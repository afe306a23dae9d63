#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
    using namespace ccopf::cli;

    CLI::App app{"Chance-constrained DC optimal power flow"};
    app.require_subcommand(1);
    RunConfig rc;

    auto common = [&rc](CLI::App* sub) {
        sub->add_option("--case", rc.case_path, "MATPOWER case file")->required();
        sub->add_option("--config", rc.config_path, "JSON run config")->required();
        sub->add_option("--out", rc.out_path, "report path")->required();
        sub->add_option("--mode", rc.mode, "standard, ccopf or robust")->capture_default_str();
        sub->add_option("--seed", rc.seed, "Monte Carlo seed (overrides the config)");
        sub->add_option("--samples", rc.samples, "Monte Carlo sample count (overrides the config)");
    };

    auto* solve = app.add_subcommand("solve", "solve and write a dispatch report");
    common(solve);

    auto* validate = app.add_subcommand("validate", "check a dispatch by analytic and Monte Carlo overload rates");
    common(validate);
    validate->add_option("--dispatch", rc.dispatch_path, "dispatch report from `solve` (default: solve inline)");
    validate->add_option("--dist", rc.distribution, "wind error distribution");
    validate->add_option("--csv", rc.csv_path, "also write a per-line CSV");

    auto* sweep = app.add_subcommand("sweep", "sweep penetration, mean_error, std_error or Gamma");
    common(sweep);
    sweep->add_option("--axis", rc.axis, "sweep axis (overrides the config)");
    sweep->add_option("--values", rc.values, "comma-separated values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    if (*solve) return cmd_solve(rc);
    if (*validate) return cmd_validate(rc);
    return cmd_sweep(rc);
}
