// Command-line front end for the two-user downlink study: runs trade-off
// sweeps to CSV, cross-checks the ordering-only closed forms against Monte
// Carlo, and prints per-scheme feasibility frontiers.
//
// Exit codes: 0 success, 2 sweep produced no feasible point, 1 any error
// (bad arguments, unreadable config, failed validation).

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "noma/experiment.hpp"
#include "noma/util.hpp"

namespace {

struct CommonOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_states;
};

noma::ExperimentConfig load_with_overrides(const std::string& config_path,
                                           const CommonOverrides& overrides) {
    noma::ExperimentConfig config = noma::load_experiment_config(config_path);
    if (overrides.seed) {
        config.seed = *overrides.seed;
    }
    if (overrides.n_states) {
        config.n_states = *overrides.n_states;
        noma::validate_experiment_config(config);
    }
    return config;
}

int run_command(const std::string& config_path, const CommonOverrides& overrides,
                const std::string& output_path) {
    const noma::ExperimentConfig config = load_with_overrides(config_path, overrides);
    const noma::ExperimentResult result = noma::run_experiment(config);
    if (output_path == "-") {
        noma::emit_csv(result, std::cout);
    } else {
        noma::emit_csv_file(result, output_path);
        std::cerr << "wrote " << output_path << '\n';
    }
    return result.any_feasible ? 0 : 2;
}

int validate_command(const std::string& config_path, const CommonOverrides& overrides,
                     std::size_t mc_samples, bool self_test) {
    const noma::ExperimentConfig config = load_with_overrides(config_path, overrides);
    if (self_test) {
        // Corrupt one closed form on purpose; the harness must catch it.
        const noma::ValidationReport report =
            noma::validate_partial_csit(config, mc_samples, true);
        noma::write_validation_report(report, std::cout);
        if (report.pass) {
            std::cerr << "self_test: seeded fault was NOT detected\n";
            return 1;
        }
        std::cout << "self_test: seeded fault detected as expected\n";
        return 0;
    }
    const noma::ValidationReport report =
        noma::validate_partial_csit(config, mc_samples, false);
    noma::write_validation_report(report, std::cout);
    return report.pass ? 0 : 1;
}

int rmax_command(const std::string& config_path, const CommonOverrides& overrides) {
    const noma::ExperimentConfig config = load_with_overrides(config_path, overrides);
    const auto frontier = noma::feasibility_frontier(config);
    for (const noma::FrontierPoint& point : frontier) {
        std::cout << "mode=" << noma::mode_name(config.mode)
                  << " scheme=" << noma::scheme_name(point.scheme) << ' ' << point.label
                  << '=' << noma::format_sig9(point.value) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-user downlink rate/throughput trade-off experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_path = "-";
    std::size_t mc_samples = 200000;
    bool self_test = false;
    CommonOverrides overrides;
    std::uint64_t seed_value = 0;
    std::size_t n_states_value = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option("--seed", seed_value, "override the config seed")
            ->each([&](const std::string&) { overrides.seed = seed_value; });
        cmd->add_option("--n-states", n_states_value,
                        "override the config ensemble size")
            ->each([&](const std::string&) { overrides.n_states = n_states_value; });
    };

    CLI::App* run = app.add_subcommand("run", "run the sweep and emit CSV");
    add_common(run);
    run->add_option("--output", output_path, "CSV path, or - for stdout");

    CLI::App* validate =
        app.add_subcommand("validate", "closed forms vs Monte Carlo check");
    add_common(validate);
    validate->add_option("--mc-samples", mc_samples, "Monte Carlo sample count");
    validate->add_flag("--self-test", self_test,
                       "seed a formula fault and require the harness to catch it");

    CLI::App* rmax =
        app.add_subcommand("rmax", "print the per-scheme feasibility frontier");
    add_common(rmax);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return run_command(config_path, overrides, output_path);
        }
        if (validate->parsed()) {
            return validate_command(config_path, overrides, mc_samples, self_test);
        }
        if (rmax->parsed()) {
            return rmax_command(config_path, overrides);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
