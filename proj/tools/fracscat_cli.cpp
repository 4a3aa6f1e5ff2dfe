#include "fracscat/errors.hpp"
#include "fracscat/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    bool slow = false;
    std::string dataset;
};

int run(const std::string& command, const Flags& flags) {
    using namespace fracscat;
    const Task task = parse_task(command);
    if (task == Task::inspect) {
        if (flags.dataset.empty())
            throw ConfigError("inspect", "expects a dataset path");
        std::cout << inspect_dataset(flags.dataset);
        return 0;
    }
    Scenario sc;
    if (!flags.config.empty())
        sc = load_scenario(flags.config);
    else if (task != Task::verify)
        throw ConfigError("--config", std::string(to_string(task)) + " needs a scenario file");
    apply_environment(sc);
    if (!flags.out.empty())
        sc.out = flags.out;
    if (flags.seed)
        sc.seed = *flags.seed;
    if (flags.threads > 0)
        sc.threads = flags.threads;
    if (flags.slow)
        sc.slow = true;
    const auto report = run_scenario(sc, task, std::cout);
    return report.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracscat: fractional Helmholtz scattering laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags flags;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
    app.add_option("--config", flags.config, "Scenario file (YAML)");
    app.add_option("--out", flags.out, "Output directory (overrides FRACSCAT_OUT and the config)");
    app.add_option("--threads", flags.threads, "Worker threads (overrides FRACSCAT_THREADS)")->check(CLI::PositiveNumber);
    app.add_flag("--slow", flags.slow, "Enable the d=3 heavy tiers");

    std::string command;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"greens-eval", "Tabulate the fundamental solution by both routes"},
        {"forward", "Solve one scattering problem and write the fields"},
        {"farfield", "Synthesize far-field amplitudes for direction sets"},
        {"invert", "Born inversion from far-field data, probes or a convergence study"},
        {"resolvent-scan", "Empirical resolvent norm lower bounds across lambda"},
        {"verify", "Run the acceptance suite"},
        {"inspect", "Describe a potential or far-field file"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->callback([&command, n = std::string(name)] { command = n; });
        if (std::string(name) == "inspect")
            sub->add_option("path", flags.dataset, "Dataset file")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (seed_opt->count() > 0)
        flags.seed = seed;

    try {
        return run(command, flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fracscat::exit_code_for(e);
    }
}
