#pragma once

#include "fracscat/farfield.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fracscat {

enum class Task { greens, forward, farfield, invert, resolvent_scan, verify, inspect };

std::string_view to_string(Task t);
/// Accepts the subcommand spelling ("greens-eval", "resolvent-scan", ...) or the config spelling.
Task parse_task(std::string_view name);

struct PotentialSpec {
    std::string kind = "bump";   ///< bump | gaussian | file
    double amp = 0.2;
    double radius = 1.0;         ///< bump radius
    double sigma = 0.3;          ///< gaussian width
    double cutoff = 1.0;         ///< gaussian cutoff radius
    std::vector<double> center;
    std::string path;            ///< potential file for kind = file

    std::string describe() const;
};

struct GridSpec {
    double h = 0.0;                        ///< 0: min(lambda / ppw, extent / 6)
    double points_per_wavelength = 8.0;
    int n = 0;                             ///< 0: smallest odd count covering the support
};

struct InvertSpec {
    std::string mode = "file";             ///< file | probes | study
    std::string input;                     ///< far-field CSV for mode = file
    int target_n = 64;
    double target_L = 4.0;
    double reg = 1e-8;
    bool symmetrize = true;
    std::vector<double> l_magnitudes{10.0, 20.0, 40.0};
    std::vector<std::vector<double>> m_set;
};

struct ResolventSpec {
    std::string exponents = "picked";      ///< picked | uniform | explicit
    double p = 0.0, q = 0.0;
    std::vector<double> lambdas{4.0, 16.0, 64.0};
    double epsilon = 0.25;
    int n = 32;
    double L = 5.0;
    int trials = 4;
};

/// One scenario file. Keys not listed here are rejected.
struct Scenario {
    std::string name = "scenario";
    std::optional<Task> task;
    ProblemParams params;
    PotentialSpec potential;
    GridSpec grid;
    SolveOptions solve;
    QuadratureSpec quad;
    AmplitudeWeights weights = AmplitudeWeights::midpoint;
    std::vector<double> radii{0.5, 1.0, 2.0, 5.0};
    std::vector<double> theta;              ///< forward incidence (default e_d)
    int n_theta = 8;
    int n_xhat = 16;
    InvertSpec invert;
    ResolventSpec resolvent;
    std::vector<std::string> verify_inputs;
    std::vector<int> verify_only;           ///< criterion ids; empty runs all
    std::uint64_t seed = 1;
    int threads = 0;
    std::filesystem::path out = "out";
    bool slow = false;

    /// Task-specific checks; throws ConfigError with the offending key path.
    void validate(Task t) const;
    /// Deterministic JSON of every setting that affects numeric output.
    std::string canonical() const;
    std::string hash() const;
};

/// Parses YAML text; `origin` names the source in error messages.
Scenario parse_scenario(const std::string& yaml, const std::string& origin = "config");
Scenario load_scenario(const std::filesystem::path& path);

/// Applies FRACSCAT_OUT and FRACSCAT_THREADS when set.
void apply_environment(Scenario& sc);

struct RunReport {
    int exit_code = 0;                      ///< 0 ok, 4 acceptance failure
    std::vector<std::filesystem::path> artifacts;
    std::string summary;                    ///< JSON written to <out>/summary.json
};

/// Runs one task; writes artifacts under sc.out and progress lines to `log`.
/// Exceptions propagate (the CLI maps them to exit codes).
RunReport run_scenario(const Scenario& sc, Task task, std::ostream& log);

/// Human-readable description of a potential or far-field file.
std::string inspect_dataset(const std::filesystem::path& path);

/// Exit code for an exception escaping run_scenario: 2 config/format/domain, 3 numeric.
int exit_code_for(const std::exception& e);

} // namespace fracscat
