#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "bilevel/harness.hpp"

namespace bilevel::cli {

/// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kSolverFailure = 2,
    kDiagnosticFailure = 3,
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
};

/// A validated run configuration turned into an experiment.
struct RunConfig {
    ExperimentSpec experiment;
    std::string problem_kind;
    /// Lower-level gradient scale fault, for exercising the diagnostics.
    std::optional<double> gradient_fault;
};

/// Parses and validates a JSON config. Throws ConfigError with the key path.
RunConfig parse_run_config(const nlohmann::json& doc, const Overrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides = {});

int cmd_solve(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err);

/// Writes A.csv, b.csv and truth.json under `out_dir`.
int cmd_gen(const std::string& kind, const std::map<std::string, double>& params,
            const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

int cmd_check(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err);

/// Entry point shared by the executable and the tests.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace bilevel::cli
