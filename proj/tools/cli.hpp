#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ccopf::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kInfeasible = 2,
    kIterationCap = 3,  // also used when the QP solver fails numerically
    kValidationGate = 4,
};

struct RunConfig {
    std::string case_path;
    std::string config_path;
    std::string out_path;
    std::string mode = "ccopf";  // standard, ccopf, robust
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    // validate
    std::string dispatch_path;  // solve report to validate instead of solving inline
    std::string distribution;   // overrides the config
    std::string csv_path;
    // sweep
    std::string axis;
    std::vector<double> values;
};

/// Each command writes its report to out_path, prints a short summary to
/// standard output and diagnostics to standard error, and returns an exit code.
int cmd_solve(const RunConfig& config);
int cmd_validate(const RunConfig& config);
int cmd_sweep(const RunConfig& config);

/// Formats a double with 17 significant digits ("inf"/"-inf"/"nan" for non-finite values).
std::string format_number(double value);

}  // namespace ccopf::cli
