#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccopf/case_model.hpp"
#include "ccopf/cutting_plane.hpp"
#include "ccopf/opf.hpp"
#include "ccopf/robust.hpp"

namespace ccopf {

/// Uncertainty set as written in the config, before the farm count is known.
struct SetSpec {
    std::string kind = "budget";  // "budget" or "ellipsoid"
    std::vector<double> gamma;    // budget: one entry per farm, or one entry for all
    double Gamma = 0.0;
    std::vector<std::vector<double>> A;  // ellipsoid
    double b = 0.0;
};

struct RobustSpec {
    std::optional<SetSpec> mean;      // absent: {0}
    std::optional<SetSpec> variance;  // absent: {0}
};

struct SolverSettings {
    double viol_tol = 1e-6;
    int max_iter = 200;
    int cuts_per_iter = 1;
    StopRule stop_rule = StopRule::Both;
};

struct ValidationSettings {
    std::string distribution = "gaussian";
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
};

struct SweepSettings {
    std::string axis;  // penetration, mean_error, std_error, Gamma
    std::vector<double> values;
};

/// Everything a run reads from the JSON config file. Unknown keys are rejected.
struct Config {
    WindSpec wind;
    std::optional<RobustSpec> robust;
    std::optional<double> omega;  // conservative coefficient replacing eta(eps)
    GeneratorRule gen_rule = GeneratorRule::AlphaScaled;
    StandardAlphaRule standard_alpha = StandardAlphaRule::HeadroomUniform;
    bool merge_parallel = true;
    SolverSettings solver;
    ValidationSettings validation;
    SweepSettings sweep;

    ChanceBound chance_bound() const;
    CuttingPlaneOptions cutting_plane_options() const;
};

/// Throws InputError on syntax errors, wrong types, bad values and unknown keys.
Config parse_config(std::string_view json_text);
Config load_config(const std::filesystem::path& path);

UncertaintySet make_set(const SetSpec& spec, std::size_t farms);
RobustSets make_sets(const RobustSpec& spec, std::size_t farms);

}  // namespace ccopf
