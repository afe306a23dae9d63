#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccopf {

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

/// Probability that a standard Gaussian exceeds two (line default) and three
/// (generator default) standard deviations.
double default_line_epsilon();
double default_gen_epsilon();

struct Bus {
    int external_id = 0;
    double load_mw = 0.0;
    bool dummy = false;  // appended reference bus with no physical counterpart

    bool operator==(const Bus&) const = default;
};

struct Line {
    int from = 0;  // internal bus indices
    int to = 0;
    double susceptance = 1.0;  // 1/x, per unit
    double flow_limit_mw = kUnlimited;
    double epsilon = 0.0;

    /// Lines with rateA = 0 in the source file carry no limit and no chance constraint.
    bool limited() const { return flow_limit_mw < kUnlimited; }
    bool operator==(const Line&) const = default;
};

struct Generator {
    int bus = 0;
    double p_min_mw = 0.0;
    double p_max_mw = 0.0;
    double cost_quadratic = 0.0;  // $/MW^2h
    double cost_linear = 0.0;     // $/MWh
    double cost_constant = 0.0;   // $/h
    double epsilon = 0.0;

    bool operator==(const Generator&) const = default;
};

struct WindFarm {
    int bus = 0;
    double mean_mw = 0.0;
    double std_mw = 0.0;

    bool operator==(const WindFarm&) const = default;
};

/// Immutable DC network description. The reference (slack) bus is always the
/// last internal index and carries neither a generator nor a wind farm.
class GridCase {
public:
    /// Validates every invariant and throws InputError on violation.
    GridCase(std::string name, double base_mva, std::vector<Bus> buses, std::vector<Line> lines,
             std::vector<Generator> generators, std::vector<WindFarm> wind_farms);

    const std::string& name() const { return name_; }
    double base_mva() const { return base_mva_; }
    std::size_t num_buses() const { return buses_.size(); }
    int slack() const { return static_cast<int>(buses_.size()) - 1; }

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Line>& lines() const { return lines_; }
    const std::vector<Generator>& generators() const { return generators_; }
    const std::vector<WindFarm>& wind_farms() const { return wind_farms_; }

    std::optional<int> bus_index(int external_id) const;
    int external_id(int internal) const { return buses_.at(static_cast<std::size_t>(internal)).external_id; }

    double total_load() const;
    double total_wind_mean() const;
    /// Sum of wind variances, sigma_total^2.
    double total_wind_variance() const;

    bool has_generator(int bus) const;
    bool has_wind(int bus) const;

    bool operator==(const GridCase&) const = default;

private:
    std::string name_;
    double base_mva_;
    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    std::vector<Generator> generators_;
    std::vector<WindFarm> wind_farms_;
};

struct ParseOptions {
    /// Merge parallel branches into one line (summed susceptance and limit).
    /// When false they stay distinct, each with its own chance constraint.
    bool merge_parallel = true;
};

/// Parses the bus/branch/gen/gencost subset of a MATPOWER case file.
GridCase parse_matpower(std::string_view text, const ParseOptions& options = {});
GridCase load_matpower(const std::filesystem::path& path, const ParseOptions& options = {});

struct WindEntry {
    int bus = 0;  // external id
    double mean_mw = 0.0;
    double std_mw = 0.0;
};

struct LineEpsilonOverride {
    int from = 0;  // external ids, either orientation
    int to = 0;
    double epsilon = 0.0;
};

struct GenEpsilonOverride {
    int bus = 0;  // external id; applies to every generator on the bus
    double epsilon = 0.0;
};

struct WindSpec {
    std::vector<WindEntry> farms;
    double line_epsilon = default_line_epsilon();
    double gen_epsilon = default_gen_epsilon();
    std::vector<LineEpsilonOverride> line_overrides;
    std::vector<GenEpsilonOverride> gen_overrides;
};

/// Returns a copy of `grid` with the wind farms attached and chance tolerances set.
GridCase attach_wind(const GridCase& grid, const WindSpec& spec);

/// Mean wind over total demand.
double penetration(const GridCase& grid);

GridCase scale_loads(const GridCase& grid, double factor);

/// Multiplies every wind mean and standard deviation by `factor` (keeps sigma/mu).
GridCase scale_wind(const GridCase& grid, double factor);

}  // namespace ccopf
