#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ccopf/case_model.hpp"
#include "ccopf/network.hpp"
#include "ccopf/qp.hpp"

namespace ccopf {

/// Generator outputs p_g = p_bar_g - alpha_g * sum(omega). Indexed by generator.
struct AffineControl {
    Vector p_bar;
    Vector alpha;
};

/// Sums a per-generator vector onto buses (length n).
Vector per_bus(const GridCase& grid, const Vector& per_generator);

/// How a tolerance epsilon becomes a standard-deviation multiple.
enum class ChanceBoundKind {
    TwoSidedSplit,  // eta(eps) on each side
    Conservative,   // a user-supplied omega >= eta(eps) replaces eta(eps)
};

struct ChanceBound {
    ChanceBoundKind kind = ChanceBoundKind::TwoSidedSplit;
    double omega = 0.0;

    /// eta(eps), or omega in conservative mode (throws InputError if omega < eta(eps)).
    double multiplier(double epsilon) const;
    /// The per-side Gaussian exceedance probability the multiplier guarantees.
    double effective_epsilon(double epsilon) const;
};

/// Generator chance constraints either scale the half-width by alpha_g
/// (matches var P_g = alpha_g^2 sum sigma^2) or use the unscaled half-width.
enum class GeneratorRule { AlphaScaled, Unscaled };

struct FlowStat {
    double mean_mw = 0.0;
    double std_mw = 0.0;
};

struct GenStat {
    double mean_mw = 0.0;
    double std_mw = 0.0;
};

enum class Termination {
    Optimal,          // standard OPF, single solve
    ConicFeasible,    // no conic constraint violated beyond tolerance
    ChanceFeasible,   // chance constraints hold when re-checked from (p_bar, alpha)
    IterationCap,
    MasterInfeasible,
};

const char* to_string(Termination t);

struct IterationRecord {
    double lower_bound = 0.0;
    double conic_violation = 0.0;
    double chance_violation = 0.0;
    std::size_t cuts_added = 0;
};

struct SolveReport {
    int iterations = 0;
    Termination termination = Termination::Optimal;
    std::vector<IterationRecord> trace;
    double max_conic_violation = 0.0;
    double max_chance_violation = 0.0;
    std::size_t total_cuts = 0;
};

struct Dispatch {
    AffineControl control;
    Vector theta_bar;  // per bus, slack = 0
    Vector delta;      // per bus, slack = 0
    std::vector<FlowStat> flow_stats;
    std::vector<GenStat> gen_stats;
    double objective = 0.0;  // expected cost
    SolveReport report;
};

/// Sum of p_bar + mu - d; zero for a viable control.
double check_viability(const AffineControl& control, const GridCase& grid);

/// |residual| <= 1e-8 * sum |d| (or 1e-8 when there is no load).
bool is_viable(const AffineControl& control, const GridCase& grid);

/// Mean and standard deviation of every line flow. Throws InputError for a non-viable control.
std::vector<FlowStat> flow_statistics(const AffineControl& control, const NetworkFactors& factors);

std::vector<GenStat> generator_statistics(const AffineControl& control, const GridCase& grid);

double expected_cost(const AffineControl& control, const GridCase& grid);

struct ChanceMargins {
    std::vector<double> line;       // +inf for unlimited lines
    std::vector<double> generator;
};

/// Distance to each chance constraint in MW; non-negative means satisfied.
ChanceMargins chance_margins(const AffineControl& control, const NetworkFactors& factors,
                             const ChanceBound& bound = {},
                             GeneratorRule rule = GeneratorRule::AlphaScaled);

/// Fills theta_bar, delta, statistics and objective for a control.
Dispatch make_dispatch(const AffineControl& control, const NetworkFactors& factors);

enum class StandardAlphaRule {
    HeadroomUniform,  // 1/k over generators strictly inside their bounds
    Uniform,          // 1/|G| over all generators
};

struct StandardOpfOptions {
    StandardAlphaRule alpha_rule = StandardAlphaRule::HeadroomUniform;
    const qp::QpBackend* backend = nullptr;  // default interior point when null
};

/// Deterministic OPF with wind fixed at its mean. Throws InfeasibleError.
Dispatch solve_standard_opf(const NetworkFactors& factors, const StandardOpfOptions& options = {});

}  // namespace ccopf
