#pragma once

// Cutting-plane loop shared by the nominal and robust solvers. Not installed.

#include <functional>
#include <vector>

#include "ccopf/cutting_plane.hpp"

namespace ccopf::detail {

/// What the loop must guard against on every line and generator.
struct RiskModel {
    /// Worst-case mean flow shift per line in MW, for the from->to and to->from directions.
    std::vector<double> shift_up;
    std::vector<double> shift_down;
    /// Per-farm variance at which the standard deviation is evaluated before perturbation.
    Vector base_variance;
    /// Total wind variance in the generator half-width.
    double generator_variance = 0.0;
    /// Variance perturbation maximizing sum v_k w_k; empty means no perturbation.
    std::function<Vector(std::size_t line, const Vector& weights)> worst_perturbation;
};

RiskModel nominal_risk(const NetworkFactors& factors);

Dispatch run_engine(const NetworkFactors& factors, const CuttingPlaneOptions& options,
                    const RiskModel& risk);

}  // namespace ccopf::detail
