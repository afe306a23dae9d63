#pragma once

#include <cstddef>

#include "ccopf/network.hpp"
#include "ccopf/opf.hpp"
#include "ccopf/qp.hpp"

namespace ccopf {

/// w_k = (pi_ik - pi_jk - delta_i + delta_j)^2 for every wind farm k on line (i, j).
Vector line_weights(const NetworkFactors& factors, std::size_t line, const Vector& delta);

/// C(delta) = sqrt(sum_k var_k * w_k): the flow standard deviation divided by
/// the line susceptance. The overload without `variances` uses the farms' sigma^2.
double c_value(const NetworkFactors& factors, std::size_t line, const Vector& delta);
double c_value(const NetworkFactors& factors, std::size_t line, const Vector& delta, const Vector& variances);

/// Partial derivatives of C with respect to delta_from and delta_to.
struct CGradient {
    double d_from = 0.0;
    double d_to = 0.0;
};

/// Throws std::domain_error where C <= 1e-12 (C is not differentiable there).
CGradient c_gradient(const NetworkFactors& factors, std::size_t line, const Vector& delta);
CGradient c_gradient(const NetworkFactors& factors, std::size_t line, const Vector& delta,
                     const Vector& variances);

/// Tangent underestimator C(d_hat) + grad . (delta - d_hat) <= s of one line.
struct Cut {
    std::size_t line = 0;
    int from = 0;
    int to = 0;
    Vector delta_hat;
    Vector variances;
    double value = 0.0;  // C(d_hat)
    CGradient gradient;

    /// Left-hand side of the cut at delta (compare against s).
    double evaluate(const Vector& delta) const;
};

Cut make_cut(const NetworkFactors& factors, std::size_t line, const Vector& delta_hat);
Cut make_cut(const NetworkFactors& factors, std::size_t line, const Vector& delta_hat,
             const Vector& variances);

/// The algorithm may stop when either re-check passes; requiring both makes
/// the returned point satisfy the conic and the probability tests at once.
enum class StopRule { Either, Both };

struct CuttingPlaneOptions {
    double viol_tol = 1e-6;
    int max_iter = 200;
    int cuts_per_iter = 1;
    StopRule stop_rule = StopRule::Both;
    ChanceBound bound;
    GeneratorRule gen_rule = GeneratorRule::AlphaScaled;
    const qp::QpBackend* backend = nullptr;  // default interior point when null
};

/// Nominal CC-OPF. Throws InfeasibleError when the master problem has no
/// feasible point; an iteration cap is reported in the returned SolveReport.
Dispatch run_cutting_plane(const NetworkFactors& factors, const CuttingPlaneOptions& options = {});

}  // namespace ccopf
