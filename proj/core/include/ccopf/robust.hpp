#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "ccopf/cutting_plane.hpp"
#include "ccopf/network.hpp"
#include "ccopf/opf.hpp"

namespace ccopf {

/// { r : |r_k| <= gamma_k, sum_k |r_k| / gamma_k <= Gamma }.
struct BudgetSet {
    Vector gamma;
    double Gamma = 0.0;
};

/// { r : r' A r <= b }, A symmetric positive definite.
struct EllipsoidSet {
    Eigen::MatrixXd A;
    double b = 0.0;
};

/// Admissible forecast errors, one coordinate per wind farm.
class UncertaintySet {
public:
    /// The set {0}.
    explicit UncertaintySet(std::size_t dimension = 0);
    /// Throws InputError for negative parameters, a non-PD matrix or mismatched sizes.
    explicit UncertaintySet(BudgetSet budget);
    explicit UncertaintySet(EllipsoidSet ellipsoid);

    std::size_t dimension() const;
    bool is_budget() const { return std::holds_alternative<BudgetSet>(set_); }
    const BudgetSet* budget() const { return std::get_if<BudgetSet>(&set_); }
    const EllipsoidSet* ellipsoid() const { return std::get_if<EllipsoidSet>(&set_); }

    /// max_{r in set} c' r. Writes the maximizer when `argmax` is given.
    double maximize(const Vector& c, Vector* argmax = nullptr) const;

    /// Largest magnitude coordinate k can take, i.e. max |r_k|.
    double coordinate_extent(std::size_t k) const;

private:
    std::variant<BudgetSet, EllipsoidSet> set_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Mean-error set M and variance-error set S.
struct RobustSets {
    UncertaintySet mean;
    UncertaintySet variance;
};

/// Throws InputError when the sets do not match the farm count or allow a negative variance.
void validate_sets(const RobustSets& sets, const GridCase& grid);

enum class Direction { FromTo, ToFrom };

/// max over the mean set of the angle-difference shift e_ij' Bbreve r (angle units;
/// multiply by the susceptance for MW).
double mean_margin(const NetworkFactors& factors, std::size_t line, Direction dir, const UncertaintySet& set);

struct WorstVariance {
    Vector v;
    double value = 0.0;  // sum_k v_k w_k
};

/// Variance perturbation maximizing sum v_k w_k with w_k = (pi_ik - pi_jk - delta_i + delta_j)^2.
WorstVariance worst_case_variance(const NetworkFactors& factors, std::size_t line, const Vector& delta,
                                  const UncertaintySet& set);

struct DirectionalSlack {
    double from_to = 0.0;
    double to_from = 0.0;
};

/// MW slack of every robust line constraint in each direction (+inf for unlimited lines).
std::vector<DirectionalSlack> robust_line_margin(const AffineControl& control, const NetworkFactors& factors,
                                                 const RobustSets& sets, const ChanceBound& bound = {});

/// Robust generator slack: min distance to a bound minus the worst-case half-width.
std::vector<double> robust_generator_margin(const AffineControl& control, const NetworkFactors& factors,
                                            const RobustSets& sets, const ChanceBound& bound = {},
                                            GeneratorRule rule = GeneratorRule::AlphaScaled);

/// Data-robust CC-OPF. Throws InfeasibleError; when the nominal problem is
/// feasible the message says so.
Dispatch run_robust_cutting_plane(const NetworkFactors& factors, const RobustSets& sets,
                                  const CuttingPlaneOptions& options = {});

}  // namespace ccopf
