#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ccopf/case_model.hpp"

namespace ccopf {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Weighted Laplacian of the line susceptances: B_ij = -beta_ij for lines,
/// B_ii = sum of incident susceptances. Parallel lines add.
struct Laplacian {
    SparseMatrix matrix;
    std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
};

Laplacian build_laplacian(const GridCase& grid);

struct FactorOptions {
    /// Symmetric diagonal scaling of the reduced matrix before factoring.
    bool equilibrate = false;
    /// Relative residual that triggers iterative refinement.
    double residual_tolerance = 1e-12;
    int max_refinements = 4;
};

/// Factorization of the reduced Laplacian (slack row and column removed) plus
/// the wind-influence columns pi_k = Bhat^{-1} e_k, zero-padded at the slack.
///
/// Angles are in "MW-scaled" units: B theta = injection (MW), so a line flow
/// in MW is beta * (theta_i - theta_j). Radians are theta / baseMVA.
class NetworkFactors {
public:
    NetworkFactors(const GridCase& grid, const Laplacian& laplacian, const FactorOptions& options = {});
    ~NetworkFactors();
    NetworkFactors(NetworkFactors&&) noexcept;
    NetworkFactors& operator=(NetworkFactors&&) noexcept;

    const GridCase& grid() const { return *grid_; }
    std::size_t num_buses() const { return n_; }
    int slack() const { return static_cast<int>(n_) - 1; }
    const SparseMatrix& reduced() const { return reduced_; }

    /// Solves Bhat x = rhs for the n-1 non-slack rows.
    Vector solve_reduced(const Vector& rhs) const;

    /// Solves Bhat x = rhs[0..n-2] and returns x padded with 0 at the slack.
    Vector solve_padded(const Vector& rhs) const;

    /// pi column of wind farm k (index into grid().wind_farms()), length n.
    const Vector& wind_column(std::size_t k) const { return wind_columns_.at(k); }
    const std::vector<Vector>& wind_columns() const { return wind_columns_; }

private:
    struct Solver;
    std::shared_ptr<const GridCase> grid_;
    std::size_t n_ = 0;
    SparseMatrix reduced_;
    Vector scaling_;
    std::unique_ptr<Solver> solver_;
    FactorOptions options_;
    std::vector<Vector> wind_columns_;
};

/// Factors the reduced Laplacian of `grid`; throws DisconnectedGridError when singular.
NetworkFactors factor(const GridCase& grid, const FactorOptions& options = {});

/// Mean phase angles for a balanced injection (length n, sums to zero).
/// Throws InputError when the injection is unbalanced beyond `balance_tolerance`.
Vector solve_mean_angles(const NetworkFactors& factors, const Vector& injection,
                         double balance_tolerance = -1.0);

/// delta = Bhat^{-1} alpha with delta_slack = 0. alpha is per bus, sums to one.
Vector delta_from_alpha(const NetworkFactors& factors, const Vector& alpha_per_bus);

/// Per-line flows beta_ij (theta_i - theta_j) for a vector of angles.
Vector line_flows(const GridCase& grid, const Vector& theta);

}  // namespace ccopf
