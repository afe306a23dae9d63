#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace ccopf::qp {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// minimize 1/2 x'Px + q'x + c  subject to  Ax = b,  Gx <= h.
///
/// Every row carries a tag naming its constraint class ("line_limit",
/// "power_balance", ...) and an elastic weight used when certifying
/// infeasibility; higher weights mark rows that should be reported last.
struct QpProblem {
    Eigen::Index num_vars = 0;
    SparseMatrix hessian;  // symmetric positive semidefinite, full storage
    Vector linear;
    double constant = 0.0;

    SparseMatrix eq;
    Vector eq_rhs;
    std::vector<std::string> eq_tags;
    std::vector<double> eq_weights;

    SparseMatrix ineq;
    Vector ineq_rhs;
    std::vector<std::string> ineq_tags;
    std::vector<double> ineq_weights;

    double objective(const Vector& x) const;
};

using RowEntries = std::vector<std::pair<Eigen::Index, double>>;

/// Incremental construction of a QpProblem.
class QpBuilder {
public:
    Eigen::Index add_variable();
    Eigen::Index add_variables(Eigen::Index count);
    Eigen::Index num_vars() const { return num_vars_; }

    /// Adds coeff * x_i^2 to the objective.
    void add_square(Eigen::Index i, double coeff);
    void add_linear(Eigen::Index i, double coeff);
    void add_constant(double c) { constant_ += c; }

    void add_equality(const RowEntries& row, double rhs, std::string tag, double weight = 1.0);
    void add_less_equal(const RowEntries& row, double rhs, std::string tag, double weight = 1.0);
    void add_greater_equal(const RowEntries& row, double rhs, std::string tag, double weight = 1.0);
    void add_lower_bound(Eigen::Index i, double lower, std::string tag, double weight = 1.0);
    void add_upper_bound(Eigen::Index i, double upper, std::string tag, double weight = 1.0);

    std::size_t num_equalities() const { return eq_rhs_.size(); }
    std::size_t num_inequalities() const { return ineq_rhs_.size(); }

    QpProblem build() const;

private:
    Eigen::Index num_vars_ = 0;
    std::vector<Eigen::Triplet<double>> hessian_;
    std::vector<std::pair<Eigen::Index, double>> linear_;
    double constant_ = 0.0;
    std::vector<Eigen::Triplet<double>> eq_;
    std::vector<double> eq_rhs_;
    std::vector<std::string> eq_tags_;
    std::vector<double> eq_weights_;
    std::vector<Eigen::Triplet<double>> ineq_;
    std::vector<double> ineq_rhs_;
    std::vector<std::string> ineq_tags_;
    std::vector<double> ineq_weights_;
};

enum class QpStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(QpStatus status);

struct QpSolution {
    QpStatus status = QpStatus::NumericalFailure;
    Vector x;
    Vector eq_dual;
    Vector ineq_dual;
    double objective = 0.0;
    int iterations = 0;
    double primal_residual = 0.0;  // max |Ax-b|, max(Gx-h)+, unscaled
    double dual_residual = 0.0;
    double gap = 0.0;
    /// Constraint classes whose rows need relaxing in the elastic problem,
    /// populated for Infeasible results.
    std::vector<std::string> infeasible_tags;
};

struct QpCapabilities {
    std::string name;
    bool warm_start = false;
};

/// Contract: for a feasible convex QP, returns a point whose constraint
/// residual is at most 1e-8 of the problem scale and whose objective is within
/// 1e-8 relative of optimal; otherwise reports Infeasible (with an elastic
/// certificate) or NumericalFailure.
class QpBackend {
public:
    virtual ~QpBackend() = default;
    virtual QpSolution solve(const QpProblem& problem) const = 0;
    virtual QpCapabilities capabilities() const = 0;
};

struct InteriorPointOptions {
    double tolerance = 1e-10;
    int max_iterations = 150;
    double regularization = 1e-10;
    int refinement_steps = 4;
    double infeasibility_tolerance = 1e-6;
};

/// Sparse primal-dual interior-point method with Mehrotra predictor-corrector
/// steps on the regularized quasi-definite KKT system.
class InteriorPointQp final : public QpBackend {
public:
    explicit InteriorPointQp(InteriorPointOptions options = {}) : options_(options) {}

    QpSolution solve(const QpProblem& problem) const override;
    QpCapabilities capabilities() const override { return {"interior-point", false}; }

    const InteriorPointOptions& options() const { return options_; }

private:
    QpSolution solve_core(const QpProblem& problem) const;
    QpSolution certify(const QpProblem& problem, QpSolution failed) const;

    InteriorPointOptions options_;
};

}  // namespace ccopf::qp
