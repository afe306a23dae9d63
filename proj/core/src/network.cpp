#include "ccopf/network.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseCholesky>

#include "ccopf/error.hpp"

namespace ccopf {

Laplacian build_laplacian(const GridCase& grid) {
    const auto n = static_cast<Eigen::Index>(grid.num_buses());
    std::vector<Eigen::Triplet<double>> triplets;
    Vector diagonal = Vector::Zero(n);
    for (const auto& l : grid.lines()) {
        triplets.emplace_back(l.from, l.to, -l.susceptance);
        triplets.emplace_back(l.to, l.from, -l.susceptance);
        diagonal[l.from] += l.susceptance;
        diagonal[l.to] += l.susceptance;
    }
    // diagonal = -(sum of off-diagonals) so every row sums to zero
    for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, diagonal[i]);
    Laplacian out;
    out.matrix.resize(n, n);
    out.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

struct NetworkFactors::Solver {
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
};

NetworkFactors::NetworkFactors(const GridCase& grid, const Laplacian& laplacian,
                               const FactorOptions& options)
    : grid_(std::make_shared<const GridCase>(grid)),
      n_(grid.num_buses()),
      solver_(std::make_unique<Solver>()),
      options_(options) {
    const auto m = static_cast<Eigen::Index>(n_ - 1);
    reduced_ = laplacian.matrix.topLeftCorner(m, m);
    reduced_.makeCompressed();

    scaling_ = Vector::Ones(m);
    SparseMatrix to_factor = reduced_;
    if (options_.equilibrate) {
        for (Eigen::Index i = 0; i < m; ++i) scaling_[i] = 1.0 / std::sqrt(reduced_.coeff(i, i));
        to_factor = scaling_.asDiagonal() * reduced_ * scaling_.asDiagonal();
    }
    solver_->ldlt.compute(to_factor);
    if (solver_->ldlt.info() != Eigen::Success) {
        throw DisconnectedGridError("reduced Laplacian factorization failed");
    }
    // A connected grid gives a positive-definite reduced matrix; a tiny pivot
    // relative to the largest means a separate component.
    const Vector d = solver_->ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(d.minCoeff() > 1e-13 * dmax)) {
        throw DisconnectedGridError("reduced Laplacian is singular: grid is disconnected");
    }

    for (const auto& w : grid.wind_farms()) {
        Vector e = Vector::Zero(static_cast<Eigen::Index>(n_));
        e[w.bus] = 1.0;
        wind_columns_.push_back(solve_padded(e));
    }
}

NetworkFactors::~NetworkFactors() = default;
NetworkFactors::NetworkFactors(NetworkFactors&&) noexcept = default;
NetworkFactors& NetworkFactors::operator=(NetworkFactors&&) noexcept = default;

Vector NetworkFactors::solve_reduced(const Vector& rhs) const {
    auto apply = [&](const Vector& b) -> Vector {
        Vector scaled = scaling_.cwiseProduct(b);
        Vector y = solver_->ldlt.solve(scaled);
        return scaling_.cwiseProduct(y);
    };
    Vector x = apply(rhs);
    const double bnorm = std::max(rhs.lpNorm<Eigen::Infinity>(), 1e-300);
    for (int k = 0; k < options_.max_refinements; ++k) {
        Vector r = rhs - reduced_ * x;
        if (r.lpNorm<Eigen::Infinity>() <= options_.residual_tolerance * bnorm) break;
        x += apply(r);
    }
    return x;
}

Vector NetworkFactors::solve_padded(const Vector& rhs) const {
    const auto m = static_cast<Eigen::Index>(n_ - 1);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(n_));
    out.head(m) = solve_reduced(rhs.head(m));
    return out;
}

NetworkFactors factor(const GridCase& grid, const FactorOptions& options) {
    return NetworkFactors(grid, build_laplacian(grid), options);
}

Vector solve_mean_angles(const NetworkFactors& factors, const Vector& injection,
                         double balance_tolerance) {
    if (static_cast<std::size_t>(injection.size()) != factors.num_buses()) {
        throw InputError("injection vector has wrong length");
    }
    if (balance_tolerance < 0.0) {
        double scale = 0.0;
        for (const auto& b : factors.grid().buses()) scale += std::abs(b.load_mw);
        if (scale == 0.0) scale = std::max(1.0, injection.cwiseAbs().sum());
        balance_tolerance = 1e-8 * scale;
    }
    if (std::abs(injection.sum()) > balance_tolerance) {
        throw InputError("unbalanced injection: net " + std::to_string(injection.sum()) + " MW");
    }
    return factors.solve_padded(injection);
}

Vector delta_from_alpha(const NetworkFactors& factors, const Vector& alpha_per_bus) {
    if (static_cast<std::size_t>(alpha_per_bus.size()) != factors.num_buses()) {
        throw InputError("alpha vector has wrong length");
    }
    if (alpha_per_bus[factors.slack()] != 0.0) {
        throw InputError("alpha must be zero on the reference bus");
    }
    if (std::abs(alpha_per_bus.sum() - 1.0) > 1e-8 || alpha_per_bus.minCoeff() < -1e-9) {
        throw InputError("alpha must be non-negative and sum to one");
    }
    return factors.solve_padded(alpha_per_bus);
}

Vector line_flows(const GridCase& grid, const Vector& theta) {
    Vector f(static_cast<Eigen::Index>(grid.lines().size()));
    for (std::size_t e = 0; e < grid.lines().size(); ++e) {
        const auto& l = grid.lines()[e];
        f[static_cast<Eigen::Index>(e)] = l.susceptance * (theta[l.from] - theta[l.to]);
    }
    return f;
}

}  // namespace ccopf
