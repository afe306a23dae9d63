#include "ccopf/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ccopf/error.hpp"
#include "engine.hpp"

namespace ccopf {

UncertaintySet::UncertaintySet(std::size_t dimension)
    : set_(BudgetSet{Vector::Zero(static_cast<Eigen::Index>(dimension)), 0.0}) {}

UncertaintySet::UncertaintySet(BudgetSet budget) : set_(std::move(budget)) {
    const auto& b = std::get<BudgetSet>(set_);
    if (!(b.Gamma >= 0.0) || !std::isfinite(b.Gamma)) throw InputError("budget Gamma must be finite and >= 0");
    for (Eigen::Index k = 0; k < b.gamma.size(); ++k) {
        if (!(b.gamma[k] >= 0.0) || !std::isfinite(b.gamma[k])) {
            throw InputError("budget gamma entries must be finite and >= 0");
        }
    }
}

UncertaintySet::UncertaintySet(EllipsoidSet ellipsoid) : set_(std::move(ellipsoid)) {
    const auto& e = std::get<EllipsoidSet>(set_);
    if (e.A.rows() != e.A.cols()) throw InputError("ellipsoid matrix must be square");
    if (!(e.b >= 0.0) || !std::isfinite(e.b)) throw InputError("ellipsoid radius b must be finite and >= 0");
    if (!e.A.allFinite() || (e.A - e.A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, e.A.cwiseAbs().maxCoeff())) {
        throw InputError("ellipsoid matrix must be symmetric");
    }
    llt_.compute(e.A);
    if (llt_.info() != Eigen::Success) throw InputError("ellipsoid matrix must be positive definite");
}

std::size_t UncertaintySet::dimension() const {
    if (const auto* b = budget()) return static_cast<std::size_t>(b->gamma.size());
    return static_cast<std::size_t>(ellipsoid()->A.rows());
}

double UncertaintySet::maximize(const Vector& c, Vector* argmax) const {
    if (static_cast<std::size_t>(c.size()) != dimension()) throw InputError("objective size does not match set");
    const auto n = c.size();
    if (const auto* b = budget()) {
        // Fractional knapsack: each unit of budget buys |c_k| gamma_k on coordinate k.
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
            return std::abs(c[x]) * b->gamma[x] > std::abs(c[y]) * b->gamma[y];
        });
        double budget_left = b->Gamma, value = 0.0;
        Vector r = Vector::Zero(n);
        for (Eigen::Index k : order) {
            if (budget_left <= 0.0) break;
            const double take = std::min(1.0, budget_left);
            r[k] = (c[k] < 0.0 ? -1.0 : 1.0) * take * b->gamma[k];
            value += take * std::abs(c[k]) * b->gamma[k];
            budget_left -= take;
        }
        if (argmax) *argmax = r;
        return value;
    }
    const auto* e = ellipsoid();
    const Vector ainv_c = llt_.solve(c);
    const double q = std::max(0.0, c.dot(ainv_c));
    if (argmax) *argmax = q > 0.0 ? Vector(std::sqrt(e->b / q) * ainv_c) : Vector(Vector::Zero(n));
    return std::sqrt(e->b * q);
}

double UncertaintySet::coordinate_extent(std::size_t k) const {
    if (const auto* b = budget()) {
        return std::min(1.0, b->Gamma) * b->gamma[static_cast<Eigen::Index>(k)];
    }
    Vector unit = Vector::Zero(static_cast<Eigen::Index>(dimension()));
    unit[static_cast<Eigen::Index>(k)] = 1.0;
    return maximize(unit);
}

void validate_sets(const RobustSets& sets, const GridCase& grid) {
    const std::size_t w = grid.wind_farms().size();
    if (sets.mean.dimension() != w || sets.variance.dimension() != w) {
        throw InputError("uncertainty sets need one coordinate per wind farm (" + std::to_string(w) + ")");
    }
    for (std::size_t k = 0; k < w; ++k) {
        const double s = grid.wind_farms()[k].std_mw;
        if (s * s < sets.variance.coordinate_extent(k) * (1.0 - 1e-12)) {
            throw InputError("variance set allows a negative variance for the wind farm at bus " +
                             std::to_string(grid.external_id(grid.wind_farms()[k].bus)));
        }
    }
}

double mean_margin(const NetworkFactors& factors, std::size_t line, Direction dir, const UncertaintySet& set) {
    const auto& l = factors.grid().lines().at(line);
    const double sign = dir == Direction::FromTo ? 1.0 : -1.0;
    Vector c(static_cast<Eigen::Index>(factors.wind_columns().size()));
    for (std::size_t k = 0; k < factors.wind_columns().size(); ++k) {
        const Vector& pi = factors.wind_column(k);
        c[static_cast<Eigen::Index>(k)] = sign * (pi[l.from] - pi[l.to]);
    }
    return set.maximize(c);
}

WorstVariance worst_case_variance(const NetworkFactors& factors, std::size_t line, const Vector& delta,
                                  const UncertaintySet& set) {
    WorstVariance out;
    const Vector w = line_weights(factors, line, delta);
    out.value = set.maximize(w, &out.v);
    return out;
}

namespace {

Vector base_variances(const GridCase& grid) {
    Vector v(static_cast<Eigen::Index>(grid.wind_farms().size()));
    for (std::size_t k = 0; k < grid.wind_farms().size(); ++k) {
        v[static_cast<Eigen::Index>(k)] = grid.wind_farms()[k].std_mw * grid.wind_farms()[k].std_mw;
    }
    return v;
}

double robust_generator_variance(const GridCase& grid, const UncertaintySet& variance) {
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(grid.wind_farms().size()));
    return grid.total_wind_variance() + variance.maximize(ones);
}

}  // namespace

std::vector<DirectionalSlack> robust_line_margin(const AffineControl& control, const NetworkFactors& factors,
                                                 const RobustSets& sets, const ChanceBound& bound) {
    const GridCase& grid = factors.grid();
    validate_sets(sets, grid);
    const Dispatch d = make_dispatch(control, factors);
    const Vector base = base_variances(grid);
    std::vector<DirectionalSlack> out;
    for (std::size_t e = 0; e < grid.lines().size(); ++e) {
        const auto& l = grid.lines()[e];
        if (!l.limited()) {
            out.push_back({kUnlimited, kUnlimited});
            continue;
        }
        const Vector w = line_weights(factors, e, d.delta);
        const double var = base.dot(w) + sets.variance.maximize(w);
        const double spread = bound.multiplier(l.epsilon) * l.susceptance * std::sqrt(std::max(0.0, var));
        const double flow = d.flow_stats[e].mean_mw;
        const double up = l.susceptance * mean_margin(factors, e, Direction::FromTo, sets.mean);
        const double down = l.susceptance * mean_margin(factors, e, Direction::ToFrom, sets.mean);
        out.push_back({l.flow_limit_mw - (flow + up + spread), l.flow_limit_mw - (-flow + down + spread)});
    }
    return out;
}

std::vector<double> robust_generator_margin(const AffineControl& control, const NetworkFactors& factors,
                                            const RobustSets& sets, const ChanceBound& bound,
                                            GeneratorRule rule) {
    const GridCase& grid = factors.grid();
    validate_sets(sets, grid);
    const double std = std::sqrt(robust_generator_variance(grid, sets.variance));
    std::vector<double> out;
    for (std::size_t i = 0; i < grid.generators().size(); ++i) {
        const auto& g = grid.generators()[i];
        const double p = control.p_bar[static_cast<Eigen::Index>(i)];
        const double a = rule == GeneratorRule::AlphaScaled ? control.alpha[static_cast<Eigen::Index>(i)] : 1.0;
        out.push_back(std::min(g.p_max_mw - p, p - g.p_min_mw) - bound.multiplier(g.epsilon) * a * std);
    }
    return out;
}

Dispatch run_robust_cutting_plane(const NetworkFactors& factors, const RobustSets& sets,
                                  const CuttingPlaneOptions& options) {
    const GridCase& grid = factors.grid();
    validate_sets(sets, grid);

    detail::RiskModel risk;
    risk.base_variance = base_variances(grid);
    risk.generator_variance = robust_generator_variance(grid, sets.variance);
    for (std::size_t e = 0; e < grid.lines().size(); ++e) {
        const double beta = grid.lines()[e].susceptance;
        risk.shift_up.push_back(beta * mean_margin(factors, e, Direction::FromTo, sets.mean));
        risk.shift_down.push_back(beta * mean_margin(factors, e, Direction::ToFrom, sets.mean));
    }
    const UncertaintySet& variance = sets.variance;
    risk.worst_perturbation = [&variance](std::size_t, const Vector& w) {
        Vector v;
        variance.maximize(w, &v);
        return v;
    };

    try {
        return detail::run_engine(factors, options, risk);
    } catch (const InfeasibleError& err) {
        bool nominal_feasible = true;
        try {
            detail::run_engine(factors, options, detail::nominal_risk(factors));
        } catch (const InfeasibleError&) {
            nominal_feasible = false;
        }
        throw InfeasibleError(nominal_feasible
                                  ? "robust problem is infeasible although the nominal problem is feasible"
                                  : "robust problem is infeasible; the nominal problem is infeasible too",
                              err.binding());
    }
}

}  // namespace ccopf
