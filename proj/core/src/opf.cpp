#include "ccopf/opf.hpp"

#include <algorithm>
#include <cmath>

#include "ccopf/error.hpp"
#include "ccopf/normal.hpp"
#include "detail.hpp"

namespace ccopf {

namespace detail {

double exceedance(double mean, double std, double limit) {
    if (std > 0.0) return normal_survival((limit - mean) / std);
    const double tol = 1e-9 * std::max(1.0, std::abs(limit));
    return mean > limit + tol ? 1.0 : 0.0;
}

}  // namespace detail

Vector per_bus(const GridCase& grid, const Vector& per_generator) {
    Vector out = Vector::Zero(static_cast<Eigen::Index>(grid.num_buses()));
    for (std::size_t g = 0; g < grid.generators().size(); ++g) {
        out[grid.generators()[g].bus] += per_generator[static_cast<Eigen::Index>(g)];
    }
    return out;
}

double ChanceBound::multiplier(double epsilon) const {
    const double e = eta(epsilon);
    if (kind == ChanceBoundKind::TwoSidedSplit) return e;
    if (!(omega >= e)) {
        throw InputError("conservative coefficient " + std::to_string(omega) +
                         " is below eta(" + std::to_string(epsilon) + ") = " + std::to_string(e));
    }
    return omega;
}

double ChanceBound::effective_epsilon(double epsilon) const {
    return kind == ChanceBoundKind::TwoSidedSplit ? epsilon : normal_survival(multiplier(epsilon));
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::Optimal: return "optimal";
        case Termination::ConicFeasible: return "conic_feasible";
        case Termination::ChanceFeasible: return "chance_feasible";
        case Termination::IterationCap: return "iteration_cap";
        case Termination::MasterInfeasible: return "master_infeasible";
    }
    return "unknown";
}

double check_viability(const AffineControl& control, const GridCase& grid) {
    return control.p_bar.sum() + grid.total_wind_mean() - grid.total_load();
}

bool is_viable(const AffineControl& control, const GridCase& grid) {
    double scale = 0.0;
    for (const auto& b : grid.buses()) scale += std::abs(b.load_mw);
    return std::abs(check_viability(control, grid)) <= 1e-8 * std::max(scale, 1.0);
}

namespace {

void check_sizes(const AffineControl& control, const GridCase& grid) {
    const auto g = static_cast<Eigen::Index>(grid.generators().size());
    if (control.p_bar.size() != g || control.alpha.size() != g) {
        throw InputError("control has " + std::to_string(control.p_bar.size()) +
                         " entries but the case has " + std::to_string(g) + " generators");
    }
}

Vector mean_injection(const AffineControl& control, const GridCase& grid) {
    Vector inj = per_bus(grid, control.p_bar);
    for (std::size_t i = 0; i < grid.num_buses(); ++i) inj[static_cast<Eigen::Index>(i)] -= grid.buses()[i].load_mw;
    for (const auto& w : grid.wind_farms()) inj[w.bus] += w.mean_mw;
    return inj;
}

Vector mean_angles(const AffineControl& control, const NetworkFactors& factors) {
    const GridCase& grid = factors.grid();
    if (!is_viable(control, grid)) {
        throw InputError("control is not viable: generation minus net demand is " +
                         std::to_string(check_viability(control, grid)) + " MW");
    }
    // The slack row is dropped, so it absorbs any residual within tolerance.
    return factors.solve_padded(mean_injection(control, grid));
}

}  // namespace

std::vector<FlowStat> flow_statistics(const AffineControl& control, const NetworkFactors& factors) {
    const GridCase& grid = factors.grid();
    check_sizes(control, grid);
    const Vector theta = mean_angles(control, factors);
    const Vector delta = delta_from_alpha(factors, per_bus(grid, control.alpha));
    std::vector<FlowStat> out;
    out.reserve(grid.lines().size());
    for (const auto& l : grid.lines()) {
        double var = 0.0;
        for (std::size_t k = 0; k < grid.wind_farms().size(); ++k) {
            const Vector& pi = factors.wind_column(k);
            const double s = grid.wind_farms()[k].std_mw;
            const double c = pi[l.from] - pi[l.to] - delta[l.from] + delta[l.to];
            var += s * s * c * c;
        }
        out.push_back({l.susceptance * (theta[l.from] - theta[l.to]), l.susceptance * std::sqrt(var)});
    }
    return out;
}

std::vector<GenStat> generator_statistics(const AffineControl& control, const GridCase& grid) {
    check_sizes(control, grid);
    const double total_std = std::sqrt(grid.total_wind_variance());
    std::vector<GenStat> out;
    for (Eigen::Index g = 0; g < control.p_bar.size(); ++g) {
        out.push_back({control.p_bar[g], control.alpha[g] * total_std});
    }
    return out;
}

double expected_cost(const AffineControl& control, const GridCase& grid) {
    check_sizes(control, grid);
    const double var = grid.total_wind_variance();
    double cost = 0.0;
    for (std::size_t i = 0; i < grid.generators().size(); ++i) {
        const auto& g = grid.generators()[i];
        const double p = control.p_bar[static_cast<Eigen::Index>(i)];
        const double a = control.alpha[static_cast<Eigen::Index>(i)];
        cost += g.cost_quadratic * (p * p + var * a * a) + g.cost_linear * p + g.cost_constant;
    }
    return cost;
}

ChanceMargins chance_margins(const AffineControl& control, const NetworkFactors& factors,
                             const ChanceBound& bound, GeneratorRule rule) {
    const GridCase& grid = factors.grid();
    const auto stats = flow_statistics(control, factors);
    ChanceMargins out;
    for (std::size_t e = 0; e < grid.lines().size(); ++e) {
        const auto& l = grid.lines()[e];
        if (!l.limited()) {
            out.line.push_back(kUnlimited);
            continue;
        }
        out.line.push_back(l.flow_limit_mw - std::abs(stats[e].mean_mw) -
                           bound.multiplier(l.epsilon) * stats[e].std_mw);
    }
    const double total_std = std::sqrt(grid.total_wind_variance());
    for (std::size_t i = 0; i < grid.generators().size(); ++i) {
        const auto& g = grid.generators()[i];
        const double p = control.p_bar[static_cast<Eigen::Index>(i)];
        const double a = rule == GeneratorRule::AlphaScaled ? control.alpha[static_cast<Eigen::Index>(i)] : 1.0;
        out.generator.push_back(std::min(g.p_max_mw - p, p - g.p_min_mw) -
                                bound.multiplier(g.epsilon) * a * total_std);
    }
    return out;
}

Dispatch make_dispatch(const AffineControl& control, const NetworkFactors& factors) {
    const GridCase& grid = factors.grid();
    check_sizes(control, grid);
    Dispatch d;
    d.control = control;
    d.theta_bar = mean_angles(control, factors);
    d.delta = delta_from_alpha(factors, per_bus(grid, control.alpha));
    d.flow_stats = flow_statistics(control, factors);
    d.gen_stats = generator_statistics(control, grid);
    d.objective = expected_cost(control, grid);
    return d;
}

Dispatch solve_standard_opf(const NetworkFactors& factors, const StandardOpfOptions& options) {
    const GridCase& grid = factors.grid();
    const auto ng = static_cast<Eigen::Index>(grid.generators().size());
    const auto m = static_cast<Eigen::Index>(grid.num_buses() - 1);
    const int slack = grid.slack();
    if (ng == 0) throw InputError("case has no generators");

    qp::QpBuilder b;
    const Eigen::Index p0 = b.add_variables(ng);
    const Eigen::Index t0 = b.add_variables(m);
    constexpr double kPhysics = 100.0;

    for (Eigen::Index g = 0; g < ng; ++g) {
        const auto& gen = grid.generators()[static_cast<std::size_t>(g)];
        b.add_square(p0 + g, gen.cost_quadratic);
        b.add_linear(p0 + g, gen.cost_linear);
        b.add_constant(gen.cost_constant);
        b.add_lower_bound(p0 + g, gen.p_min_mw, "generator_limit");
        b.add_upper_bound(p0 + g, gen.p_max_mw, "generator_limit");
    }

    auto rows = detail::reduced_rows(factors.reduced(), t0);
    Vector net = Vector::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) net[i] = -grid.buses()[static_cast<std::size_t>(i)].load_mw;
    for (const auto& w : grid.wind_farms()) net[w.bus] += w.mean_mw;
    for (Eigen::Index g = 0; g < ng; ++g) {
        rows[static_cast<std::size_t>(grid.generators()[static_cast<std::size_t>(g)].bus)].emplace_back(p0 + g, -1.0);
    }
    for (Eigen::Index i = 0; i < m; ++i) b.add_equality(rows[static_cast<std::size_t>(i)], net[i], "power_balance", kPhysics);

    qp::RowEntries total;
    for (Eigen::Index g = 0; g < ng; ++g) total.emplace_back(p0 + g, 1.0);
    b.add_equality(total, grid.total_load() - grid.total_wind_mean(), "power_balance", kPhysics);

    for (const auto& l : grid.lines()) {
        if (!l.limited()) continue;
        b.add_less_equal(detail::angle_difference(l, slack, t0, 1.0), l.flow_limit_mw, "line_limit");
        b.add_less_equal(detail::angle_difference(l, slack, t0, -1.0), l.flow_limit_mw, "line_limit");
    }

    const qp::InteriorPointQp fallback;
    const qp::QpBackend& backend = options.backend ? *options.backend : fallback;
    const auto sol = backend.solve(b.build());
    if (sol.status == qp::QpStatus::Infeasible) {
        throw InfeasibleError("standard OPF is infeasible", sol.infeasible_tags);
    }
    if (sol.status != qp::QpStatus::Optimal) throw NumericalError("standard OPF: QP solver failed");

    AffineControl control;
    control.p_bar = sol.x.segment(p0, ng);
    control.alpha = Vector::Zero(ng);
    if (options.alpha_rule == StandardAlphaRule::HeadroomUniform) {
        for (Eigen::Index g = 0; g < ng; ++g) {
            const auto& gen = grid.generators()[static_cast<std::size_t>(g)];
            const double tol = 1e-6 * std::max(1.0, gen.p_max_mw);
            const double p = control.p_bar[g];
            if (p > gen.p_min_mw + tol && p < gen.p_max_mw - tol) control.alpha[g] = 1.0;
        }
    }
    if (control.alpha.sum() == 0.0) control.alpha.setOnes();
    control.alpha /= control.alpha.sum();

    Dispatch d = make_dispatch(control, factors);
    d.report.iterations = 1;
    d.report.termination = Termination::Optimal;
    d.report.trace.push_back({sol.objective, 0.0, 0.0, 0});
    return d;
}

}  // namespace ccopf
