#include "ccopf/cutting_plane.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ccopf/error.hpp"
#include "detail.hpp"
#include "engine.hpp"

namespace ccopf {

namespace {

Vector farm_variances(const GridCase& grid) {
    Vector v(static_cast<Eigen::Index>(grid.wind_farms().size()));
    for (std::size_t k = 0; k < grid.wind_farms().size(); ++k) {
        const double s = grid.wind_farms()[k].std_mw;
        v[static_cast<Eigen::Index>(k)] = s * s;
    }
    return v;
}

/// Sum_k var_k * (pi_ik - pi_jk - delta_i + delta_j) and the matching C.
std::pair<double, double> weighted_terms(const NetworkFactors& factors, std::size_t line,
                                         const Vector& delta, const Vector& variances) {
    const auto& l = factors.grid().lines().at(line);
    double lin = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < factors.wind_columns().size(); ++k) {
        const Vector& pi = factors.wind_column(k);
        const double c = pi[l.from] - pi[l.to] - delta[l.from] + delta[l.to];
        lin += variances[static_cast<Eigen::Index>(k)] * c;
        sq += variances[static_cast<Eigen::Index>(k)] * c * c;
    }
    return {lin, std::sqrt(sq)};
}

}  // namespace

Vector line_weights(const NetworkFactors& factors, std::size_t line, const Vector& delta) {
    const auto& l = factors.grid().lines().at(line);
    Vector w(static_cast<Eigen::Index>(factors.wind_columns().size()));
    for (std::size_t k = 0; k < factors.wind_columns().size(); ++k) {
        const Vector& pi = factors.wind_column(k);
        const double c = pi[l.from] - pi[l.to] - delta[l.from] + delta[l.to];
        w[static_cast<Eigen::Index>(k)] = c * c;
    }
    return w;
}

double c_value(const NetworkFactors& factors, std::size_t line, const Vector& delta) {
    return c_value(factors, line, delta, farm_variances(factors.grid()));
}

double c_value(const NetworkFactors& factors, std::size_t line, const Vector& delta, const Vector& variances) {
    return weighted_terms(factors, line, delta, variances).second;
}

CGradient c_gradient(const NetworkFactors& factors, std::size_t line, const Vector& delta) {
    return c_gradient(factors, line, delta, farm_variances(factors.grid()));
}

CGradient c_gradient(const NetworkFactors& factors, std::size_t line, const Vector& delta,
                     const Vector& variances) {
    const auto [lin, c] = weighted_terms(factors, line, delta, variances);
    if (!(c > 1e-12)) throw std::domain_error("C is not differentiable where it vanishes");
    return {-lin / c, lin / c};
}

double Cut::evaluate(const Vector& delta) const {
    return value + gradient.d_from * (delta[from] - delta_hat[from]) +
           gradient.d_to * (delta[to] - delta_hat[to]);
}

Cut make_cut(const NetworkFactors& factors, std::size_t line, const Vector& delta_hat) {
    return make_cut(factors, line, delta_hat, farm_variances(factors.grid()));
}

Cut make_cut(const NetworkFactors& factors, std::size_t line, const Vector& delta_hat,
             const Vector& variances) {
    const auto& l = factors.grid().lines().at(line);
    Cut cut;
    cut.line = line;
    cut.from = l.from;
    cut.to = l.to;
    cut.delta_hat = delta_hat;
    cut.variances = variances;
    cut.value = c_value(factors, line, delta_hat, variances);
    cut.gradient = c_gradient(factors, line, delta_hat, variances);
    return cut;
}

namespace detail {

RiskModel nominal_risk(const NetworkFactors& factors) {
    const GridCase& grid = factors.grid();
    RiskModel r;
    r.shift_up.assign(grid.lines().size(), 0.0);
    r.shift_down.assign(grid.lines().size(), 0.0);
    r.base_variance = farm_variances(grid);
    r.generator_variance = grid.total_wind_variance();
    return r;
}

namespace {

struct Layout {
    Eigen::Index p0 = 0, a0 = 0, t0 = 0, d0 = 0;
    std::vector<Eigen::Index> s;  // per line, -1 when unlimited
};

constexpr double kPhysics = 100.0;

Layout build_master(const NetworkFactors& factors, const CuttingPlaneOptions& options,
                    const RiskModel& risk, qp::QpBuilder& b) {
    const GridCase& grid = factors.grid();
    const auto ng = static_cast<Eigen::Index>(grid.generators().size());
    const auto m = static_cast<Eigen::Index>(grid.num_buses() - 1);
    const int slack = grid.slack();
    const double nominal_var = grid.total_wind_variance();

    Layout lay;
    lay.p0 = b.add_variables(ng);
    lay.a0 = b.add_variables(ng);
    lay.t0 = b.add_variables(m);
    lay.d0 = b.add_variables(m);

    // Expected cost: c1 (p^2 + var * alpha^2) + c2 p + c3.
    for (Eigen::Index g = 0; g < ng; ++g) {
        const auto& gen = grid.generators()[static_cast<std::size_t>(g)];
        b.add_square(lay.p0 + g, gen.cost_quadratic);
        b.add_square(lay.a0 + g, gen.cost_quadratic * nominal_var);
        b.add_linear(lay.p0 + g, gen.cost_linear);
        b.add_constant(gen.cost_constant);
    }

    auto theta_rows = reduced_rows(factors.reduced(), lay.t0);
    auto delta_rows = reduced_rows(factors.reduced(), lay.d0);
    Vector net = Vector::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) net[i] = -grid.buses()[static_cast<std::size_t>(i)].load_mw;
    for (const auto& w : grid.wind_farms()) net[w.bus] += w.mean_mw;
    for (Eigen::Index g = 0; g < ng; ++g) {
        const auto bus = static_cast<std::size_t>(grid.generators()[static_cast<std::size_t>(g)].bus);
        theta_rows[bus].emplace_back(lay.p0 + g, -1.0);
        delta_rows[bus].emplace_back(lay.a0 + g, -1.0);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        b.add_equality(theta_rows[static_cast<std::size_t>(i)], net[i], "power_balance", kPhysics);
        b.add_equality(delta_rows[static_cast<std::size_t>(i)], 0.0, "participation", kPhysics);
    }
    qp::RowEntries sum_p, sum_a;
    for (Eigen::Index g = 0; g < ng; ++g) {
        sum_p.emplace_back(lay.p0 + g, 1.0);
        sum_a.emplace_back(lay.a0 + g, 1.0);
    }
    b.add_equality(sum_p, grid.total_load() - grid.total_wind_mean(), "power_balance", kPhysics);
    b.add_equality(sum_a, 1.0, "participation", kPhysics);

    const double gen_std = std::sqrt(risk.generator_variance);
    for (Eigen::Index g = 0; g < ng; ++g) {
        const auto& gen = grid.generators()[static_cast<std::size_t>(g)];
        b.add_lower_bound(lay.a0 + g, 0.0, "participation", kPhysics);
        b.add_lower_bound(lay.p0 + g, gen.p_min_mw, "generator_limit");
        b.add_upper_bound(lay.p0 + g, gen.p_max_mw, "generator_limit");
        const double k = options.bound.multiplier(gen.epsilon) * gen_std;
        if (k == 0.0) continue;
        if (options.gen_rule == GeneratorRule::AlphaScaled) {
            b.add_less_equal({{lay.p0 + g, 1.0}, {lay.a0 + g, k}}, gen.p_max_mw, "generator_chance");
            b.add_greater_equal({{lay.p0 + g, 1.0}, {lay.a0 + g, -k}}, gen.p_min_mw, "generator_chance");
        } else {
            b.add_upper_bound(lay.p0 + g, gen.p_max_mw - k, "generator_chance");
            b.add_lower_bound(lay.p0 + g, gen.p_min_mw + k, "generator_chance");
        }
    }

    lay.s.assign(grid.lines().size(), -1);
    for (std::size_t e = 0; e < grid.lines().size(); ++e) {
        const auto& l = grid.lines()[e];
        if (!l.limited()) continue;
        const Eigen::Index s = b.add_variable();
        lay.s[e] = s;
        b.add_lower_bound(s, 0.0, "line_chance");
        const double coef = l.susceptance * options.bound.multiplier(l.epsilon);
        auto up = angle_difference(l, slack, lay.t0, 1.0);
        up.emplace_back(s, coef);
        b.add_less_equal(up, l.flow_limit_mw - risk.shift_up[e], "line_limit");
        auto down = angle_difference(l, slack, lay.t0, -1.0);
        down.emplace_back(s, coef);
        b.add_less_equal(down, l.flow_limit_mw - risk.shift_down[e], "line_limit");
    }
    return lay;
}

void add_cut(const Cut& cut, const Layout& lay, int slack, qp::QpBuilder& b) {
    qp::RowEntries row;
    double rhs = -cut.value;
    if (cut.from != slack) {
        row.emplace_back(lay.d0 + cut.from, cut.gradient.d_from);
        rhs += cut.gradient.d_from * cut.delta_hat[cut.from];
    }
    if (cut.to != slack) {
        row.emplace_back(lay.d0 + cut.to, cut.gradient.d_to);
        rhs += cut.gradient.d_to * cut.delta_hat[cut.to];
    }
    row.emplace_back(lay.s[cut.line], -1.0);
    b.add_less_equal(row, rhs, "line_chance");
}

AffineControl extract_control(const Vector& x, const Layout& lay, Eigen::Index ng) {
    AffineControl c;
    c.p_bar = x.segment(lay.p0, ng);
    c.alpha = x.segment(lay.a0, ng).cwiseMax(0.0);
    c.alpha /= c.alpha.sum();
    return c;
}

struct LineCheck {
    std::size_t line = 0;
    double conic = 0.0;   // C*(delta) - s implied by the mean angles
    double chance = 0.0;  // worst per-side probability minus target
    Vector variances;
};

}  // namespace

Dispatch run_engine(const NetworkFactors& factors, const CuttingPlaneOptions& options,
                    const RiskModel& risk) {
    const GridCase& grid = factors.grid();
    const auto ng = static_cast<Eigen::Index>(grid.generators().size());
    if (ng == 0) throw InputError("case has no generators");
    if (options.max_iter < 1) throw InputError("max_iter must be at least 1");
    if (options.cuts_per_iter < 1) throw InputError("cuts_per_iter must be at least 1");

    qp::QpBuilder b;
    const Layout lay = build_master(factors, options, risk, b);
    const qp::InteriorPointQp fallback;
    const qp::QpBackend& backend = options.backend ? *options.backend : fallback;
    const double gen_std = std::sqrt(risk.generator_variance);

    SolveReport report;
    AffineControl control;
    for (int iter = 1;; ++iter) {
        const auto sol = backend.solve(b.build());
        if (sol.status == qp::QpStatus::Infeasible) {
            throw InfeasibleError("master problem is infeasible", sol.infeasible_tags);
        }
        if (sol.status != qp::QpStatus::Optimal) {
            throw NumericalError("master problem: QP solver failed at iteration " + std::to_string(iter));
        }
        control = extract_control(sol.x, lay, ng);

        // Re-derive angles from (p_bar, alpha) alone; the master's own theta,
        // delta and s are not trusted for the checks below.
        Vector inj = per_bus(grid, control.p_bar);
        for (std::size_t i = 0; i < grid.num_buses(); ++i) inj[static_cast<Eigen::Index>(i)] -= grid.buses()[i].load_mw;
        for (const auto& w : grid.wind_farms()) inj[w.bus] += w.mean_mw;
        const Vector theta = factors.solve_padded(inj);
        const Vector delta = delta_from_alpha(factors, per_bus(grid, control.alpha));

        std::vector<LineCheck> checks;
        double max_conic = 0.0, max_chance = 0.0;
        for (std::size_t e = 0; e < grid.lines().size(); ++e) {
            const auto& l = grid.lines()[e];
            if (!l.limited()) continue;
            const Vector w = line_weights(factors, e, delta);
            Vector var = risk.base_variance;
            if (risk.worst_perturbation) var += risk.worst_perturbation(e, w);
            const double c = std::sqrt(std::max(0.0, var.dot(w)));
            const double mult = options.bound.multiplier(l.epsilon);
            const double flow = l.susceptance * (theta[l.from] - theta[l.to]);
            const double room = std::min(l.flow_limit_mw - flow - risk.shift_up[e],
                                         l.flow_limit_mw + flow - risk.shift_down[e]);
            const double s_implied = room / (l.susceptance * mult);
            const double std = l.susceptance * c;
            const double target = options.bound.effective_epsilon(l.epsilon);
            const double p = std::max(detail::exceedance(flow + risk.shift_up[e], std, l.flow_limit_mw),
                                      detail::exceedance(-flow + risk.shift_down[e], std, l.flow_limit_mw));
            LineCheck chk{e, c - s_implied, p - target, var};
            max_conic = std::max(max_conic, chk.conic);
            max_chance = std::max(max_chance, chk.chance);
            checks.push_back(std::move(chk));
        }
        for (Eigen::Index g = 0; g < ng; ++g) {
            const auto& gen = grid.generators()[static_cast<std::size_t>(g)];
            const double std = control.alpha[g] * gen_std;
            const double p = std::max(detail::exceedance(control.p_bar[g], std, gen.p_max_mw),
                                      detail::exceedance(-control.p_bar[g], std, -gen.p_min_mw));
            max_chance = std::max(max_chance, p - options.bound.effective_epsilon(gen.epsilon));
        }

        IterationRecord rec{sol.objective, max_conic, max_chance, 0};
        const bool conic_ok = max_conic <= options.viol_tol;
        const bool chance_ok = max_chance <= options.viol_tol;
        const bool stop = options.stop_rule == StopRule::Both ? (conic_ok && chance_ok) : (conic_ok || chance_ok);

        // Most violated first; ties go to the lowest line id.
        std::vector<const LineCheck*> violated;
        for (const auto& chk : checks) {
            if (chk.conic > options.viol_tol || (!chance_ok && chk.chance > options.viol_tol && chk.conic > 0.0)) {
                violated.push_back(&chk);
            }
        }
        std::stable_sort(violated.begin(), violated.end(),
                         [](const LineCheck* a, const LineCheck* b) { return a->conic > b->conic; });

        report.iterations = iter;
        report.max_conic_violation = max_conic;
        report.max_chance_violation = max_chance;
        if (stop || violated.empty()) {
            report.trace.push_back(rec);
            report.termination = conic_ok ? Termination::ConicFeasible
                                 : chance_ok ? Termination::ChanceFeasible
                                             : Termination::IterationCap;
            break;
        }
        if (iter >= options.max_iter) {
            report.trace.push_back(rec);
            report.termination = Termination::IterationCap;
            break;
        }
        const auto count = std::min(violated.size(), static_cast<std::size_t>(options.cuts_per_iter));
        for (std::size_t i = 0; i < count; ++i) {
            const LineCheck& chk = *violated[i];
            Cut cut;
            try {
                cut = make_cut(factors, chk.line, delta, chk.variances);
            } catch (const std::domain_error&) {
                continue;  // C vanishes: nothing to linearize
            }
            add_cut(cut, lay, grid.slack(), b);
            ++rec.cuts_added;
        }
        report.total_cuts += rec.cuts_added;
        report.trace.push_back(rec);
        if (rec.cuts_added == 0) {
            report.termination = Termination::IterationCap;
            break;
        }
    }

    Dispatch d = make_dispatch(control, factors);
    d.report = std::move(report);
    return d;
}

}  // namespace detail

Dispatch run_cutting_plane(const NetworkFactors& factors, const CuttingPlaneOptions& options) {
    return detail::run_engine(factors, options, detail::nominal_risk(factors));
}

}  // namespace ccopf
