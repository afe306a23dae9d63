#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "ccopf/config.hpp"
#include "ccopf/error.hpp"
#include "ccopf/normal.hpp"
#include "ccopf/robust.hpp"
#include "ccopf/validate.hpp"

namespace ccopf::cli {

namespace {

using nlohmann::json;

struct Loaded {
    Config config;
    GridCase grid;
};

Loaded load(const RunConfig& rc) {
    if (rc.case_path.empty()) throw InputError("--case is required");
    if (rc.config_path.empty()) throw InputError("--config is required");
    if (rc.out_path.empty()) throw InputError("--out is required");
    if (!std::filesystem::exists(rc.case_path)) throw InputError("case file not found: " + rc.case_path);
    if (!std::filesystem::exists(rc.config_path)) throw InputError("config file not found: " + rc.config_path);
    Config cfg = load_config(rc.config_path);
    ParseOptions po;
    po.merge_parallel = cfg.merge_parallel;
    GridCase base = load_matpower(rc.case_path, po);
    GridCase grid = attach_wind(base, cfg.wind);
    return {std::move(cfg), std::move(grid)};
}

void check_mode(const std::string& mode) {
    if (mode != "standard" && mode != "ccopf" && mode != "robust") {
        throw InputError("--mode must be standard, ccopf or robust");
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string line_name(const GridCase& grid, const Line& l) {
    return std::to_string(grid.external_id(l.from)) + "-" + std::to_string(grid.external_id(l.to));
}

Dispatch solve(const NetworkFactors& factors, const Config& cfg, const std::string& mode) {
    if (mode == "standard") {
        StandardOpfOptions o;
        o.alpha_rule = cfg.standard_alpha;
        return solve_standard_opf(factors, o);
    }
    if (mode == "ccopf") return run_cutting_plane(factors, cfg.cutting_plane_options());
    if (!cfg.robust) throw InputError("mode robust needs a 'robust' section in the config");
    const RobustSets sets = make_sets(*cfg.robust, factors.grid().wind_farms().size());
    return run_robust_cutting_plane(factors, sets, cfg.cutting_plane_options());
}

json dispatch_report(const Dispatch& d, const NetworkFactors& factors, const Config& cfg, const std::string& mode) {
    const GridCase& grid = factors.grid();
    const ChanceBound bound = cfg.chance_bound();
    json j;
    j["schema"] = 1;
    j["mode"] = mode;
    j["case"] = grid.name();
    j["status"] = "solved";
    j["termination"] = to_string(d.report.termination);
    j["iterations"] = d.report.iterations;
    j["objective"] = format_number(d.objective);
    j["penetration"] = format_number(grid.total_load() > 0.0 ? penetration(grid) : 0.0);
    j["max_conic_violation"] = format_number(d.report.max_conic_violation);
    j["max_chance_violation"] = format_number(d.report.max_chance_violation);
    j["viability_residual"] = format_number(check_viability(d.control, grid));

    json gens = json::array();
    const auto gen_margin = chance_margins(d.control, factors, bound, cfg.gen_rule).generator;
    for (std::size_t g = 0; g < grid.generators().size(); ++g) {
        const auto& gen = grid.generators()[g];
        const auto i = static_cast<Eigen::Index>(g);
        gens.push_back({{"bus", grid.external_id(gen.bus)},
                        {"p_bar", format_number(d.control.p_bar[i])},
                        {"alpha", format_number(d.control.alpha[i])},
                        {"std_mw", format_number(d.gen_stats[g].std_mw)},
                        {"p_min", format_number(gen.p_min_mw)},
                        {"p_max", format_number(gen.p_max_mw)},
                        {"epsilon", format_number(gen.epsilon)},
                        {"chance_margin", format_number(gen_margin[g])}});
    }
    j["generators"] = gens;

    json lines = json::array();
    const auto prob = analytic_overload(d.control, factors);
    for (std::size_t e = 0; e < grid.lines().size(); ++e) {
        const auto& l = grid.lines()[e];
        lines.push_back({{"id", e},
                         {"from", grid.external_id(l.from)},
                         {"to", grid.external_id(l.to)},
                         {"limit_mw", format_number(l.flow_limit_mw)},
                         {"epsilon", format_number(l.epsilon)},
                         {"mean_mw", format_number(d.flow_stats[e].mean_mw)},
                         {"std_mw", format_number(d.flow_stats[e].std_mw)},
                         {"p_up", format_number(prob[e].up)},
                         {"p_down", format_number(prob[e].down)},
                         {"p_joint", format_number(prob[e].joint)}});
    }
    j["lines"] = lines;

    json trace = json::array();
    for (const auto& r : d.report.trace) {
        trace.push_back({{"lower_bound", format_number(r.lower_bound)},
                         {"conic_violation", format_number(r.conic_violation)},
                         {"chance_violation", format_number(r.chance_violation)},
                         {"cuts_added", r.cuts_added}});
    }
    j["trace"] = trace;

    if (mode == "robust") {
        const RobustSets sets = make_sets(*cfg.robust, grid.wind_farms().size());
        const auto margins = robust_line_margin(d.control, factors, sets, bound);
        double worst = kUnlimited;
        for (const auto& m : margins) worst = std::min({worst, m.from_to, m.to_from});
        j["min_robust_line_margin"] = format_number(worst);
    }
    return j;
}

AffineControl read_control(const std::string& path, const GridCase& grid) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dispatch report " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("dispatch report is not valid JSON: " + std::string(e.what()));
    }
    try {
        const auto& gens = j.at("generators");
        const auto n = grid.generators().size();
        if (gens.size() != n) throw InputError("dispatch report does not match the case's generator count");
        AffineControl c{Vector(static_cast<Eigen::Index>(n)), Vector(static_cast<Eigen::Index>(n))};
        for (std::size_t g = 0; g < n; ++g) {
            if (gens[g].at("bus").get<int>() != grid.external_id(grid.generators()[g].bus)) {
                throw InputError("dispatch report generator order does not match the case");
            }
            c.p_bar[static_cast<Eigen::Index>(g)] = std::stod(gens[g].at("p_bar").get<std::string>());
            c.alpha[static_cast<Eigen::Index>(g)] = std::stod(gens[g].at("alpha").get<std::string>());
        }
        return c;
    } catch (const json::exception& e) {
        throw InputError("malformed dispatch report: " + std::string(e.what()));
    } catch (const std::logic_error& e) {
        throw InputError("malformed number in dispatch report: " + std::string(e.what()));
    }
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericalError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kIterationCap;
    }
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

int cmd_solve(const RunConfig& rc) {
    return guarded([&]() -> int {
        check_mode(rc.mode);
        const Loaded in = load(rc);
        const NetworkFactors factors = factor(in.grid);
        try {
            const Dispatch d = solve(factors, in.config, rc.mode);
            write_json(rc.out_path, dispatch_report(d, factors, in.config, rc.mode));
            std::cout << rc.mode << ": " << to_string(d.report.termination) << ", objective "
                      << format_number(d.objective) << ", " << d.report.iterations << " iteration(s)\n";
            return d.report.termination == Termination::IterationCap ? kIterationCap : kOk;
        } catch (const InfeasibleError& e) {
            json j;
            j["schema"] = 1;
            j["mode"] = rc.mode;
            j["case"] = in.grid.name();
            j["status"] = "infeasible";
            j["message"] = e.what();
            j["binding"] = e.binding();
            j["penetration"] = format_number(in.grid.total_load() > 0.0 ? penetration(in.grid) : 0.0);
            write_json(rc.out_path, j);
            std::cerr << "infeasible: " << e.what();
            for (const auto& b : e.binding()) std::cerr << " [" << b << "]";
            std::cerr << "\n";
            return kInfeasible;
        }
    });
}

int cmd_validate(const RunConfig& rc) {
    return guarded([&]() -> int {
        check_mode(rc.mode);
        const Loaded in = load(rc);
        const NetworkFactors factors = factor(in.grid);
        AffineControl control;
        if (!rc.dispatch_path.empty()) {
            control = read_control(rc.dispatch_path, in.grid);
        } else {
            try {
                control = solve(factors, in.config, rc.mode).control;
            } catch (const InfeasibleError& e) {
                std::cerr << "infeasible: " << e.what() << "\n";
                return kInfeasible;
            }
        }

        SimulationOptions so;
        so.samples = rc.samples.value_or(in.config.validation.samples);
        so.seed = rc.seed.value_or(in.config.validation.seed);
        so.distribution = WindDistribution::parse(rc.distribution.empty() ? in.config.validation.distribution
                                                                          : rc.distribution);
        if (so.samples == 0) throw InputError("sample count must be positive");
        const ValidationReport rep = monte_carlo(control, factors, so);
        const auto prob = analytic_overload(control, factors);
        const ChanceBound bound = in.config.chance_bound();

        json j;
        j["schema"] = 1;
        j["case"] = in.grid.name();
        j["samples"] = rep.samples;
        j["seed"] = rep.seed;
        j["distribution"] = rep.distribution;
        json lines = json::array();
        json risky = json::array();
        std::ostringstream csv;
        csv << "line,from,to,epsilon,analytic_up,analytic_down,empirical_up,empirical_down,se_up,se_down\n";
        for (std::size_t e = 0; e < in.grid.lines().size(); ++e) {
            const auto& l = in.grid.lines()[e];
            const auto& r = rep.lines[e];
            const double target = bound.effective_epsilon(l.epsilon);
            const bool flagged = l.limited() && (r.p_up > target + 3.0 * r.se_up || r.p_down > target + 3.0 * r.se_down);
            lines.push_back({{"id", e},
                             {"from", in.grid.external_id(l.from)},
                             {"to", in.grid.external_id(l.to)},
                             {"epsilon", format_number(target)},
                             {"analytic_up", format_number(prob[e].up)},
                             {"analytic_down", format_number(prob[e].down)},
                             {"empirical_up", format_number(r.p_up)},
                             {"empirical_down", format_number(r.p_down)},
                             {"empirical_joint", format_number(r.p_joint)},
                             {"se_up", format_number(r.se_up)},
                             {"se_down", format_number(r.se_down)},
                             {"se_joint", format_number(r.se_joint)},
                             {"count_up", r.count_up},
                             {"count_down", r.count_down},
                             {"count_joint", r.count_joint},
                             {"exceeds_target", flagged}});
            if (flagged) risky.push_back(line_name(in.grid, l));
            csv << e << ',' << in.grid.external_id(l.from) << ',' << in.grid.external_id(l.to) << ','
                << format_number(target) << ',' << format_number(prob[e].up) << ',' << format_number(prob[e].down)
                << ',' << format_number(r.p_up) << ',' << format_number(r.p_down) << ',' << format_number(r.se_up)
                << ',' << format_number(r.se_down) << '\n';
        }
        json gens = json::array();
        for (std::size_t g = 0; g < in.grid.generators().size(); ++g) {
            const auto& r = rep.generators[g];
            gens.push_back({{"bus", in.grid.external_id(in.grid.generators()[g].bus)},
                            {"empirical_above", format_number(r.p_above)},
                            {"empirical_below", format_number(r.p_below)},
                            {"se_above", format_number(r.se_above)},
                            {"se_below", format_number(r.se_below)}});
        }
        j["lines"] = lines;
        j["generators"] = gens;
        j["risky_lines"] = risky;
        j["passed"] = risky.empty();
        write_json(rc.out_path, j);
        if (!rc.csv_path.empty()) write_text(rc.csv_path, csv.str());

        std::cout << "validate: " << rep.samples << " samples (" << rep.distribution << "), "
                  << risky.size() << " line(s) above target\n";
        if (!risky.empty()) {
            for (const auto& r : risky) std::cerr << "risky line " << r.get<std::string>() << "\n";
            return kValidationGate;
        }
        return kOk;
    });
}

int cmd_sweep(const RunConfig& rc) {
    return guarded([&]() -> int {
        check_mode(rc.mode);
        const Loaded in = load(rc);
        const std::string axis = rc.axis.empty() ? in.config.sweep.axis : rc.axis;
        const std::vector<double> values = rc.values.empty() ? in.config.sweep.values : rc.values;
        if (values.empty()) throw InputError("sweep needs values (--values or sweep.values)");
        std::ostringstream csv;

        auto try_solve = [&](const GridCase& grid, const Config& cfg, const std::string& mode) -> std::optional<Dispatch> {
            const NetworkFactors f = factor(grid);
            try {
                return solve(f, cfg, mode);
            } catch (const InfeasibleError&) {
                return std::nullopt;
            }
        };

        if (axis == "penetration") {
            const double base = penetration(in.grid);
            if (!(base > 0.0)) throw InputError("penetration sweep needs wind in the config");
            csv << "penetration,feasible,objective,iterations\n";
            for (double v : values) {
                if (!(v >= 0.0)) throw InputError("penetration values must be >= 0");
                const GridCase g = scale_wind(in.grid, v / base);
                const auto d = try_solve(g, in.config, rc.mode);
                csv << format_number(v) << ',' << (d ? 1 : 0) << ',' << (d ? format_number(d->objective) : "")
                    << ',' << (d ? d->report.iterations : 0) << '\n';
            }
        } else if (axis == "Gamma") {
            if (!in.config.robust) throw InputError("Gamma sweep needs a 'robust' section in the config");
            csv << "Gamma,feasible,objective,iterations\n";
            for (double v : values) {
                Config cfg = in.config;
                if (cfg.robust->mean && cfg.robust->mean->kind == "budget") cfg.robust->mean->Gamma = v;
                if (cfg.robust->variance && cfg.robust->variance->kind == "budget") cfg.robust->variance->Gamma = v;
                const auto d = try_solve(in.grid, cfg, "robust");
                csv << format_number(v) << ',' << (d ? 1 : 0) << ',' << (d ? format_number(d->objective) : "")
                    << ',' << (d ? d->report.iterations : 0) << '\n';
            }
        } else if (axis == "mean_error" || axis == "std_error") {
            const NetworkFactors f = factor(in.grid);
            Dispatch d;
            try {
                d = solve(f, in.config, rc.mode);
            } catch (const InfeasibleError& e) {
                std::cerr << "infeasible: " << e.what() << "\n";
                return kInfeasible;
            }
            const auto nw = static_cast<Eigen::Index>(in.grid.wind_farms().size());
            Vector mu(nw), var(nw);
            for (Eigen::Index k = 0; k < nw; ++k) {
                mu[k] = in.grid.wind_farms()[static_cast<std::size_t>(k)].mean_mw;
                var[k] = std::pow(in.grid.wind_farms()[static_cast<std::size_t>(k)].std_mw, 2);
            }
            auto worst = [&](const Vector& m, const Vector& v) {
                double w = 0.0;
                for (const auto& s : realized_epsilon(d.control, f, m, v)) w = std::max({w, s.up, s.down});
                return w;
            };
            csv << axis << ",max_realized_epsilon\n";
            for (double v : values) {
                double w;
                if (axis == "mean_error") {
                    // Over- and under-forecast by the same relative amount; report the worse.
                    w = std::max(worst(mu * (1.0 + v), var), worst(mu * (1.0 - v), var));
                } else {
                    w = worst(mu, var * (1.0 + v * v));
                }
                csv << format_number(v) << ',' << format_number(w) << '\n';
            }
        } else {
            throw InputError("sweep axis must be penetration, mean_error, std_error or Gamma");
        }
        write_text(rc.out_path, csv.str());
        std::cout << "sweep: " << values.size() << " point(s) on " << axis << "\n";
        return kOk;
    });
}

}  // namespace ccopf::cli
