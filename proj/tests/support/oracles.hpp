#pragma once

// Independent reference computations used by the unit tests and the
// acceptance binary. Nothing here calls into the library's numerics: the
// Laplacian is rebuilt densely, inverted by LU, and probabilities use erfc.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ccopf/case_model.hpp"

#ifndef CCOPF_DATA_DIR
#define CCOPF_DATA_DIR "data"
#endif

namespace ccopf::oracle {

inline std::string case_path(const std::string& name) { return std::string(CCOPF_DATA_DIR) + "/cases/" + name + ".m"; }
inline std::string config_path(const std::string& name) { return std::string(CCOPF_DATA_DIR) + "/config/" + name + ".json"; }

inline double gauss_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double gauss_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// P(N(mean, std^2) > limit), with a hard step when std is zero.
inline double exceed(double mean, double std, double limit) {
    if (std <= 0.0) return mean > limit ? 1.0 : 0.0;
    return gauss_tail((limit - mean) / std);
}

/// Quantile by bisection on erfc; slow but independent of the library.
inline double gauss_quantile_upper(double r) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gauss_tail(mid) > r ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Dense inverse of the reduced Laplacian, padded with a zero slack row and column.
inline Eigen::MatrixXd padded_inverse(const GridCase& grid) {
    const int n = static_cast<int>(grid.num_buses());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (const auto& l : grid.lines()) {
        b(l.from, l.from) += l.susceptance;
        b(l.to, l.to) += l.susceptance;
        b(l.from, l.to) -= l.susceptance;
        b(l.to, l.from) -= l.susceptance;
    }
    const Eigen::MatrixXd red = b.topLeftCorner(n - 1, n - 1);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
    z.topLeftCorner(n - 1, n - 1) = red.fullPivLu().inverse();
    return z;
}

inline Eigen::VectorXd to_buses(const GridCase& grid, const Eigen::VectorXd& per_gen) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.num_buses()));
    for (std::size_t g = 0; g < grid.generators().size(); ++g) {
        v[grid.generators()[g].bus] += per_gen[static_cast<Eigen::Index>(g)];
    }
    return v;
}

struct LineMoments {
    std::vector<double> mean;
    std::vector<double> std;
};

/// Mean and standard deviation of every line flow under the affine policy,
/// computed from the dense inverse. The slack absorbs any imbalance.
inline LineMoments line_moments(const GridCase& grid, const Eigen::VectorXd& p_bar, const Eigen::VectorXd& alpha) {
    const Eigen::MatrixXd z = padded_inverse(grid);
    const auto n = static_cast<Eigen::Index>(grid.num_buses());
    Eigen::VectorXd inj = to_buses(grid, p_bar);
    for (Eigen::Index i = 0; i < n; ++i) inj[i] -= grid.buses()[static_cast<std::size_t>(i)].load_mw;
    for (const auto& w : grid.wind_farms()) inj[w.bus] += w.mean_mw;
    const Eigen::VectorXd theta = z * inj;
    const Eigen::VectorXd delta = z * to_buses(grid, alpha);
    LineMoments out;
    for (const auto& l : grid.lines()) {
        out.mean.push_back(l.susceptance * (theta[l.from] - theta[l.to]));
        double var = 0.0;
        for (const auto& w : grid.wind_farms()) {
            const double sens = z(l.from, w.bus) - z(l.to, w.bus) - delta[l.from] + delta[l.to];
            var += w.std_mw * w.std_mw * sens * sens;
        }
        out.std.push_back(l.susceptance * std::sqrt(var));
    }
    return out;
}

/// Random connected grid with n buses (the last one is the slack), between one
/// and three generators and `farms` wind farms on distinct non-slack buses.
inline GridCase random_grid(std::mt19937_64& rng, int n, int farms, bool limits = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Bus> buses;
    for (int i = 0; i < n; ++i) buses.push_back({i + 1, std::floor(30.0 * u(rng)), false});
    std::vector<Line> lines;
    std::set<std::pair<int, int>> used;
    auto add = [&](int a, int b) {
        if (a == b || used.count({std::min(a, b), std::max(a, b)})) return;
        used.insert({std::min(a, b), std::max(a, b)});
        Line l;
        l.from = a;
        l.to = b;
        l.susceptance = 1.0 + 19.0 * u(rng);
        l.flow_limit_mw = limits ? 40.0 + 200.0 * u(rng) : kUnlimited;
        l.epsilon = 0.0227;
        lines.push_back(l);
    };
    for (int i = 1; i < n; ++i) add(i, static_cast<int>(u(rng) * i));
    const int extra = static_cast<int>(u(rng) * 4.0);
    for (int e = 0; e < extra; ++e) add(static_cast<int>(u(rng) * n), static_cast<int>(u(rng) * n));

    std::vector<int> free_buses;
    for (int i = 0; i < n - 1; ++i) free_buses.push_back(i);
    std::shuffle(free_buses.begin(), free_buses.end(), rng);
    const int gens = std::min(1 + static_cast<int>(u(rng) * 3.0), n - 1);
    std::vector<Generator> generators;
    for (int g = 0; g < gens; ++g) {
        Generator gen;
        gen.bus = free_buses[static_cast<std::size_t>(g)];
        gen.p_min_mw = 0.0;
        gen.p_max_mw = 500.0;
        gen.cost_quadratic = 0.01 + 0.1 * u(rng);
        gen.cost_linear = 10.0 + 20.0 * u(rng);
        gen.epsilon = 0.0227;
        generators.push_back(gen);
    }
    std::vector<WindFarm> winds;
    for (int k = 0; k < farms && k < n - 1; ++k) {
        WindFarm w;
        w.bus = free_buses[static_cast<std::size_t>((gens + k) % (n - 1))];
        w.mean_mw = 5.0 + 15.0 * u(rng);
        w.std_mw = w.mean_mw * (0.1 + 0.3 * u(rng));
        winds.push_back(w);
    }
    // Farms may share a generator bus when the grid is small; keep them apart.
    std::set<int> gen_buses;
    for (const auto& g : generators) gen_buses.insert(g.bus);
    std::set<int> seen;
    std::vector<WindFarm> kept;
    for (const auto& w : winds) {
        if (gen_buses.count(w.bus) || seen.count(w.bus)) continue;
        seen.insert(w.bus);
        kept.push_back(w);
    }
    return GridCase("random" + std::to_string(n), 100.0, std::move(buses), std::move(lines), std::move(generators),
                    std::move(kept));
}

/// max sum_k |c_k| u_k over { 0 <= u_k <= gamma_k, sum u_k / gamma_k <= Gamma }
/// by enumerating vertices: a subset at full extent plus one fractional coordinate.
inline double budget_vertex_max(const std::vector<double>& c, const std::vector<double>& gamma, double Gamma) {
    const std::size_t w = c.size();
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << w); ++mask) {
        double used = 0.0, value = 0.0;
        bool ok = true;
        for (std::size_t k = 0; k < w; ++k) {
            if (mask & (1u << k)) {
                if (gamma[k] <= 0.0) {
                    ok = false;
                    break;
                }
                used += 1.0;
                value += std::abs(c[k]) * gamma[k];
            }
        }
        if (!ok || used > Gamma + 1e-12) continue;
        best = std::max(best, value);
        for (std::size_t j = 0; j < w; ++j) {
            if ((mask & (1u << j)) || gamma[j] <= 0.0) continue;
            const double frac = std::min(1.0, Gamma - used);
            if (frac > 0.0) best = std::max(best, value + frac * std::abs(c[j]) * gamma[j]);
        }
    }
    return best;
}

/// min Gamma a + sum_k gamma_k b_k  s.t.  a / gamma_k + b_k >= |c_k|, a, b >= 0.
/// For fixed a the best b is explicit; the objective is piecewise linear in a
/// with breakpoints at gamma_k |c_k|, so checking those suffices.
inline double budget_dual_min(const std::vector<double>& c, const std::vector<double>& gamma, double Gamma) {
    std::vector<double> breaks{0.0};
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (gamma[k] > 0.0) breaks.push_back(gamma[k] * std::abs(c[k]));
    }
    double best = std::numeric_limits<double>::infinity();
    for (double a : breaks) {
        double v = Gamma * a;
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (gamma[k] > 0.0) v += gamma[k] * std::max(0.0, std::abs(c[k]) - a / gamma[k]);
        }
        best = std::min(best, v);
    }
    return best;
}

/// The unit-extent form min Gamma a + sum b_k s.t. a + b_k >= |c_k|.
inline double unit_budget_dual_min(const std::vector<double>& c, double Gamma) {
    std::vector<double> g(c.size(), 1.0);
    return budget_dual_min(c, g, Gamma);
}

}  // namespace ccopf::oracle
