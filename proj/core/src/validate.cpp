#include "ccopf/validate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>

#include "ccopf/error.hpp"
#include "ccopf/normal.hpp"
#include "detail.hpp"

namespace ccopf {

namespace {

constexpr std::size_t kChunk = 4096;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform in the open interval (0, 1).
double open_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

WindDistribution WindDistribution::parse(std::string_view name) {
    WindDistribution d;
    if (name == "gaussian" || name == "normal") d.kind = DistributionKind::Gaussian;
    else if (name == "laplace") d.kind = DistributionKind::Laplace;
    else if (name == "logistic") d.kind = DistributionKind::Logistic;
    else if (name == "weibull1.2") { d.kind = DistributionKind::Weibull; d.weibull_shape = 1.2; }
    else if (name == "weibull2") { d.kind = DistributionKind::Weibull; d.weibull_shape = 2.0; }
    else if (name == "weibull4") { d.kind = DistributionKind::Weibull; d.weibull_shape = 4.0; }
    else if (name == "t2.5") { d.kind = DistributionKind::StudentT; d.t_dof = 2.5; }
    else if (name == "cauchy") d.kind = DistributionKind::Cauchy;
    else throw InputError("unknown distribution '" + std::string(name) + "'");
    return d;
}

std::string WindDistribution::name() const {
    switch (kind) {
        case DistributionKind::Gaussian: return "gaussian";
        case DistributionKind::Laplace: return "laplace";
        case DistributionKind::Logistic: return "logistic";
        case DistributionKind::Weibull: {
            std::string s = std::to_string(weibull_shape);
            s.erase(s.find_last_not_of('0') + 1);
            if (s.back() == '.') s.pop_back();
            return "weibull" + s;
        }
        case DistributionKind::StudentT: {
            std::string s = std::to_string(t_dof);
            s.erase(s.find_last_not_of('0') + 1);
            if (s.back() == '.') s.pop_back();
            return "t" + s;
        }
        case DistributionKind::Cauchy: return "cauchy";
    }
    return "unknown";
}

double WindDistribution::sample(std::mt19937_64& rng, double sigma) const {
    if (sigma == 0.0) return 0.0;
    switch (kind) {
        case DistributionKind::Gaussian:
            return sigma * std::normal_distribution<double>()(rng);
        case DistributionKind::Laplace: {
            const double b = sigma / std::numbers::sqrt2;
            const double u = open_uniform(rng) - 0.5;
            return -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
        }
        case DistributionKind::Logistic: {
            const double s = sigma * std::numbers::sqrt3 / std::numbers::pi;
            const double u = open_uniform(rng);
            return s * std::log(u / (1.0 - u));
        }
        case DistributionKind::Weibull: {
            const double k = weibull_shape;
            const double g1 = std::tgamma(1.0 + 1.0 / k);
            const double g2 = std::tgamma(1.0 + 2.0 / k);
            const double lambda = sigma / std::sqrt(g2 - g1 * g1);
            const double u = open_uniform(rng);
            return lambda * std::pow(-std::log(u), 1.0 / k) - lambda * g1;
        }
        case DistributionKind::StudentT: {
            const double scale = sigma / std::sqrt(t_dof / (t_dof - 2.0));
            return scale * std::student_t_distribution<double>(t_dof)(rng);
        }
        case DistributionKind::Cauchy: {
            const double scale = eta(0.05) * sigma / std::tan(0.45 * std::numbers::pi);
            const double u = open_uniform(rng);
            return scale * std::tan(std::numbers::pi * (u - 0.5));
        }
    }
    return 0.0;
}

AffineFlowMap affine_flow_map(const AffineControl& control, const NetworkFactors& factors) {
    const GridCase& grid = factors.grid();
    const auto stats = flow_statistics(control, factors);
    const Vector delta = delta_from_alpha(factors, per_bus(grid, control.alpha));
    const auto nl = static_cast<Eigen::Index>(grid.lines().size());
    const auto nw = static_cast<Eigen::Index>(grid.wind_farms().size());
    AffineFlowMap map;
    map.intercept.resize(nl);
    map.slope.resize(nl, nw);
    for (Eigen::Index e = 0; e < nl; ++e) {
        const auto& l = grid.lines()[static_cast<std::size_t>(e)];
        map.intercept[e] = stats[static_cast<std::size_t>(e)].mean_mw;
        for (Eigen::Index k = 0; k < nw; ++k) {
            const Vector& pi = factors.wind_column(static_cast<std::size_t>(k));
            map.slope(e, k) = l.susceptance * (pi[l.from] - pi[l.to] - delta[l.from] + delta[l.to]);
        }
    }
    return map;
}

double binomial_se(double p, std::size_t n) {
    return n == 0 ? 0.0 : std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

unsigned default_threads() {
    if (const char* env = std::getenv("CCOPF_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

/// Shift of the mean angle differences caused by a mean error r, per line.
Vector mean_shift_flows(const NetworkFactors& factors, const Vector& r) {
    const GridCase& grid = factors.grid();
    Vector theta = Vector::Zero(static_cast<Eigen::Index>(grid.num_buses()));
    for (std::size_t k = 0; k < grid.wind_farms().size(); ++k) {
        theta += r[static_cast<Eigen::Index>(k)] * factors.wind_column(k);
    }
    return line_flows(grid, theta);
}

struct ChunkResult {
    std::vector<std::uint64_t> line_counts;  // up, down, joint per line
    std::vector<std::uint64_t> gen_counts;   // above, below per generator
    std::vector<double> sums;                // sum y, y^2, y^3, y^4 per line
};

}  // namespace

ValidationReport monte_carlo(const AffineControl& control, const NetworkFactors& factors,
                             const SimulationOptions& options) {
    if (options.samples == 0) throw InputError("sample count must be positive");
    const GridCase& grid = factors.grid();
    const auto nl = grid.lines().size();
    const auto ng = grid.generators().size();
    const auto nw = grid.wind_farms().size();

    AffineFlowMap map = affine_flow_map(control, factors);
    if (options.mean_shift.size() > 0) {
        if (static_cast<std::size_t>(options.mean_shift.size()) != nw) throw InputError("mean_shift needs one entry per farm");
        map.intercept += mean_shift_flows(factors, options.mean_shift);
    }
    Vector sigma(static_cast<Eigen::Index>(nw));
    for (std::size_t k = 0; k < nw; ++k) sigma[static_cast<Eigen::Index>(k)] = grid.wind_farms()[k].std_mw;
    if (options.std_override.size() > 0) {
        if (static_cast<std::size_t>(options.std_override.size()) != nw) throw InputError("std_override needs one entry per farm");
        if (options.std_override.minCoeff() < 0.0) throw InputError("std_override entries must be >= 0");
        sigma = options.std_override;
    }
    // Row-major slopes make the per-sample loop contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> slope = map.slope;

    const std::size_t chunks = (options.samples + kChunk - 1) / kChunk;
    std::vector<ChunkResult> results(chunks);
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        Vector omega(static_cast<Eigen::Index>(nw));
        for (std::size_t c = next++; c < chunks; c = next++) {
            ChunkResult& out = results[c];
            out.line_counts.assign(3 * nl, 0);
            out.gen_counts.assign(2 * ng, 0);
            if (options.moments) out.sums.assign(4 * nl, 0.0);
            std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(c + 1)));
            const std::size_t begin = c * kChunk;
            const std::size_t end = std::min(options.samples, begin + kChunk);
            for (std::size_t s = begin; s < end; ++s) {
                double total = 0.0;
                for (std::size_t k = 0; k < nw; ++k) {
                    omega[static_cast<Eigen::Index>(k)] = options.distribution.sample(rng, sigma[static_cast<Eigen::Index>(k)]);
                    total += omega[static_cast<Eigen::Index>(k)];
                }
                for (std::size_t e = 0; e < nl; ++e) {
                    const double y = slope.row(static_cast<Eigen::Index>(e)).dot(omega);
                    const double f = map.intercept[static_cast<Eigen::Index>(e)] + y;
                    const auto& l = grid.lines()[e];
                    const bool up = f > l.flow_limit_mw;
                    const bool down = f < -l.flow_limit_mw;
                    out.line_counts[3 * e] += up;
                    out.line_counts[3 * e + 1] += down;
                    out.line_counts[3 * e + 2] += (up || down);
                    if (options.moments) {
                        const double y2 = y * y;
                        out.sums[4 * e] += y;
                        out.sums[4 * e + 1] += y2;
                        out.sums[4 * e + 2] += y2 * y;
                        out.sums[4 * e + 3] += y2 * y2;
                    }
                }
                for (std::size_t g = 0; g < ng; ++g) {
                    const double p = control.p_bar[static_cast<Eigen::Index>(g)] -
                                     control.alpha[static_cast<Eigen::Index>(g)] * total;
                    out.gen_counts[2 * g] += p > grid.generators()[g].p_max_mw;
                    out.gen_counts[2 * g + 1] += p < grid.generators()[g].p_min_mw;
                }
            }
        }
    };

    const unsigned threads = std::min<std::size_t>(options.threads ? options.threads : default_threads(), chunks);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    ValidationReport rep;
    rep.samples = options.samples;
    rep.seed = options.seed;
    rep.distribution = options.distribution.name();
    rep.lines.resize(nl);
    rep.generators.resize(ng);
    std::vector<double> sums(4 * nl, 0.0);
    for (const auto& r : results) {  // fixed chunk order keeps sums bit-identical
        for (std::size_t e = 0; e < nl; ++e) {
            rep.lines[e].count_up += r.line_counts[3 * e];
            rep.lines[e].count_down += r.line_counts[3 * e + 1];
            rep.lines[e].count_joint += r.line_counts[3 * e + 2];
        }
        for (std::size_t g = 0; g < ng; ++g) {
            rep.generators[g].count_above += r.gen_counts[2 * g];
            rep.generators[g].count_below += r.gen_counts[2 * g + 1];
        }
        for (std::size_t i = 0; i < r.sums.size(); ++i) sums[i] += r.sums[i];
    }
    const auto n = static_cast<double>(options.samples);
    for (std::size_t e = 0; e < nl; ++e) {
        auto& l = rep.lines[e];
        l.p_up = static_cast<double>(l.count_up) / n;
        l.p_down = static_cast<double>(l.count_down) / n;
        l.p_joint = static_cast<double>(l.count_joint) / n;
        l.se_up = binomial_se(l.p_up, options.samples);
        l.se_down = binomial_se(l.p_down, options.samples);
        l.se_joint = binomial_se(l.p_joint, options.samples);
        if (options.moments) {
            const double m1 = sums[4 * e] / n, m2 = sums[4 * e + 1] / n;
            const double m3 = sums[4 * e + 2] / n, m4 = sums[4 * e + 3] / n;
            const double c2 = std::max(0.0, m2 - m1 * m1);
            const double c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
            l.sample_mean = map.intercept[static_cast<Eigen::Index>(e)] + m1;
            l.sample_variance = n > 1.0 ? c2 * n / (n - 1.0) : 0.0;
            l.se_mean = std::sqrt(c2 / n);
            l.se_variance = std::sqrt(std::max(0.0, c4 - c2 * c2) / n);
        }
    }
    for (std::size_t g = 0; g < ng; ++g) {
        auto& r = rep.generators[g];
        r.p_above = static_cast<double>(r.count_above) / n;
        r.p_below = static_cast<double>(r.count_below) / n;
        r.se_above = binomial_se(r.p_above, options.samples);
        r.se_below = binomial_se(r.p_below, options.samples);
    }
    return rep;
}

std::vector<OverloadProbability> analytic_overload(const AffineControl& control, const NetworkFactors& factors) {
    const GridCase& grid = factors.grid();
    const auto stats = flow_statistics(control, factors);
    std::vector<OverloadProbability> out;
    for (std::size_t e = 0; e < grid.lines().size(); ++e) {
        const auto& l = grid.lines()[e];
        if (!l.limited()) {
            out.push_back({});
            continue;
        }
        const double up = detail::exceedance(stats[e].mean_mw, stats[e].std_mw, l.flow_limit_mw);
        const double down = detail::exceedance(-stats[e].mean_mw, stats[e].std_mw, l.flow_limit_mw);
        out.push_back({up, down, up + down});
    }
    return out;
}

std::vector<SideEpsilon> realized_epsilon(const AffineControl& control, const NetworkFactors& factors,
                                          const Vector& true_mean, const Vector& true_variance) {
    const GridCase& grid = factors.grid();
    const auto nw = grid.wind_farms().size();
    if (static_cast<std::size_t>(true_mean.size()) != nw || static_cast<std::size_t>(true_variance.size()) != nw) {
        throw InputError("true parameters need one entry per wind farm");
    }
    if (nw > 0 && true_variance.minCoeff() < 0.0) throw InputError("true variances must be >= 0");
    Vector r(static_cast<Eigen::Index>(nw));
    for (std::size_t k = 0; k < nw; ++k) r[static_cast<Eigen::Index>(k)] = true_mean[static_cast<Eigen::Index>(k)] - grid.wind_farms()[k].mean_mw;

    const AffineFlowMap map = affine_flow_map(control, factors);
    const Vector shift = mean_shift_flows(factors, r);
    std::vector<SideEpsilon> out;
    for (std::size_t e = 0; e < grid.lines().size(); ++e) {
        const auto& l = grid.lines()[e];
        if (!l.limited()) {
            out.push_back({});
            continue;
        }
        const double mean = map.intercept[static_cast<Eigen::Index>(e)] + shift[static_cast<Eigen::Index>(e)];
        double var = 0.0;
        for (std::size_t k = 0; k < nw; ++k) {
            const double s = map.slope(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(k));
            var += true_variance[static_cast<Eigen::Index>(k)] * s * s;
        }
        const double std = std::sqrt(var);
        out.push_back({detail::exceedance(mean, std, l.flow_limit_mw), detail::exceedance(-mean, std, l.flow_limit_mw)});
    }
    return out;
}

}  // namespace ccopf
