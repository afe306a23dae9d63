#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ccopf/network.hpp"
#include "ccopf/opf.hpp"

namespace ccopf {

enum class DistributionKind { Gaussian, Laplace, Logistic, Weibull, StudentT, Cauchy };

/// Zero-mean wind fluctuation family. Every farm draws from the same family
/// with its own standard deviation. All kinds except Cauchy match the standard
/// deviation exactly; Cauchy matches the Gaussian 95th percentile.
struct WindDistribution {
    DistributionKind kind = DistributionKind::Gaussian;
    double weibull_shape = 2.0;  // 1.2, 2 or 4
    double t_dof = 2.5;

    /// Accepts gaussian, laplace, logistic, weibull1.2, weibull2, weibull4, t2.5, cauchy.
    static WindDistribution parse(std::string_view name);
    std::string name() const;

    /// One fluctuation with scale matched to `sigma`.
    double sample(std::mt19937_64& rng, double sigma) const;
};

/// f(omega) = intercept + slope * omega for every line.
struct AffineFlowMap {
    Vector intercept;       // per line, MW
    Eigen::MatrixXd slope;  // lines x farms
};

/// Throws InputError for a non-viable control.
AffineFlowMap affine_flow_map(const AffineControl& control, const NetworkFactors& factors);

struct SimulationOptions {
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    WindDistribution distribution;
    /// Realized mean minus forecast per farm (empty: none). The shift moves
    /// the angles through the reduced Laplacian; the reference bus absorbs it.
    Vector mean_shift;
    /// Realized standard deviation per farm (empty: the forecast values).
    Vector std_override;
    /// 0 picks CCOPF_THREADS or the hardware concurrency.
    unsigned threads = 0;
    /// Also accumulate per-line sample moments.
    bool moments = false;
};

struct LineEmpirical {
    std::uint64_t count_up = 0;
    std::uint64_t count_down = 0;
    std::uint64_t count_joint = 0;
    double p_up = 0.0;
    double p_down = 0.0;
    double p_joint = 0.0;
    double se_up = 0.0;
    double se_down = 0.0;
    double se_joint = 0.0;
    // Filled when SimulationOptions::moments is set.
    double sample_mean = 0.0;
    double sample_variance = 0.0;
    double se_mean = 0.0;
    double se_variance = 0.0;
};

struct GenEmpirical {
    std::uint64_t count_above = 0;
    std::uint64_t count_below = 0;
    double p_above = 0.0;
    double p_below = 0.0;
    double se_above = 0.0;
    double se_below = 0.0;
};

struct ValidationReport {
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::string distribution;
    std::vector<LineEmpirical> lines;
    std::vector<GenEmpirical> generators;
};

/// sqrt(p (1 - p) / n).
double binomial_se(double p, std::size_t n);

/// Deterministic for a given seed regardless of thread count. Throws InputError when samples == 0.
ValidationReport monte_carlo(const AffineControl& control, const NetworkFactors& factors,
                             const SimulationOptions& options);

struct OverloadProbability {
    double up = 0.0;
    double down = 0.0;
    double joint = 0.0;
};

/// Gaussian overload probabilities per line (zeros for unlimited lines).
std::vector<OverloadProbability> analytic_overload(const AffineControl& control, const NetworkFactors& factors);

struct SideEpsilon {
    double up = 0.0;
    double down = 0.0;
};

/// Overload probability per side when the wind actually has means `true_mean`
/// and variances `true_variance` (per farm) under a fixed control.
std::vector<SideEpsilon> realized_epsilon(const AffineControl& control, const NetworkFactors& factors,
                                          const Vector& true_mean, const Vector& true_variance);

/// Worker count used when SimulationOptions::threads is 0.
unsigned default_threads();

}  // namespace ccopf
