#include "ccopf/normal.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "ccopf/error.hpp"

namespace ccopf {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_survival(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double eta(double r) {
    if (!(r > 0.0 && r < 1.0)) {
        throw InputError("eta: probability must lie in (0, 1), got " + std::to_string(r));
    }
    // survival(x) = erfc(x / sqrt2) / 2  =>  x = sqrt2 * erfc_inv(2r)
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * r);
}

}  // namespace ccopf
