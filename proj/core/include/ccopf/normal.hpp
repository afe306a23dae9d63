#pragma once

namespace ccopf {

/// Standard normal cdf.
double normal_cdf(double x);

/// Upper tail 1 - cdf(x), computed without cancellation.
double normal_survival(double x);

/// Standard normal density.
double normal_pdf(double x);

/// eta(r) = cdf^{-1}(1 - r): the number of standard deviations a Gaussian
/// quantity must stay below its limit so that the exceedance probability is r.
/// Throws InputError unless 0 < r < 1.
double eta(double r);

}  // namespace ccopf
