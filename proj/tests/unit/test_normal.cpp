#include <cmath>

#include <gtest/gtest.h>

#include "ccopf/error.hpp"
#include "ccopf/normal.hpp"
#include "support/oracles.hpp"

using namespace ccopf;

TEST(Normal, TwoSigmaTolerance) {
    EXPECT_NEAR(eta(0.0227), 2.0, 0.01);
    EXPECT_NEAR(eta(0.5), 0.0, 1e-14);
}

TEST(Normal, EtaInvertsCdf) {
    for (double r : {1e-9, 1e-4, 0.001, 0.01, 0.0227, 0.1, 0.3, 0.5, 0.7, 0.99}) {
        EXPECT_NEAR(oracle::gauss_cdf(eta(r)), 1.0 - r, 1e-12) << r;
        EXPECT_NEAR(eta(r), oracle::gauss_quantile_upper(r), 1e-9) << r;
    }
}

TEST(Normal, EtaIsDecreasing) {
    double prev = eta(1e-6);
    for (double r = 2e-6; r < 0.999; r *= 1.7) {
        const double cur = eta(r);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(Normal, EtaRejectsOutOfRange) {
    EXPECT_THROW(eta(0.0), InputError);
    EXPECT_THROW(eta(1.0), InputError);
    EXPECT_THROW(eta(-0.1), InputError);
    EXPECT_THROW(eta(std::nan("")), InputError);
}

TEST(Normal, SurvivalMatchesErfcDeepInTail) {
    for (double x : {-5.0, -1.0, 0.0, 1.0, 3.0, 8.0, 20.0, 35.0}) {
        const double ref = 0.5 * std::erfc(x / std::sqrt(2.0));
        EXPECT_NEAR(normal_survival(x) / ref, 1.0, 1e-12) << x;
        EXPECT_NEAR(normal_cdf(x) + normal_survival(x), 1.0, 1e-15) << x;
    }
}

TEST(Normal, PdfIntegratesToCdf) {
    // Trapezoid over [-1, 2] against the cdf difference.
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = -1.0 + 3.0 * i / n;
        sum += (i == 0 || i == n ? 0.5 : 1.0) * normal_pdf(x);
    }
    EXPECT_NEAR(sum * 3.0 / n, normal_cdf(2.0) - normal_cdf(-1.0), 1e-8);
}
