#include <cmath>

#include <gtest/gtest.h>

#include "cbm/error.hpp"
#include "cbm/quadrature.hpp"

using namespace cbm;

TEST(GaussLegendre, WeightsSumToIntervalLength) {
  for (std::size_t n : {1u, 2u, 5u, 32u, 64u, 128u}) {
    const auto& rule = gauss_legendre(n);
    ASSERT_EQ(rule.size(), n);
    double sum = 0.0;
    for (double w : rule.weights) sum += w;
    EXPECT_NEAR(sum, 2.0, 1e-13) << "n = " << n;
  }
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
  for (std::size_t n : {3u, 8u, 32u}) {
    for (std::size_t d = 0; d <= 2 * n - 1; d += 3) {
      const double got = integrate([d](double x) { return std::pow(x, static_cast<double>(d)); }, 0.0, 1.0, n);
      EXPECT_NEAR(got, 1.0 / static_cast<double>(d + 1), 1e-13) << "n = " << n << " degree = " << d;
    }
  }
}

TEST(GaussLegendre, NodesAreSymmetricAndSorted) {
  const auto& rule = gauss_legendre(9);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    EXPECT_NEAR(rule.nodes[k], -rule.nodes[rule.size() - 1 - k], 1e-15);
    if (k > 0) {
      EXPECT_LT(rule.nodes[k - 1], rule.nodes[k]);
    }
  }
}

TEST(GaussLegendre, SmoothIntegrand) {
  EXPECT_NEAR(integrate([](double x) { return std::exp(x); }, 0.0, 2.0, 32), std::exp(2.0) - 1.0, 1e-13);
}

TEST(GaussLegendre, CachedRuleIsStable) {
  const auto* a = &gauss_legendre(17);
  const auto* b = &gauss_legendre(17);
  EXPECT_EQ(a, b);
}

TEST(GaussLegendre, ZeroPointsRejected) { EXPECT_THROW(gauss_legendre(0), DomainError); }
