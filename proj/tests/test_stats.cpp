#include "factorial/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "factorial/errors.hpp"

using namespace factorial;

TEST(Stats, NormalQuantileKnownValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-13);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_quantile(0.995), 2.5758293035489004, 1e-12);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-9);
}

TEST(Stats, NormalQuantileInvertsCdf) {
  for (double p = 1e-6; p < 1.0; p += 0.0137) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-13 + 1e-12 * p);
  }
}

TEST(Stats, Type7Quantile) {
  std::vector<double> v{5, 1, 4, 2, 3};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.1), 1.4);
  std::vector<double> w{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile(w, 0.25), 1.75);
}

TEST(Stats, EqualTailedInterval) {
  std::vector<double> v(1001);
  std::iota(v.begin(), v.end(), 0.0);
  const auto [lo, hi] = equal_tailed_interval(v, 0.95);
  EXPECT_NEAR(lo, 25.0, 1e-9);
  EXPECT_NEAR(hi, 975.0, 1e-9);
}

TEST(Stats, SampleMoments) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const auto m = sample_moments(v);
  EXPECT_DOUBLE_EQ(m.mean, 5.0);
  EXPECT_NEAR(m.variance, 32.0 / 7.0, 1e-14);
}
