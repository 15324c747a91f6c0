#pragma once

#include <span>
#include <utility>

namespace factorial {

double normal_cdf(double x);

// Inverse standard normal CDF. Acklam's rational approximation followed by
// one Halley step against erfc; absolute error below 1e-12 on (1e-300, 1).
double normal_quantile(double p);

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). Reorders `values`.
double quantile(std::span<double> values, double prob);

// Equal-tailed interval: quantiles at (1-level)/2 and (1+level)/2.
// Reorders `values`.
std::pair<double, double> equal_tailed_interval(std::span<double> values, double level);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased, n - 1 denominator
};

Moments sample_moments(std::span<const double> values);

}  // namespace factorial
