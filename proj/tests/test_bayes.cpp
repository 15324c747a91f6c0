#include "factorial/bayes.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "factorial/errors.hpp"
#include "factorial/neyman.hpp"
#include "factorial/stats.hpp"
#include "oracle.hpp"

using namespace factorial;

namespace {

// Posterior moments via the beta-binomial law: the imputed count in arm j is
// BetaBinomial(N - n_j, alpha + successes, beta + failures), arms independent.
std::pair<double, double> beta_binomial_moments(const ObservedData& obs, std::size_t l, const PriorSpec& prior) {
  const auto h = oracle::model_matrix(obs.factors());
  const double n = static_cast<double>(obs.units());
  const double scale = 1.0 / static_cast<double>(obs.arms() / 2);
  double mean = 0.0;
  double var = 0.0;
  for (std::size_t j = 0; j < obs.arms(); ++j) {
    const double m = n - static_cast<double>(obs.arm_size(j));
    const double a = prior.alpha[j] + static_cast<double>(obs.arm_successes(j));
    const double b = prior.beta[j] + static_cast<double>(obs.arm_size(j) - obs.arm_successes(j));
    const double imp_mean = m * a / (a + b);
    const double imp_var = m * a * b * (a + b + m) / ((a + b) * (a + b) * (a + b + 1));
    mean += h[j][l] * (static_cast<double>(obs.arm_successes(j)) + imp_mean) / n;
    var += imp_var / (n * n);
  }
  return {mean * scale, var * scale * scale};
}

ObservedData smoking() { return ObservedData(2, {189, 188, 189, 189}, {13, 29, 19, 34}); }

}  // namespace

TEST(Bayes, ClosedFormsMatchBetaBinomial) {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const int k = 1 + static_cast<int>(rng.below(3));
    const std::size_t arms = std::size_t{1} << k;
    std::vector<std::int64_t> n(arms), s(arms);
    for (std::size_t j = 0; j < arms; ++j) {
      n[j] = 2 + static_cast<std::int64_t>(rng.below(300));
      s[j] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n[j]) + 1));
    }
    const ObservedData obs(k, n, s);
    PriorSpec prior = PriorSpec::uniform(arms);
    for (std::size_t j = 0; j < arms; ++j) {
      prior.alpha[j] = 0.1 + 5 * rng.uniform();
      prior.beta[j] = 0.1 + 5 * rng.uniform();
    }
    const ModelMatrix h(k);
    for (std::size_t l = 1; l < arms; ++l) {
      const auto [mean, var] = beta_binomial_moments(obs, l, prior);
      EXPECT_NEAR(posterior_mean_closed(obs, h, l, prior), mean, 1e-13);
      EXPECT_NEAR(posterior_variance_closed(obs, prior), var, 1e-13 * var + 1e-18);
    }
  }
}

TEST(Bayes, TinyExampleByHand) {
  // K=1, two arms of 2 with one success each, uniform prior.
  // Imputed count per arm ~ BetaBinomial(2, 2, 2): variance 2 * 4 * 6 / (16 * 5) = 0.6.
  const ObservedData obs(1, {2, 2}, {1, 1});
  const auto prior = PriorSpec::uniform(2);
  EXPECT_NEAR(posterior_mean_closed(obs, ModelMatrix(1), 1, prior), 0.0, 1e-15);
  EXPECT_NEAR(posterior_variance_closed(obs, prior), 1.2 / 16.0, 1e-15);
}

TEST(Bayes, MonteCarloMatchesClosedForm) {
  const auto obs = smoking();
  const ModelMatrix h(2);
  const auto prior = PriorSpec::uniform(4);
  Rng rng(5);
  const std::size_t draws = 200000;
  for (std::size_t l = 1; l < 4; ++l) {
    const auto d = posterior_draws_indep(obs, h, l, prior, draws, rng);
    const auto m = sample_moments(d);
    const double v = posterior_variance_closed(obs, prior);
    EXPECT_NEAR(m.mean, posterior_mean_closed(obs, h, l, prior), 4.0 * std::sqrt(v / draws));
    // Var of the sample variance is about 2 v^2 / draws for near-normal draws.
    EXPECT_NEAR(m.variance, v, 4.0 * v * std::sqrt(2.0 / draws));
  }
}

TEST(Bayes, SmokingIntervalNarrowerThanNeyman) {
  const auto obs = smoking();
  const ModelMatrix h(2);
  Rng rng(7);
  const auto ci = credible_interval_indep(obs, h, 2, PriorSpec::uniform(4), 200000, 0.95, rng);
  EXPECT_EQ(ci.method, Method::BayesIndep);
  EXPECT_EQ(ci.mc_draws, 200000u);
  EXPECT_NEAR(ci.lower, 0.041, 0.005);
  EXPECT_NEAR(ci.upper, 0.123, 0.005);
  const auto ney = confidence_interval(obs, h, 2, 0.95);
  const double ratio = ci.width() / ney.width();
  EXPECT_GT(ratio, 0.82);
  EXPECT_LT(ratio, 0.91);
}

TEST(Bayes, ApproximateVarianceNeverExceedsNeyman) {
  Rng rng(11);
  for (int rep = 0; rep < 2000; ++rep) {
    std::vector<std::int64_t> n(4), s(4);
    for (std::size_t j = 0; j < 4; ++j) {
      n[j] = 2 + static_cast<std::int64_t>(rng.below(100));
      s[j] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n[j]) + 1));
    }
    const ObservedData obs(2, n, s);
    EXPECT_LE(approx_posterior_variance(obs), variance_estimate(obs));
  }
}

TEST(Bayes, ApproximateVarianceShrinksNeymanByArmFraction) {
  // Balanced design: every term is scaled by 1 - 1/J.
  const ObservedData obs(2, {100, 100, 100, 100}, {10, 40, 55, 90});
  EXPECT_NEAR(approx_posterior_variance(obs), 0.75 * variance_estimate(obs), 1e-17);
}

TEST(Bayes, SameSeedSameDraws) {
  const auto obs = smoking();
  Rng a(99), b(99);
  const auto da = posterior_draws_indep(obs, ModelMatrix(2), 1, PriorSpec::uniform(4), 1000, a);
  const auto db = posterior_draws_indep(obs, ModelMatrix(2), 1, PriorSpec::uniform(4), 1000, b);
  EXPECT_EQ(da, db);
}

TEST(Bayes, DrawsAreOnTheFiniteGrid) {
  // Every draw is 2^-(K-1) * integer / N.
  const ObservedData obs(2, {5, 5, 5, 5}, {1, 2, 3, 4});
  Rng rng(13);
  for (double d : posterior_draws_indep(obs, ModelMatrix(2), 3, PriorSpec::uniform(4), 500, rng)) {
    const double scaled = d * 2.0 * 20.0;
    EXPECT_NEAR(scaled, std::round(scaled), 1e-12);
    EXPECT_LE(std::abs(d), 1.0);
  }
}

TEST(Bayes, Validation) {
  const auto obs = smoking();
  Rng rng(1);
  EXPECT_THROW(PriorSpec::symmetric(4, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(PriorSpec::symmetric(4, 1.0, -2.0), InvalidArgument);
  EXPECT_THROW(PriorSpec::uniform(2).validate(4), InvalidArgument);
  EXPECT_THROW(credible_interval_indep(obs, ModelMatrix(2), 1, PriorSpec::uniform(4), 999, 0.95, rng),
               InvalidArgument);
  EXPECT_THROW(credible_interval_indep(obs, ModelMatrix(2), 1, PriorSpec::uniform(4), 1000, 1.5, rng),
               InvalidArgument);
  EXPECT_THROW(posterior_mean_closed(obs, ModelMatrix(2), 0, PriorSpec::uniform(4)), InvalidArgument);
}
