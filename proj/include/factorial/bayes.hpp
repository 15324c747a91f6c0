#pragma once

// Finite-population Bayesian inference under independent potential outcomes.
//
// Each arm's success probability pi_j has a Beta(alpha_j, beta_j) prior.
// A posterior-predictive draw of the finite-population effect is composed of
// (1) pi_j ~ Beta(alpha_j + n_j^obs, beta_j + n_j - n_j^obs), then
// (2) B_j ~ Binomial(N - n_j, pi_j), the imputed successes among the units
//     not assigned to arm j, and
// (3) tau_l = 2^-(K-1) N^-1 sum_j h_lj (n_j^obs + B_j).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "factorial/assignment.hpp"
#include "factorial/design.hpp"
#include "factorial/neyman.hpp"
#include "factorial/random.hpp"

namespace factorial {

struct PriorSpec {
  std::vector<double> alpha;
  std::vector<double> beta;

  static PriorSpec uniform(std::size_t arms) { return symmetric(arms, 1.0, 1.0); }
  static PriorSpec symmetric(std::size_t arms, double alpha, double beta);

  // Throws InvalidArgument unless both vectors have `arms` strictly positive entries.
  void validate(std::size_t arms) const;
};

struct MarginalProbs {
  std::vector<double> pi;
};

inline constexpr std::size_t kDefaultPosteriorDraws = 200'000;
inline constexpr std::size_t kMinPosteriorDraws = 1000;

MarginalProbs draw_marginals(const ObservedData& obs, const PriorSpec& prior, Rng& rng);

double draw_effect_indep(const ObservedData& obs, const ModelMatrix& design, std::size_t l,
                         const MarginalProbs& marginals, Rng& rng);

// Closed-form posterior-predictive mean of tau_l.
double posterior_mean_closed(const ObservedData& obs, const ModelMatrix& design, std::size_t l,
                             const PriorSpec& prior);

// Closed-form posterior-predictive variance of tau_l (the same for every l).
double posterior_variance_closed(const ObservedData& obs, const PriorSpec& prior);

// Large-sample form of the posterior variance:
// 2^-2(K-1) sum_j (1 - n_j/N) p-hat_j (1 - p-hat_j) / (n_j - 1).
double approx_posterior_variance(const ObservedData& obs);

// `draws` composed posterior-predictive draws of tau_l.
std::vector<double> posterior_draws_indep(const ObservedData& obs, const ModelMatrix& design,
                                          std::size_t l, const PriorSpec& prior,
                                          std::size_t draws, Rng& rng);

// Equal-tailed interval of the composed draws. point and variance are the
// Monte Carlo mean and variance of the draws. Requires draws >= kMinPosteriorDraws.
IntervalReport credible_interval_indep(const ObservedData& obs, const ModelMatrix& design,
                                       std::size_t l, const PriorSpec& prior,
                                       std::size_t draws, double level, Rng& rng);

// Summarizes a draw set into an interval report; reorders `draws`.
IntervalReport summarize_draws(std::vector<double>& draws, std::size_t l, double level, Method method);

}  // namespace factorial
