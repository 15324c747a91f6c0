#include "factorial/bayes.hpp"

#include <cmath>
#include <tuple>
#include <string>

#include "factorial/errors.hpp"
#include "factorial/population.hpp"
#include "factorial/stats.hpp"

namespace factorial {

PriorSpec PriorSpec::symmetric(std::size_t arms, double alpha, double beta) {
  PriorSpec prior{std::vector<double>(arms, alpha), std::vector<double>(arms, beta)};
  prior.validate(arms);
  return prior;
}

void PriorSpec::validate(std::size_t arms) const {
  if (alpha.size() != arms || beta.size() != arms) {
    throw InvalidArgument("prior needs " + std::to_string(arms) + " alpha and beta values");
  }
  for (std::size_t j = 0; j < arms; ++j) {
    if (!(alpha[j] > 0.0) || !(beta[j] > 0.0) || !std::isfinite(alpha[j]) || !std::isfinite(beta[j])) {
      throw InvalidArgument("prior hyperparameters must be finite and positive (arm " +
                            std::to_string(j + 1) + ")");
    }
  }
}

MarginalProbs draw_marginals(const ObservedData& obs, const PriorSpec& prior, Rng& rng) {
  prior.validate(obs.arms());
  MarginalProbs out{std::vector<double>(obs.arms())};
  for (std::size_t j = 0; j < obs.arms(); ++j) {
    const auto successes = static_cast<double>(obs.arm_successes(j));
    const auto failures = static_cast<double>(obs.arm_size(j) - obs.arm_successes(j));
    out.pi[j] = rng.beta(prior.alpha[j] + successes, prior.beta[j] + failures);
  }
  return out;
}

double draw_effect_indep(const ObservedData& obs, const ModelMatrix& design, std::size_t l,
                         const MarginalProbs& marginals, Rng& rng) {
  if (marginals.pi.size() != obs.arms()) throw InvalidArgument("need one marginal probability per arm");
  const std::int64_t n = obs.units();
  std::int64_t contrast = 0;
  for (std::size_t j = 0; j < obs.arms(); ++j) {
    const std::int64_t imputed = rng.binomial(n - obs.arm_size(j), marginals.pi[j]);
    contrast += design(j, l) * (obs.arm_successes(j) + imputed);
  }
  return std::ldexp(static_cast<double>(contrast) / static_cast<double>(n), -(obs.factors() - 1));
}

double posterior_mean_closed(const ObservedData& obs, const ModelMatrix& design, std::size_t l,
                             const PriorSpec& prior) {
  check_compatible(obs, design);
  check_effect_index(design, l);
  prior.validate(obs.arms());
  const auto n = static_cast<double>(obs.units());
  double sum = 0.0;
  for (std::size_t j = 0; j < obs.arms(); ++j) {
    const auto nj = static_cast<double>(obs.arm_size(j));
    const double n_prime = nj + prior.alpha[j] + prior.beta[j];
    const double p_prime = (static_cast<double>(obs.arm_successes(j)) + prior.alpha[j]) / n_prime;
    sum += design(j, l) * (static_cast<double>(obs.arm_successes(j)) + (n - nj) * p_prime);
  }
  return std::ldexp(sum / n, -(obs.factors() - 1));
}

double posterior_variance_closed(const ObservedData& obs, const PriorSpec& prior) {
  prior.validate(obs.arms());
  const auto n = static_cast<double>(obs.units());
  double sum = 0.0;
  for (std::size_t j = 0; j < obs.arms(); ++j) {
    const auto nj = static_cast<double>(obs.arm_size(j));
    const double n_prime = nj + prior.alpha[j] + prior.beta[j];
    const double p_prime = (static_cast<double>(obs.arm_successes(j)) + prior.alpha[j]) / n_prime;
    sum += (n - nj + n_prime) / n * (1.0 - nj / n) * p_prime * (1.0 - p_prime) / (n_prime + 1.0);
  }
  return std::ldexp(sum, -2 * (obs.factors() - 1));
}

double approx_posterior_variance(const ObservedData& obs) {
  const auto n = static_cast<double>(obs.units());
  double sum = 0.0;
  for (std::size_t j = 0; j < obs.arms(); ++j) {
    const auto nj = static_cast<double>(obs.arm_size(j));
    const double p = obs.arm_rate(j);
    sum += (1.0 - nj / n) * p * (1.0 - p) / (nj - 1.0);
  }
  return std::ldexp(sum, -2 * (obs.factors() - 1));
}

std::vector<double> posterior_draws_indep(const ObservedData& obs, const ModelMatrix& design,
                                          std::size_t l, const PriorSpec& prior,
                                          std::size_t draws, Rng& rng) {
  check_compatible(obs, design);
  check_effect_index(design, l);
  prior.validate(obs.arms());
  std::vector<double> out(draws);
  for (auto& d : out) d = draw_effect_indep(obs, design, l, draw_marginals(obs, prior, rng), rng);
  return out;
}

IntervalReport summarize_draws(std::vector<double>& draws, std::size_t l, double level, Method method) {
  IntervalReport r;
  r.effect = l;
  r.level = level;
  r.method = method;
  r.mc_draws = draws.size();
  const Moments m = sample_moments(draws);
  r.point = m.mean;
  r.variance = m.variance;
  std::tie(r.lower, r.upper) = equal_tailed_interval(draws, level);
  return r;
}

IntervalReport credible_interval_indep(const ObservedData& obs, const ModelMatrix& design,
                                       std::size_t l, const PriorSpec& prior,
                                       std::size_t draws, double level, Rng& rng) {
  if (draws < kMinPosteriorDraws) {
    throw InvalidArgument("credible intervals need at least " + std::to_string(kMinPosteriorDraws) +
                          " draws");
  }
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("level must be in (0, 1)");
  auto samples = posterior_draws_indep(obs, design, l, prior, draws, rng);
  return summarize_draws(samples, l, level, Method::BayesIndep);
}

}  // namespace factorial
