#pragma once

// Sensitivity analysis over the dependence between a unit's potential
// outcomes.
//
// Pairwise dependence follows the joint model
//   Pr{Y(z_j) = 1, Y(z_j') = 1} = (1 - g) pi_j pi_j' + g min(pi_j, pi_j'),
// with g = gamma_jj' in [0, 1). Missing outcomes are imputed conditionally on
// each unit's single observed outcome, and the finite-population effect is
// recomputed from the imputed totals. Sweeping the AR(1) base rho traces how
// the credible interval moves as the unidentified association changes.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "factorial/bayes.hpp"

namespace factorial {

struct ConditionalProbs {
  double given_one = 0.0;   // Pr{Y(z_target) = 1 | Y(z_cond) = 1}
  double given_zero = 0.0;  // Pr{Y(z_target) = 1 | Y(z_cond) = 0}
};

// Conditional probabilities of the target arm's outcome given the
// conditioning arm's outcome. Throws DegenerateProbability if pi_cond is 0 or
// 1, InvalidArgument for out-of-range inputs.
ConditionalProbs conditional_probs(double pi_cond, double pi_target, double gamma);

// Drawn marginals closer than this to 0 or 1 are clamped before
// conditional_probs.
inline constexpr double kMarginalClamp = 1e-12;

class GammaStructure {
 public:
  // gamma_jj' = rho^|j - j'|. Throws InvalidArgument unless rho in [0, 1).
  static GammaStructure ar1(double rho, std::size_t arms);
  // Square symmetric matrix with off-diagonal entries in [0, 1); the
  // diagonal is ignored.
  static GammaStructure custom(std::vector<std::vector<double>> matrix);

  std::size_t arms() const noexcept { return arms_; }
  double operator()(std::size_t j, std::size_t other) const { return values_[j * arms_ + other]; }
  const std::optional<double>& rho() const noexcept { return rho_; }

 private:
  GammaStructure(std::size_t arms, std::vector<double> values, std::optional<double> rho);

  std::size_t arms_;
  std::vector<double> values_;
  std::optional<double> rho_;
};

// Reads a J x J comma-separated matrix.
GammaStructure load_gamma_csv(const std::string& path, std::size_t arms);

// One posterior-predictive draw of tau_l under the given association
// structure, for fixed marginals.
double draw_effect_sensitivity(const ObservedData& obs, const ModelMatrix& design, std::size_t l,
                               const MarginalProbs& marginals, const GammaStructure& gamma, Rng& rng);

std::vector<double> posterior_draws_sensitivity(const ObservedData& obs, const ModelMatrix& design,
                                                std::size_t l, const PriorSpec& prior,
                                                const GammaStructure& gamma, std::size_t draws,
                                                Rng& rng);

IntervalReport credible_interval_sensitivity(const ObservedData& obs, const ModelMatrix& design,
                                             std::size_t l, const PriorSpec& prior,
                                             const GammaStructure& gamma, std::size_t draws,
                                             double level, Rng& rng);

// "a:b:step", "a,b,c" or a single value; every value must lie in [0, 1).
std::vector<double> parse_rho_grid(const std::string& spec);
std::vector<double> default_rho_grid();  // 0.00, 0.01, ..., 0.99

struct SweepResult {
  std::vector<IntervalReport> rows;  // one per grid value, in grid order
  std::size_t widest = 0;            // index of the widest interval (first on ties)

  const IntervalReport& conservative() const { return rows.at(widest); }
};

// Runs credible_interval_sensitivity under AR(1) for each rho. Grid point i
// draws from Rng::substream(seed, {kSweepStream, i}), so results do not depend
// on `threads`.
SweepResult sensitivity_sweep(const ObservedData& obs, const ModelMatrix& design, std::size_t l,
                              const PriorSpec& prior, const std::vector<double>& rho_grid,
                              std::size_t draws, double level, std::uint64_t seed,
                              std::size_t threads = 1);

inline constexpr std::uint64_t kSweepStream = 0x5357454550ULL;

}  // namespace factorial
