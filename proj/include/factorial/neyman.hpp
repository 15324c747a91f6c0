#pragma once

// Randomization-based (Neymanian) inference for factorial effects.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "factorial/assignment.hpp"
#include "factorial/design.hpp"

namespace factorial {

enum class Method { Neyman, BayesIndep, BayesSensitivity };

std::string to_string(Method method);
// Accepts "neyman", "bayes-indep", "bayes-sensitivity".
Method parse_method(const std::string& name);

struct IntervalReport {
  std::size_t effect = 0;
  double point = 0.0;
  double variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  Method method = Method::Neyman;
  std::optional<std::size_t> mc_draws;
  std::optional<std::uint64_t> seed;
  std::optional<double> rho;

  double width() const { return upper - lower; }
  bool contains(double value) const { return lower <= value && value <= upper; }
};

// 2^-(K-1) h_l' p-hat.
double point_estimate(const ObservedData& obs, const ModelMatrix& design, std::size_t l);

// 2^-2(K-1) sum_j p-hat_j (1 - p-hat_j) / (n_j - 1). The same for every l.
double variance_estimate(const ObservedData& obs);

// point +/- z_{(1+level)/2} sqrt(variance_estimate).
IntervalReport confidence_interval(const ObservedData& obs, const ModelMatrix& design,
                                   std::size_t l, double level);

// Throws unless obs and design describe the same K.
void check_compatible(const ObservedData& obs, const ModelMatrix& design);

}  // namespace factorial
