#include "factorial/neyman.hpp"

#include <cmath>

#include "factorial/errors.hpp"
#include "factorial/population.hpp"
#include "factorial/stats.hpp"

namespace factorial {

std::string to_string(Method method) {
  switch (method) {
    case Method::Neyman:
      return "neyman";
    case Method::BayesIndep:
      return "bayes-indep";
    case Method::BayesSensitivity:
      return "bayes-sensitivity";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "neyman") return Method::Neyman;
  if (name == "bayes-indep") return Method::BayesIndep;
  if (name == "bayes-sensitivity") return Method::BayesSensitivity;
  throw InvalidArgument("unknown method '" + name + "'");
}

void check_compatible(const ObservedData& obs, const ModelMatrix& design) {
  if (obs.factors() != design.factors()) {
    throw InvalidArgument("observed data has K=" + std::to_string(obs.factors()) +
                          " but design has K=" + std::to_string(design.factors()));
  }
}

double point_estimate(const ObservedData& obs, const ModelMatrix& design, std::size_t l) {
  check_compatible(obs, design);
  check_effect_index(design, l);
  double sum = 0.0;
  for (std::size_t j = 0; j < obs.arms(); ++j) sum += design(j, l) * obs.arm_rate(j);
  return std::ldexp(sum, -(obs.factors() - 1));
}

double variance_estimate(const ObservedData& obs) {
  double sum = 0.0;
  for (std::size_t j = 0; j < obs.arms(); ++j) {
    const double p = obs.arm_rate(j);
    sum += p * (1.0 - p) / static_cast<double>(obs.arm_size(j) - 1);
  }
  return std::ldexp(sum, -2 * (obs.factors() - 1));
}

IntervalReport confidence_interval(const ObservedData& obs, const ModelMatrix& design,
                                   std::size_t l, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("level must be in (0, 1)");
  IntervalReport r;
  r.effect = l;
  r.level = level;
  r.method = Method::Neyman;
  r.point = point_estimate(obs, design, l);
  r.variance = variance_estimate(obs);
  const double half = normal_quantile((1.0 + level) / 2.0) * std::sqrt(r.variance);
  r.lower = r.point - half;
  r.upper = r.point + half;
  return r;
}

}  // namespace factorial
