#include "factorial/sensitivity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "factorial/errors.hpp"
#include "factorial/parallel.hpp"
#include "factorial/population.hpp"

namespace factorial {

namespace {

void check_gamma_value(double g) {
  if (!(g >= 0.0 && g < 1.0)) {
    throw InvalidArgument("association gamma must be in [0, 1), got " + std::to_string(g));
  }
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("cannot parse " + what + " '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw InvalidArgument("cannot parse " + what + " '" + text + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConditionalProbs conditional_probs(double pi_cond, double pi_target, double gamma) {
  check_gamma_value(gamma);
  if (!(pi_target >= 0.0 && pi_target <= 1.0)) throw InvalidArgument("marginal probability must be in [0, 1]");
  if (!(pi_cond >= 0.0 && pi_cond <= 1.0)) throw InvalidArgument("marginal probability must be in [0, 1]");
  if (pi_cond <= 0.0 || pi_cond >= 1.0) {
    throw DegenerateProbability("conditioning marginal probability must lie strictly inside (0, 1)");
  }
  ConditionalProbs out;
  out.given_one = (1.0 - gamma) * pi_target + gamma * std::min(1.0, pi_target / pi_cond);
  out.given_zero =
      (1.0 - gamma) * pi_target + gamma * std::max(pi_target - pi_cond, 0.0) / (1.0 - pi_cond);
  return out;
}

GammaStructure::GammaStructure(std::size_t arms, std::vector<double> values, std::optional<double> rho)
    : arms_(arms), values_(std::move(values)), rho_(rho) {}

GammaStructure GammaStructure::ar1(double rho, std::size_t arms) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("rho must be in [0, 1), got " + std::to_string(rho));
  if (arms < 2) throw InvalidArgument("association structure needs at least 2 arms");
  std::vector<double> values(arms * arms, 0.0);
  for (std::size_t j = 0; j < arms; ++j) {
    for (std::size_t k = 0; k < arms; ++k) {
      if (j == k) continue;
      const auto lag = static_cast<int>(j > k ? j - k : k - j);
      values[j * arms + k] = std::pow(rho, lag);
    }
  }
  return GammaStructure(arms, std::move(values), rho);
}

GammaStructure GammaStructure::custom(std::vector<std::vector<double>> matrix) {
  const std::size_t arms = matrix.size();
  if (arms < 2) throw InvalidArgument("association structure needs at least 2 arms");
  std::vector<double> values(arms * arms, 0.0);
  for (std::size_t j = 0; j < arms; ++j) {
    if (matrix[j].size() != arms) throw InvalidArgument("association matrix must be square");
    for (std::size_t k = 0; k < arms; ++k) {
      if (j == k) continue;
      check_gamma_value(matrix[j][k]);
      values[j * arms + k] = matrix[j][k];
    }
  }
  for (std::size_t j = 0; j < arms; ++j) {
    for (std::size_t k = j + 1; k < arms; ++k) {
      if (values[j * arms + k] != values[k * arms + j]) {
        throw InvalidArgument("association matrix must be symmetric");
      }
    }
  }
  return GammaStructure(arms, std::move(values), std::nullopt);
}

GammaStructure load_gamma_csv(const std::string& path, std::size_t arms) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open association matrix '" + path + "'", 0);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(parse_double(trim(cell), "matrix entry"));
      } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), line_no);
      }
    }
    if (row.size() != arms) {
      throw ParseError("expected " + std::to_string(arms) + " entries, got " + std::to_string(row.size()),
                       line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != arms) {
    throw ParseError("expected " + std::to_string(arms) + " rows, got " + std::to_string(rows.size()), 0);
  }
  return GammaStructure::custom(std::move(rows));
}

double draw_effect_sensitivity(const ObservedData& obs, const ModelMatrix& design, std::size_t l,
                               const MarginalProbs& marginals, const GammaStructure& gamma, Rng& rng) {
  const std::size_t arms = obs.arms();
  if (marginals.pi.size() != arms) throw InvalidArgument("need one marginal probability per arm");
  if (gamma.arms() != arms) throw InvalidArgument("association structure has the wrong number of arms");

  std::vector<double> pi(arms);
  for (std::size_t j = 0; j < arms; ++j) {
    pi[j] = std::clamp(marginals.pi[j], kMarginalClamp, 1.0 - kMarginalClamp);
  }

  const std::int64_t n = obs.units();
  std::int64_t contrast = 0;
  for (std::size_t j = 0; j < arms; ++j) {
    // Impute arm j's outcome for every unit observed in another arm, given
    // that unit's observed outcome.
    std::int64_t imputed = 0;
    for (std::size_t k = 0; k < arms; ++k) {
      if (k == j) continue;
      const ConditionalProbs c = conditional_probs(pi[k], pi[j], gamma(j, k));
      imputed += rng.binomial(obs.arm_successes(k), c.given_one);
      imputed += rng.binomial(obs.arm_size(k) - obs.arm_successes(k), c.given_zero);
    }
    contrast += design(j, l) * (obs.arm_successes(j) + imputed);
  }
  return std::ldexp(static_cast<double>(contrast) / static_cast<double>(n), -(obs.factors() - 1));
}

std::vector<double> posterior_draws_sensitivity(const ObservedData& obs, const ModelMatrix& design,
                                                std::size_t l, const PriorSpec& prior,
                                                const GammaStructure& gamma, std::size_t draws,
                                                Rng& rng) {
  check_compatible(obs, design);
  check_effect_index(design, l);
  prior.validate(obs.arms());
  std::vector<double> out(draws);
  for (auto& d : out) d = draw_effect_sensitivity(obs, design, l, draw_marginals(obs, prior, rng), gamma, rng);
  return out;
}

IntervalReport credible_interval_sensitivity(const ObservedData& obs, const ModelMatrix& design,
                                             std::size_t l, const PriorSpec& prior,
                                             const GammaStructure& gamma, std::size_t draws,
                                             double level, Rng& rng) {
  if (draws < kMinPosteriorDraws) {
    throw InvalidArgument("credible intervals need at least " + std::to_string(kMinPosteriorDraws) +
                          " draws");
  }
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("level must be in (0, 1)");
  auto samples = posterior_draws_sensitivity(obs, design, l, prior, gamma, draws, rng);
  IntervalReport r = summarize_draws(samples, l, level, Method::BayesSensitivity);
  r.rho = gamma.rho();
  return r;
}

std::vector<double> parse_rho_grid(const std::string& spec) {
  const std::string text = trim(spec);
  if (text.empty()) throw InvalidArgument("empty rho grid");
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trim(part));
    if (parts.size() != 3) throw InvalidArgument("rho range must look like start:stop:step");
    const double start = parse_double(parts[0], "rho start");
    const double stop = parse_double(parts[1], "rho stop");
    const double step = parse_double(parts[2], "rho step");
    if (!(step > 0.0)) throw InvalidArgument("rho step must be positive");
    if (stop < start) throw InvalidArgument("rho stop must not be below start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 100'000) throw InvalidArgument("rho grid has too many points");
    for (std::size_t i = 0; i < count; ++i) {
      // Round to 12 decimals so 0.01 steps give exact-looking values.
      const double v = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
      grid.push_back(v);
    }
  } else {
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) grid.push_back(parse_double(trim(part), "rho value"));
  }
  if (grid.empty()) throw InvalidArgument("empty rho grid");
  for (double v : grid) {
    if (!(v >= 0.0 && v < 1.0)) throw InvalidArgument("rho values must be in [0, 1), got " + std::to_string(v));
  }
  return grid;
}

std::vector<double> default_rho_grid() { return parse_rho_grid("0:0.99:0.01"); }

SweepResult sensitivity_sweep(const ObservedData& obs, const ModelMatrix& design, std::size_t l,
                              const PriorSpec& prior, const std::vector<double>& rho_grid,
                              std::size_t draws, double level, std::uint64_t seed,
                              std::size_t threads) {
  if (rho_grid.empty()) throw InvalidArgument("empty rho grid");
  check_compatible(obs, design);
  check_effect_index(design, l);
  prior.validate(obs.arms());
  std::vector<GammaStructure> structures;
  structures.reserve(rho_grid.size());
  for (double rho : rho_grid) structures.push_back(GammaStructure::ar1(rho, obs.arms()));

  SweepResult result;
  result.rows.resize(rho_grid.size());
  parallel_for(rho_grid.size(), threads, [&](std::size_t i) {
    Rng rng = Rng::substream(seed, {kSweepStream, i});
    IntervalReport r = credible_interval_sensitivity(obs, design, l, prior, structures[i], draws, level, rng);
    r.seed = seed;
    result.rows[i] = r;
  });
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    if (result.rows[i].width() > result.rows[result.widest].width()) result.widest = i;
  }
  return result;
}

}  // namespace factorial
