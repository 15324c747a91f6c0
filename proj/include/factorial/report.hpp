#pragma once

// Analysis orchestration and JSON/CSV serialization of reports.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "factorial/bayes.hpp"
#include "factorial/harness.hpp"
#include "factorial/neyman.hpp"
#include "factorial/sensitivity.hpp"

namespace factorial {

inline constexpr const char* kToolName = "factorial";
inline constexpr const char* kToolVersion = "0.1.0";

// Rounds to `digits` significant digits (decimal), as printed by %.*g.
double round_significant(double value, int digits = 6);

struct AnalysisInput {
  int factors = 0;
  std::vector<std::int64_t> arm_sizes;
  std::vector<std::int64_t> successes;
  std::optional<std::string> label;

  ObservedData observed() const { return ObservedData(factors, arm_sizes, successes); }
};

// {"K": 2, "n": [...], "n_obs": [...], "label": "..."}; validates fully.
AnalysisInput parse_analysis_json(const std::string& text);
// Rows "arm,size,successes" with arms 1..J, in any order; optional header.
AnalysisInput parse_analysis_csv(std::istream& in);
AnalysisInput load_analysis_input(const std::string& path, bool csv);

struct AnalysisOptions {
  std::vector<std::size_t> effects;  // empty = all effects 1..J-1
  std::optional<PriorSpec> prior;    // default uniform
  std::size_t draws = kDefaultPosteriorDraws;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> rho_grid;
  std::size_t sensitivity_draws = 50'000;
  std::size_t threads = 1;
};

struct EffectAnalysis {
  std::size_t effect = 0;
  std::string label;
  IntervalReport neyman;
  IntervalReport bayes;
  double closed_mean = 0.0;
  double closed_variance = 0.0;
  std::optional<SweepResult> sweep;
};

struct AnalysisReport {
  AnalysisInput input;
  std::uint64_t seed = 0;
  std::size_t draws = 0;
  double level = 0.95;
  PriorSpec prior;
  std::optional<std::vector<double>> rho_grid;
  std::size_t sensitivity_draws = 0;
  std::vector<EffectAnalysis> effects;
};

// Bayesian draws for effect l come from Rng::substream(seed, {kAnalysisStream, l}).
AnalysisReport analyze(const AnalysisInput& input, const AnalysisOptions& options);

inline constexpr std::uint64_t kAnalysisStream = 0x414e414cULL;

nlohmann::json interval_to_json(const IntervalReport& r);
IntervalReport interval_from_json(const nlohmann::json& j);

nlohmann::json analysis_to_json(const AnalysisReport& report);
AnalysisReport analysis_from_json(const nlohmann::json& j);

nlohmann::json sweep_summary_json(const AnalysisInput& input, const SweepResult& sweep, std::size_t effect,
                                  const PriorSpec& prior, std::size_t draws, double level,
                                  std::uint64_t seed);
// rho,lower,upper,width with full-precision numbers.
void write_sweep_csv(const SweepResult& sweep, std::ostream& out);

nlohmann::json study_summary_json(const StudyReport& report, std::size_t case_count);

}  // namespace factorial
