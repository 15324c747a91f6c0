#pragma once

// Coverage simulation harness for 2^2 designs described by cell counts.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "factorial/bayes.hpp"
#include "factorial/neyman.hpp"
#include "factorial/population.hpp"
#include "factorial/random.hpp"

namespace factorial {

struct SimulationCase {
  std::size_t id = 0;
  CellCounts cells;
  std::vector<double> effects;  // effects[l - 1] is the true tau_l

  double effect(std::size_t l) const { return effects.at(l - 1); }
  std::int64_t units() const { return cells.total(); }
};

// Builds a case for K = 2 and computes its true effects.
SimulationCase make_case(std::size_t id, std::vector<std::int64_t> counts);

// Each case: cells iid Unif(0,1) weights, normalized, then one
// Multinomial(units, weights) draw. Ids are 1..n_cases.
std::vector<SimulationCase> generate_cases(std::size_t n_cases, std::int64_t units, std::size_t cells,
                                           Rng& rng);

// One case per non-blank line, 16 comma-separated nonnegative integers. An
// optional header line (containing letters) is skipped. When expected_total is
// set every row must sum to it; otherwise every row must match the first.
// Throws ParseError carrying the offending line number.
std::vector<SimulationCase> load_fixture_cases(const std::string& path,
                                               std::optional<std::int64_t> expected_total = std::nullopt);
std::vector<SimulationCase> parse_fixture_cases(std::istream& in,
                                                std::optional<std::int64_t> expected_total = std::nullopt);

// Writes cases in the fixture format with a header row.
void write_cases_csv(const std::vector<SimulationCase>& cases, std::ostream& out);

struct CoverageReport {
  std::size_t case_id = 0;
  Method method = Method::Neyman;
  std::size_t replications = 0;
  std::size_t covered = 0;
  double coverage = 0.0;
  double mean_width = 0.0;
};

struct CoverageSettings {
  std::vector<std::int64_t> arms;
  std::size_t effect = 1;
  std::size_t replications = 500;
  double level = 0.95;
  std::vector<Method> methods{Method::Neyman, Method::BayesIndep};
  std::size_t draws_per_rep = 2000;
  PriorSpec prior = PriorSpec::uniform(4);
  std::uint64_t seed = 0;
};

// Replication r of case c draws everything from
// Rng::substream(seed, {kCoverageStream, c.id, r}); results do not depend on
// `threads`. One report per requested method, in request order.
std::vector<CoverageReport> coverage_experiment(const SimulationCase& simulation_case,
                                                const CoverageSettings& settings,
                                                std::size_t threads = 1);

inline constexpr std::uint64_t kCoverageStream = 0x434f56455241ULL;

struct CaseGenerator {
  std::size_t count = 100;
  std::int64_t units = 800;
  std::uint64_t seed = 0;
};

struct StudyConfig {
  std::optional<std::string> cases_path;  // fixture file
  std::optional<CaseGenerator> generator; // used when no path is given
  CoverageSettings coverage;
  double over_threshold = 0.96;
  double under_threshold = 0.94;
};

// Parses the study config JSON; relative case paths resolve against base_dir.
StudyConfig parse_study_config(const std::string& json_text, const std::string& base_dir);
StudyConfig load_study_config(const std::string& path);

struct MethodSummary {
  Method method = Method::Neyman;
  std::size_t cases = 0;
  double fraction_over = 0.0;   // share of cases with coverage > over_threshold
  double fraction_under = 0.0;  // share of cases with coverage < under_threshold
  double mean_coverage = 0.0;
  double mean_width = 0.0;
};

struct StudyReport {
  StudyConfig config;
  std::vector<CoverageReport> rows;  // case order, then method order
  std::vector<MethodSummary> summary;
};

std::vector<SimulationCase> study_cases(const StudyConfig& config);
StudyReport run_study(const StudyConfig& config, std::size_t threads = 1);
StudyReport run_study(const StudyConfig& config, const std::vector<SimulationCase>& cases,
                      std::size_t threads = 1);

// case_id,method,coverage,mean_width with full-precision numbers.
void write_coverage_csv(const StudyReport& report, std::ostream& out);

}  // namespace factorial
