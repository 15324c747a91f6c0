#include "factorial/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "factorial/errors.hpp"
#include "factorial/parallel.hpp"

namespace factorial {

namespace {

constexpr int kStudyFactors = 2;
constexpr std::size_t kStudyCells = 16;

struct MethodOutcome {
  bool covered = false;
  double width = 0.0;
};

// One randomization replication: draw an assignment, observe, and build each
// requested interval.
std::vector<MethodOutcome> replicate(const PotentialTable& table, const ModelMatrix& design,
                                     double truth, std::size_t case_id, std::size_t rep,
                                     const CoverageSettings& s) {
  Rng rng = Rng::substream(s.seed, {kCoverageStream, case_id, rep});
  const Assignment a = draw_assignment(s.arms, table.units(), rng);
  const ObservedData obs = observe(table, a);
  std::vector<MethodOutcome> out;
  out.reserve(s.methods.size());
  for (Method m : s.methods) {
    IntervalReport r;
    switch (m) {
      case Method::Neyman:
        r = confidence_interval(obs, design, s.effect, s.level);
        break;
      case Method::BayesIndep:
        r = credible_interval_indep(obs, design, s.effect, s.prior, s.draws_per_rep, s.level, rng);
        break;
      case Method::BayesSensitivity:
        throw InvalidArgument("coverage studies support the neyman and bayes-indep methods");
    }
    out.push_back({r.contains(truth), r.width()});
  }
  return out;
}

void validate_settings(const CoverageSettings& s, std::int64_t units) {
  if (s.replications < 1) throw InvalidArgument("replications must be at least 1");
  if (s.methods.empty()) throw InvalidArgument("no methods requested");
  if (s.arms.size() != (std::size_t{1} << kStudyFactors)) {
    throw InvalidArgument("coverage studies need 4 arm sizes");
  }
  std::int64_t total = 0;
  for (auto nj : s.arms) total += nj;
  if (total != units) {
    throw InvalidArgument("arm sizes sum to " + std::to_string(total) + " but the case has " +
                          std::to_string(units) + " units");
  }
  if (s.effect < 1 || s.effect >= s.arms.size()) throw InvalidArgument("effect index out of range");
  if (!(s.level > 0.0 && s.level < 1.0)) throw InvalidArgument("level must be in (0, 1)");
  for (std::size_t i = 0; i < s.methods.size(); ++i) {
    const Method m = s.methods[i];
    if (std::find(s.methods.begin(), s.methods.begin() + static_cast<std::ptrdiff_t>(i), m) !=
        s.methods.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw InvalidArgument("method '" + to_string(m) + "' requested twice");
    }
    if (m == Method::BayesSensitivity) {
      throw InvalidArgument("coverage studies support the neyman and bayes-indep methods");
    }
    if (m == Method::BayesIndep && s.draws_per_rep < kMinPosteriorDraws) {
      throw InvalidArgument("draws_per_rep must be at least " + std::to_string(kMinPosteriorDraws));
    }
  }
  s.prior.validate(s.arms.size());
}

std::vector<CoverageReport> reduce(std::size_t case_id, const CoverageSettings& s,
                                   const std::vector<std::vector<MethodOutcome>>& reps) {
  std::vector<CoverageReport> out;
  for (std::size_t m = 0; m < s.methods.size(); ++m) {
    CoverageReport r;
    r.case_id = case_id;
    r.method = s.methods[m];
    r.replications = reps.size();
    double width_sum = 0.0;
    for (const auto& rep : reps) {
      r.covered += rep[m].covered ? 1 : 0;
      width_sum += rep[m].width;
    }
    r.coverage = static_cast<double>(r.covered) / static_cast<double>(r.replications);
    r.mean_width = width_sum / static_cast<double>(r.replications);
    out.push_back(r);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> hyperparameters(const nlohmann::json& v, const char* name) {
  if (v.is_number()) return std::vector<double>(4, v.get<double>());
  if (v.is_array()) return v.get<std::vector<double>>();
  throw InvalidArgument(std::string("prior.") + name + " must be a number or an array");
}

}  // namespace

SimulationCase make_case(std::size_t id, std::vector<std::int64_t> counts) {
  SimulationCase c;
  c.id = id;
  c.cells = CellCounts{kStudyFactors, std::move(counts)};
  const PotentialTable table = from_cell_counts(c.cells);
  c.effects = estimands(table, ModelMatrix(kStudyFactors)).tau;
  return c;
}

std::vector<SimulationCase> generate_cases(std::size_t n_cases, std::int64_t units, std::size_t cells,
                                           Rng& rng) {
  if (units < 1) throw InvalidArgument("population size must be at least 1");
  if (cells != kStudyCells) throw InvalidArgument("case generation supports 16 cells (K = 2)");
  std::vector<SimulationCase> out;
  out.reserve(n_cases);
  std::vector<double> weights(cells);
  for (std::size_t i = 0; i < n_cases; ++i) {
    double total = 0.0;
    for (auto& w : weights) {
      w = rng.uniform();
      total += w;
    }
    for (auto& w : weights) w /= total;
    out.push_back(make_case(i + 1, rng.multinomial(units, weights)));
  }
  return out;
}

std::vector<SimulationCase> parse_fixture_cases(std::istream& in, std::optional<std::int64_t> expected_total) {
  std::vector<SimulationCase> out;
  std::string line;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (!seen_content) {
      seen_content = true;
      if (std::any_of(text.begin(), text.end(), [](unsigned char ch) { return std::isalpha(ch); })) continue;
    }
    std::vector<std::int64_t> counts;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const std::string t = trim(cell);
      if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
        throw ParseError("cell '" + t + "' is not a nonnegative integer", line_no);
      }
      try {
        counts.push_back(std::stoll(t));
      } catch (const std::exception&) {
        throw ParseError("cell '" + t + "' is out of range", line_no);
      }
    }
    if (counts.size() != kStudyCells) {
      throw ParseError("expected 16 cell counts, got " + std::to_string(counts.size()), line_no);
    }
    std::int64_t sum = 0;
    for (auto c : counts) sum += c;
    if (!expected_total && !out.empty()) expected_total = out.front().units();
    if (expected_total && sum != *expected_total) {
      throw ParseError("row sums to " + std::to_string(sum) + ", expected " + std::to_string(*expected_total),
                       line_no);
    }
    if (sum <= 0) throw ParseError("row sums to zero", line_no);
    out.push_back(make_case(out.size() + 1, std::move(counts)));
  }
  if (out.empty()) throw ParseError("no cases found", 0);
  return out;
}

std::vector<SimulationCase> load_fixture_cases(const std::string& path, std::optional<std::int64_t> expected_total) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file '" + path + "'", 0);
  return parse_fixture_cases(in, expected_total);
}

void write_cases_csv(const std::vector<SimulationCase>& cases, std::ostream& out) {
  for (std::size_t w = 0; w < kStudyCells; ++w) {
    out << (w ? "," : "") << 'd';
    for (int bit = 3; bit >= 0; --bit) out << ((w >> bit) & 1U);
  }
  out << '\n';
  for (const auto& c : cases) {
    for (std::size_t w = 0; w < c.cells.counts.size(); ++w) out << (w ? "," : "") << c.cells.counts[w];
    out << '\n';
  }
}

std::vector<CoverageReport> coverage_experiment(const SimulationCase& simulation_case,
                                                const CoverageSettings& settings, std::size_t threads) {
  validate_settings(settings, simulation_case.units());
  const PotentialTable table = from_cell_counts(simulation_case.cells);
  const ModelMatrix design(kStudyFactors);
  const double truth = simulation_case.effect(settings.effect);
  std::vector<std::vector<MethodOutcome>> reps(settings.replications);
  parallel_for(settings.replications, threads, [&](std::size_t r) {
    reps[r] = replicate(table, design, truth, simulation_case.id, r, settings);
  });
  return reduce(simulation_case.id, settings, reps);
}

StudyConfig parse_study_config(const std::string& json_text, const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("study config is not valid JSON: ") + e.what(), 0);
  }
  if (!j.is_object()) throw InvalidArgument("study config must be a JSON object");
  static const std::set<std::string> known{"cases", "arms", "effect", "replications", "level", "methods",
                                           "seed", "draws_per_rep", "prior", "thresholds"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw InvalidArgument("unknown study config key '" + key + "'");
  }

  StudyConfig c;
  try {
    if (!j.contains("cases")) throw InvalidArgument("study config needs 'cases'");
    const auto& cases = j.at("cases");
    if (cases.is_string()) {
      std::filesystem::path p(cases.get<std::string>());
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      c.cases_path = p.string();
    } else if (cases.is_object() && cases.contains("generate")) {
      const auto& g = cases.at("generate");
      CaseGenerator gen;
      gen.count = g.value("count", gen.count);
      gen.units = g.value("units", gen.units);
      gen.seed = g.value("seed", gen.seed);
      if (gen.count < 1) throw InvalidArgument("generator count must be at least 1");
      if (gen.units < 1) throw InvalidArgument("generator units must be at least 1");
      c.generator = gen;
    } else {
      throw InvalidArgument("'cases' must be a path or {\"generate\": {...}}");
    }

    if (!j.contains("arms")) throw InvalidArgument("study config needs 'arms'");
    c.coverage.arms = j.at("arms").get<std::vector<std::int64_t>>();
    c.coverage.effect = j.value("effect", c.coverage.effect);
    c.coverage.replications = j.value("replications", c.coverage.replications);
    c.coverage.level = j.value("level", c.coverage.level);
    c.coverage.seed = j.value("seed", c.coverage.seed);
    c.coverage.draws_per_rep = j.value("draws_per_rep", c.coverage.draws_per_rep);
    if (j.contains("methods")) {
      c.coverage.methods.clear();
      for (const auto& m : j.at("methods")) c.coverage.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("prior")) {
      const auto& p = j.at("prior");
      c.coverage.prior.alpha = hyperparameters(p.value("alpha", nlohmann::json(1.0)), "alpha");
      c.coverage.prior.beta = hyperparameters(p.value("beta", nlohmann::json(1.0)), "beta");
    }
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      c.over_threshold = t.value("over", c.over_threshold);
      c.under_threshold = t.value("under", c.under_threshold);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("study config has a field of the wrong type: ") + e.what());
  }
  if (c.coverage.replications < 1) throw InvalidArgument("replications must be at least 1");
  if (!(c.coverage.level > 0.0 && c.coverage.level < 1.0)) throw InvalidArgument("level must be in (0, 1)");
  if (c.coverage.methods.empty()) throw InvalidArgument("no methods requested");
  return c;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open study config '" + path + "'", 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_study_config(buffer.str(), std::filesystem::path(path).parent_path().string());
}

std::vector<SimulationCase> study_cases(const StudyConfig& config) {
  if (config.cases_path) return load_fixture_cases(*config.cases_path);
  if (config.generator) {
    Rng rng(config.generator->seed);
    return generate_cases(config.generator->count, config.generator->units, kStudyCells, rng);
  }
  throw InvalidArgument("study config names no cases");
}

StudyReport run_study(const StudyConfig& config, std::size_t threads) {
  return run_study(config, study_cases(config), threads);
}

StudyReport run_study(const StudyConfig& config, const std::vector<SimulationCase>& cases,
                      std::size_t threads) {
  const CoverageSettings& s = config.coverage;
  if (cases.empty()) throw InvalidArgument("study has no cases");
  for (const auto& c : cases) validate_settings(s, c.units());

  const ModelMatrix design(kStudyFactors);
  std::vector<PotentialTable> tables;
  tables.reserve(cases.size());
  for (const auto& c : cases) tables.push_back(from_cell_counts(c.cells));

  const std::size_t reps = s.replications;
  std::vector<std::vector<std::vector<MethodOutcome>>> outcomes(
      cases.size(), std::vector<std::vector<MethodOutcome>>(reps));
  parallel_for(cases.size() * reps, threads, [&](std::size_t item) {
    const std::size_t ci = item / reps;
    const std::size_t r = item % reps;
    outcomes[ci][r] = replicate(tables[ci], design, cases[ci].effect(s.effect), cases[ci].id, r, s);
  });

  StudyReport report;
  report.config = config;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    for (auto& row : reduce(cases[ci].id, s, outcomes[ci])) report.rows.push_back(row);
  }
  for (std::size_t m = 0; m < s.methods.size(); ++m) {
    MethodSummary sum;
    sum.method = s.methods[m];
    std::size_t over = 0, under = 0;
    for (const auto& row : report.rows) {
      if (row.method != sum.method) continue;
      ++sum.cases;
      over += row.coverage > config.over_threshold ? 1 : 0;
      under += row.coverage < config.under_threshold ? 1 : 0;
      sum.mean_coverage += row.coverage;
      sum.mean_width += row.mean_width;
    }
    const auto n = static_cast<double>(sum.cases);
    sum.fraction_over = static_cast<double>(over) / n;
    sum.fraction_under = static_cast<double>(under) / n;
    sum.mean_coverage /= n;
    sum.mean_width /= n;
    report.summary.push_back(sum);
  }
  return report;
}

void write_coverage_csv(const StudyReport& report, std::ostream& out) {
  out << "case_id,method,coverage,mean_width\n";
  char buf[64];
  for (const auto& row : report.rows) {
    out << row.case_id << ',' << to_string(row.method) << ',';
    std::snprintf(buf, sizeof buf, "%.17g", row.coverage);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", row.mean_width);
    out << buf << '\n';
  }
}

}  // namespace factorial
