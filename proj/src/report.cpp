#include "factorial/report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "factorial/errors.hpp"
#include "factorial/parallel.hpp"

namespace factorial {

using nlohmann::json;

namespace {

json tool_json() {
  return {{"name", kToolName}, {"version", kToolVersion}, {"rng", kRngAlgorithm}};
}

json rounded(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(round_significant(v));
  return out;
}

json input_json(const AnalysisInput& in) {
  json j = {{"K", in.factors}, {"n", in.arm_sizes}, {"n_obs", in.successes}};
  if (in.label) j["label"] = *in.label;
  return j;
}

AnalysisInput input_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("input must be a JSON object");
  for (const char* key : {"K", "n", "n_obs"}) {
    if (!j.contains(key)) throw InvalidArgument(std::string("input is missing field '") + key + "'");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "K" && key != "n" && key != "n_obs" && key != "label") {
      throw InvalidArgument("input has unknown field '" + key + "'");
    }
  }
  AnalysisInput in;
  try {
    in.factors = j.at("K").get<int>();
    in.arm_sizes = j.at("n").get<std::vector<std::int64_t>>();
    in.successes = j.at("n_obs").get<std::vector<std::int64_t>>();
    if (j.contains("label")) in.label = j.at("label").get<std::string>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("input field has the wrong type: ") + e.what());
  }
  in.observed();  // validates
  return in;
}

json prior_json(const PriorSpec& p) {
  return {{"alpha", rounded(p.alpha)}, {"beta", rounded(p.beta)}};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

AnalysisInput parse_analysis_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("input is not valid JSON: ") + e.what(), 0);
  }
  return input_from_json(j);
}

AnalysisInput parse_analysis_csv(std::istream& in) {
  std::vector<std::pair<std::int64_t, std::int64_t>> rows;
  std::vector<std::int64_t> arm_ids;
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
    std::vector<std::int64_t> fields;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const std::string t = trim(cell);
      if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
        throw ParseError("field '" + t + "' is not a nonnegative integer", line_no);
      }
      try {
        fields.push_back(std::stoll(t));
      } catch (const std::exception&) {
        throw ParseError("field '" + t + "' is out of range", line_no);
      }
    }
    if (fields.size() != 3) throw ParseError("expected arm,size,successes", line_no);
    arm_ids.push_back(fields[0]);
    rows.emplace_back(fields[1], fields[2]);
  }
  const std::size_t arms = rows.size();
  int factors = 0;
  while ((std::size_t{1} << factors) < arms) ++factors;
  if (arms < 2 || (std::size_t{1} << factors) != arms) {
    throw ParseError("number of arms must be a power of two >= 2, got " + std::to_string(arms), 0);
  }
  AnalysisInput out;
  out.factors = factors;
  out.arm_sizes.assign(arms, -1);
  out.successes.assign(arms, -1);
  for (std::size_t r = 0; r < arms; ++r) {
    const std::int64_t id = arm_ids[r];
    if (id < 1 || id > static_cast<std::int64_t>(arms)) {
      throw ParseError("arm id " + std::to_string(id) + " out of range", 0);
    }
    const auto j = static_cast<std::size_t>(id - 1);
    if (out.arm_sizes[j] != -1) throw ParseError("arm " + std::to_string(id) + " listed twice", 0);
    out.arm_sizes[j] = rows[r].first;
    out.successes[j] = rows[r].second;
  }
  out.observed();
  return out;
}

AnalysisInput load_analysis_input(const std::string& path, bool csv) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input '" + path + "'", 0);
  if (csv) return parse_analysis_csv(in);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_analysis_json(buffer.str());
}

AnalysisReport analyze(const AnalysisInput& input, const AnalysisOptions& options) {
  const ObservedData obs = input.observed();
  const ModelMatrix design(input.factors);

  AnalysisReport report;
  report.input = input;
  report.seed = options.seed;
  report.draws = options.draws;
  report.level = options.level;
  report.prior = options.prior.value_or(PriorSpec::uniform(obs.arms()));
  report.prior.validate(obs.arms());
  report.rho_grid = options.rho_grid;
  report.sensitivity_draws = options.rho_grid ? options.sensitivity_draws : 0;

  std::vector<std::size_t> effects = options.effects;
  if (effects.empty()) {
    for (std::size_t l = 1; l < design.size(); ++l) effects.push_back(l);
  }
  for (auto l : effects) check_effect_index(design, l);

  report.effects.resize(effects.size());
  // Each effect has its own substream, so the fan-out order is irrelevant.
  parallel_for(effects.size(), options.threads, [&](std::size_t i) {
    const std::size_t l = effects[i];
    EffectAnalysis& e = report.effects[i];
    e.effect = l;
    e.label = design.label(l);
    e.neyman = confidence_interval(obs, design, l, options.level);
    Rng rng = Rng::substream(options.seed, {kAnalysisStream, l});
    e.bayes = credible_interval_indep(obs, design, l, report.prior, options.draws, options.level, rng);
    e.bayes.seed = options.seed;
    e.closed_mean = posterior_mean_closed(obs, design, l, report.prior);
    e.closed_variance = posterior_variance_closed(obs, report.prior);
  });
  if (options.rho_grid) {
    for (auto& e : report.effects) {
      e.sweep = sensitivity_sweep(obs, design, e.effect, report.prior, *options.rho_grid,
                                  options.sensitivity_draws, options.level, options.seed, options.threads);
    }
  }
  return report;
}

json interval_to_json(const IntervalReport& r) {
  json j = {{"method", to_string(r.method)},
            {"effect", r.effect},
            {"point", round_significant(r.point)},
            {"variance", round_significant(r.variance)},
            {"lower", round_significant(r.lower)},
            {"upper", round_significant(r.upper)},
            {"width", round_significant(round_significant(r.upper) - round_significant(r.lower))},
            {"level", round_significant(r.level)}};
  if (r.mc_draws) j["mc_draws"] = *r.mc_draws;
  if (r.seed) j["seed"] = *r.seed;
  if (r.rho) j["rho"] = round_significant(*r.rho);
  return j;
}

IntervalReport interval_from_json(const json& j) {
  IntervalReport r;
  r.method = parse_method(j.at("method").get<std::string>());
  r.effect = j.at("effect").get<std::size_t>();
  r.point = j.at("point").get<double>();
  r.variance = j.at("variance").get<double>();
  r.lower = j.at("lower").get<double>();
  r.upper = j.at("upper").get<double>();
  r.level = j.at("level").get<double>();
  if (j.contains("mc_draws")) r.mc_draws = j.at("mc_draws").get<std::size_t>();
  if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("rho")) r.rho = j.at("rho").get<double>();
  return r;
}

json analysis_to_json(const AnalysisReport& report) {
  json settings = {{"seed", report.seed},
                   {"draws", report.draws},
                   {"level", round_significant(report.level)},
                   {"prior", prior_json(report.prior)}};
  if (report.rho_grid) {
    settings["sensitivity"] = {{"rho_grid", rounded(*report.rho_grid)}, {"draws", report.sensitivity_draws}};
  }
  json effects = json::array();
  for (const auto& e : report.effects) {
    json bayes = interval_to_json(e.bayes);
    bayes["closed_mean"] = round_significant(e.closed_mean);
    bayes["closed_variance"] = round_significant(e.closed_variance);
    json entry = {{"effect", e.effect}, {"label", e.label}, {"neyman", interval_to_json(e.neyman)},
                  {"bayes_indep", bayes}};
    if (e.sweep) {
      json rows = json::array();
      for (const auto& r : e.sweep->rows) rows.push_back(interval_to_json(r));
      entry["sensitivity"] = {{"rows", rows},
                              {"widest_index", e.sweep->widest},
                              {"conservative", interval_to_json(e.sweep->conservative())}};
    }
    effects.push_back(entry);
  }
  return {{"tool", tool_json()}, {"input", input_json(report.input)}, {"settings", settings}, {"effects", effects}};
}

AnalysisReport analysis_from_json(const json& j) {
  AnalysisReport r;
  r.input = input_from_json(j.at("input"));
  const auto& s = j.at("settings");
  r.seed = s.at("seed").get<std::uint64_t>();
  r.draws = s.at("draws").get<std::size_t>();
  r.level = s.at("level").get<double>();
  r.prior.alpha = s.at("prior").at("alpha").get<std::vector<double>>();
  r.prior.beta = s.at("prior").at("beta").get<std::vector<double>>();
  if (s.contains("sensitivity")) {
    r.rho_grid = s.at("sensitivity").at("rho_grid").get<std::vector<double>>();
    r.sensitivity_draws = s.at("sensitivity").at("draws").get<std::size_t>();
  }
  for (const auto& e : j.at("effects")) {
    EffectAnalysis ea;
    ea.effect = e.at("effect").get<std::size_t>();
    ea.label = e.at("label").get<std::string>();
    ea.neyman = interval_from_json(e.at("neyman"));
    ea.bayes = interval_from_json(e.at("bayes_indep"));
    ea.closed_mean = e.at("bayes_indep").at("closed_mean").get<double>();
    ea.closed_variance = e.at("bayes_indep").at("closed_variance").get<double>();
    if (e.contains("sensitivity")) {
      SweepResult sweep;
      for (const auto& row : e.at("sensitivity").at("rows")) sweep.rows.push_back(interval_from_json(row));
      sweep.widest = e.at("sensitivity").at("widest_index").get<std::size_t>();
      ea.sweep = std::move(sweep);
    }
    r.effects.push_back(std::move(ea));
  }
  return r;
}

json sweep_summary_json(const AnalysisInput& input, const SweepResult& sweep, std::size_t effect,
                        const PriorSpec& prior, std::size_t draws, double level, std::uint64_t seed) {
  json settings = {{"seed", seed},
                   {"draws", draws},
                   {"level", round_significant(level)},
                   {"prior", prior_json(prior)}};
  const bool ar1 = std::all_of(sweep.rows.begin(), sweep.rows.end(), [](const auto& r) { return r.rho.has_value(); });
  if (ar1) {
    std::vector<double> grid;
    for (const auto& r : sweep.rows) grid.push_back(*r.rho);
    settings["rho_grid"] = rounded(grid);
  } else {
    settings["gamma"] = "custom";
  }
  return {{"tool", tool_json()},
          {"input", input_json(input)},
          {"settings", settings},
          {"effect", effect},
          {"label", ModelMatrix(input.factors).label(effect)},
          {"grid_points", sweep.rows.size()},
          {"conservative", interval_to_json(sweep.conservative())}};
}

void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  out << "rho,lower,upper,width\n";
  char buf[128];
  for (const auto& r : sweep.rows) {
    if (r.rho) {
      std::snprintf(buf, sizeof buf, "%.17g,", *r.rho);
    } else {
      std::snprintf(buf, sizeof buf, "custom,");
    }
    out << buf;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.lower, r.upper, r.width());
    out << buf;
  }
}

json study_summary_json(const StudyReport& report, std::size_t case_count) {
  const StudyConfig& c = report.config;
  json cfg;
  if (c.cases_path) {
    cfg["cases"] = *c.cases_path;
  } else if (c.generator) {
    cfg["cases"] = {{"generate",
                     {{"count", c.generator->count}, {"units", c.generator->units}, {"seed", c.generator->seed}}}};
  }
  json methods = json::array();
  for (Method m : c.coverage.methods) methods.push_back(to_string(m));
  cfg["arms"] = c.coverage.arms;
  cfg["effect"] = c.coverage.effect;
  cfg["replications"] = c.coverage.replications;
  cfg["level"] = round_significant(c.coverage.level);
  cfg["methods"] = methods;
  cfg["seed"] = c.coverage.seed;
  cfg["draws_per_rep"] = c.coverage.draws_per_rep;
  cfg["prior"] = prior_json(c.coverage.prior);
  cfg["thresholds"] = {{"over", round_significant(c.over_threshold)},
                       {"under", round_significant(c.under_threshold)}};

  json summary = json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"method", to_string(s.method)},
                       {"cases", s.cases},
                       {"fraction_over", round_significant(s.fraction_over)},
                       {"fraction_under", round_significant(s.fraction_under)},
                       {"mean_coverage", round_significant(s.mean_coverage)},
                       {"mean_width", round_significant(s.mean_width)}});
  }
  return {{"tool", tool_json()}, {"config", cfg}, {"cases", case_count}, {"methods", summary}};
}

}  // namespace factorial
