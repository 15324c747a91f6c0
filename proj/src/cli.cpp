#include "factorial/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "factorial/errors.hpp"
#include "factorial/harness.hpp"
#include "factorial/parallel.hpp"
#include "factorial/report.hpp"

namespace factorial::cli {

namespace {

struct InputFlags {
  std::string input;
  std::string from_csv;
  std::string alpha = "1";
  std::string beta = "1";
};

void add_input_flags(CLI::App* cmd, InputFlags& f) {
  cmd->add_option("-i,--input", f.input, "Observed data JSON {\"K\", \"n\", \"n_obs\"}");
  cmd->add_option("--from-csv", f.from_csv, "Observed data as arm,size,successes rows");
  cmd->add_option("--alpha", f.alpha, "Beta prior alpha: one value or one per arm")->capture_default_str();
  cmd->add_option("--beta", f.beta, "Beta prior beta: one value or one per arm")->capture_default_str();
}

AnalysisInput read_input(const InputFlags& f) {
  if (f.input.empty() == f.from_csv.empty()) {
    throw InvalidArgument("give exactly one of --input or --from-csv");
  }
  return f.input.empty() ? load_analysis_input(f.from_csv, true) : load_analysis_input(f.input, false);
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("cannot parse ") + what + " value '" + part + "'");
    }
    if (used != part.size()) throw InvalidArgument(std::string("cannot parse ") + what + " value '" + part + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument(std::string("empty ") + what);
  return out;
}

PriorSpec read_prior(const InputFlags& f, std::size_t arms) {
  auto expand = [arms](std::vector<double> v, const char* what) {
    if (v.size() == 1) return std::vector<double>(arms, v.front());
    if (v.size() != arms) {
      throw InvalidArgument(std::string(what) + " needs 1 or " + std::to_string(arms) + " values");
    }
    return v;
  };
  PriorSpec prior{expand(parse_number_list(f.alpha, "alpha"), "--alpha"),
                  expand(parse_number_list(f.beta, "beta"), "--beta")};
  prior.validate(arms);
  return prior;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("--level must be in (0, 1)");
}

void check_draws(std::size_t draws, const char* flag) {
  if (draws < kMinPosteriorDraws) {
    throw InvalidArgument(std::string(flag) + " must be at least " + std::to_string(kMinPosteriorDraws));
  }
}

// Writes to `path`, or to `fallback` when path is empty.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InvalidArgument("cannot write '" + path + "'");
  write(file);
}

std::vector<std::size_t> parse_effects(const std::string& text) {
  if (text == "all") return {};
  std::vector<std::size_t> out;
  for (double v : parse_number_list(text, "effect")) {
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw InvalidArgument("effects must be positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neymanian and Bayesian inference for 2^K factorial designs with binary outcomes", "factorial"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::size_t threads = default_thread_count();

  // analyze
  InputFlags analyze_in;
  std::size_t analyze_draws = kDefaultPosteriorDraws;
  double analyze_level = 0.95;
  std::optional<std::uint64_t> analyze_seed;
  std::string analyze_effects = "all";
  std::string analyze_rho;
  std::size_t analyze_sens_draws = 50'000;
  std::string analyze_out;
  auto* analyze_cmd = app.add_subcommand("analyze", "Neymanian and Bayesian intervals for observed data");
  add_input_flags(analyze_cmd, analyze_in);
  analyze_cmd->add_option("--draws", analyze_draws, "Posterior draws per effect")->capture_default_str();
  analyze_cmd->add_option("--level", analyze_level, "Interval level")->capture_default_str();
  analyze_cmd->add_option("--seed", analyze_seed, "Master seed (random and echoed if absent)");
  analyze_cmd->add_option("--effects", analyze_effects, "'all' or comma-separated effect indices")->capture_default_str();
  analyze_cmd->add_option("--rho-grid", analyze_rho, "Also run the sensitivity sweep over this grid");
  analyze_cmd->add_option("--sensitivity-draws", analyze_sens_draws, "Draws per rho")->capture_default_str();
  analyze_cmd->add_option("-o,--out", analyze_out, "Write the JSON report here instead of stdout");
  analyze_cmd->add_option("--threads", threads, "Worker threads (env FACTORIAL_THREADS)");

  // sensitivity
  InputFlags sens_in;
  std::string sens_grid = "0:0.99:0.01";
  std::string sens_gamma;
  std::size_t sens_draws = 50'000;
  double sens_level = 0.95;
  std::optional<std::uint64_t> sens_seed;
  std::size_t sens_effect = 1;
  std::string sens_csv;
  std::string sens_summary;
  auto* sens_cmd = app.add_subcommand("sensitivity", "Credible intervals across potential-outcome association");
  add_input_flags(sens_cmd, sens_in);
  sens_cmd->add_option("--rho-grid", sens_grid, "start:stop:step, comma list, or a single value")->capture_default_str();
  sens_cmd->add_option("--gamma-csv", sens_gamma, "Custom J x J association matrix instead of the AR(1) grid");
  sens_cmd->add_option("--draws", sens_draws, "Posterior draws per grid point")->capture_default_str();
  sens_cmd->add_option("--level", sens_level, "Interval level")->capture_default_str();
  sens_cmd->add_option("--seed", sens_seed, "Master seed (random and echoed if absent)");
  sens_cmd->add_option("--effect", sens_effect, "Effect index")->capture_default_str();
  sens_cmd->add_option("--csv", sens_csv, "Sweep CSV path (default stdout)");
  sens_cmd->add_option("--summary", sens_summary,
                       "Conservative-interval JSON path (default stdout when --csv is given)");
  sens_cmd->add_option("--threads", threads, "Worker threads (env FACTORIAL_THREADS)");

  // simulate
  std::string sim_config;
  std::string sim_cases;
  std::string sim_out_dir = ".";
  auto* sim_cmd = app.add_subcommand("simulate", "Run a coverage study");
  sim_cmd->add_option("-c,--config", sim_config, "Study config JSON")->required();
  sim_cmd->add_option("--cases", sim_cases, "Override the config's case file");
  sim_cmd->add_option("--out-dir", sim_out_dir, "Directory for coverage.csv and summary.json")->capture_default_str();
  sim_cmd->add_option("--threads", threads, "Worker threads (env FACTORIAL_THREADS)");

  // gen-cases
  std::size_t gen_count = 100;
  std::int64_t gen_units = 800;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-cases", "Generate random 2^2 populations as cell counts");
  gen_cmd->add_option("-n,--count", gen_count, "Number of cases")->capture_default_str();
  gen_cmd->add_option("-N,--units", gen_units, "Units per case")->capture_default_str();
  gen_cmd->add_option("--seed", gen_seed, "Seed (random and echoed on stderr if absent)");
  gen_cmd->add_option("-o,--out", gen_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidation;
  }
  if (threads < 1) threads = 1;

  try {
    if (*analyze_cmd) {
      AnalysisOptions opts;
      const AnalysisInput input = read_input(analyze_in);
      check_level(analyze_level);
      check_draws(analyze_draws, "--draws");
      opts.effects = parse_effects(analyze_effects);
      opts.prior = read_prior(analyze_in, input.arm_sizes.size());
      opts.draws = analyze_draws;
      opts.level = analyze_level;
      opts.seed = resolve_seed(analyze_seed);
      if (!analyze_rho.empty()) {
        check_draws(analyze_sens_draws, "--sensitivity-draws");
        opts.rho_grid = parse_rho_grid(analyze_rho);
        opts.sensitivity_draws = analyze_sens_draws;
      }
      opts.threads = threads;
      const AnalysisReport report = analyze(input, opts);
      emit(analyze_out, out, [&](std::ostream& os) { os << analysis_to_json(report).dump(2) << '\n'; });
    } else if (*sens_cmd) {
      const AnalysisInput input = read_input(sens_in);
      check_level(sens_level);
      check_draws(sens_draws, "--draws");
      const ObservedData obs = input.observed();
      const ModelMatrix design(input.factors);
      check_effect_index(design, sens_effect);
      const PriorSpec prior = read_prior(sens_in, obs.arms());
      const std::uint64_t seed = resolve_seed(sens_seed);
      SweepResult sweep;
      if (!sens_gamma.empty()) {
        const GammaStructure gamma = load_gamma_csv(sens_gamma, obs.arms());
        Rng rng = Rng::substream(seed, {kSweepStream, 0});
        IntervalReport r = credible_interval_sensitivity(obs, design, sens_effect, prior, gamma, sens_draws,
                                                         sens_level, rng);
        r.seed = seed;
        sweep.rows.push_back(r);
      } else {
        sweep = sensitivity_sweep(obs, design, sens_effect, prior, parse_rho_grid(sens_grid), sens_draws,
                                  sens_level, seed, threads);
      }
      emit(sens_csv, out, [&](std::ostream& os) { write_sweep_csv(sweep, os); });
      const auto summary = sweep_summary_json(input, sweep, sens_effect, prior, sens_draws, sens_level, seed);
      if (!sens_summary.empty()) {
        emit(sens_summary, out, [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
      } else if (!sens_csv.empty()) {
        out << summary.dump(2) << '\n';
      }
    } else if (*sim_cmd) {
      StudyConfig config = load_study_config(sim_config);
      if (!sim_cases.empty()) {
        config.cases_path = sim_cases;
        config.generator.reset();
      }
      const auto cases = study_cases(config);
      const StudyReport report = run_study(config, cases, threads);
      std::filesystem::create_directories(sim_out_dir);
      const auto dir = std::filesystem::path(sim_out_dir);
      const std::string summary = study_summary_json(report, cases.size()).dump(2) + "\n";
      emit((dir / "coverage.csv").string(), out, [&](std::ostream& os) { write_coverage_csv(report, os); });
      emit((dir / "summary.json").string(), out, [&](std::ostream& os) { os << summary; });
      out << summary;
    } else if (*gen_cmd) {
      if (gen_units < 1) throw InvalidArgument("--units must be at least 1");
      if (gen_count < 1) throw InvalidArgument("--count must be at least 1");
      const std::uint64_t seed = resolve_seed(gen_seed);
      if (!gen_seed) err << "seed: " << seed << '\n';
      Rng rng(seed);
      const auto cases = generate_cases(gen_count, gen_units, 16, rng);
      emit(gen_out, out, [&](std::ostream& os) { write_cases_csv(cases, os); });
    }
  } catch (const ResourceLimit& e) {
    err << "error: " << e.what() << '\n';
    return kResourceLimit;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const UnsupportedRepresentation& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const DegenerateProbability& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kSuccess;
}

}  // namespace factorial::cli
