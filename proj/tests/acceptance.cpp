// Acceptance checks. One PASS/FAIL line per criterion; exit status is
// nonzero when any selected criterion fails.
//
//   acceptance --cli <factorial binary> --assets <dir> [--only N[,N...]] [--threads T]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "factorial/assignment.hpp"
#include "factorial/bayes.hpp"
#include "factorial/harness.hpp"
#include "factorial/neyman.hpp"
#include "factorial/parallel.hpp"
#include "factorial/population.hpp"
#include "factorial/report.hpp"
#include "factorial/sensitivity.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace factorial;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  std::string cli;
  std::string assets;
  std::size_t threads = 1;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol + 1e-12; }

ObservedData smoking() { return ObservedData(2, {189, 188, 189, 189}, {13, 29, 19, 34}); }

constexpr std::uint64_t kSeed = 20160901;

Outcome neyman_smoking(const Context&) {
  const auto t0 = Clock::now();
  const auto ci = confidence_interval(smoking(), ModelMatrix(2), 2, 0.95);
  const double secs = seconds_since(t0);
  const bool ok = within(ci.point, 0.0824, 0.0005) && within(ci.lower, 0.035, 0.001) &&
                  within(ci.upper, 0.129, 0.001) && secs < 1.0;
  return {ok, "point " + fmt("%.5f", ci.point) + ", CI (" + fmt("%.4f", ci.lower) + ", " + fmt("%.4f", ci.upper) +
                  "), " + fmt("%.3f s", secs)};
}

Outcome bayes_smoking(const Context&) {
  const auto t0 = Clock::now();
  Rng rng = Rng::substream(kSeed, {kAnalysisStream, 2});
  const auto ci = credible_interval_indep(smoking(), ModelMatrix(2), 2, PriorSpec::uniform(4), 200'000, 0.95, rng);
  const double secs = seconds_since(t0);
  const double ratio = ci.width() / confidence_interval(smoking(), ModelMatrix(2), 2, 0.95).width();
  const bool ok = within(ci.lower, 0.041, 0.005) && within(ci.upper, 0.123, 0.005) && ratio >= 0.82 &&
                  ratio <= 0.91 && secs < 10.0;
  return {ok, "interval (" + fmt("%.4f", ci.lower) + ", " + fmt("%.4f", ci.upper) + "), width ratio " +
                  fmt("%.3f", ratio) + ", " + fmt("%.2f s", secs)};
}

Outcome sweep_smoking(const Context& ctx) {
  const auto t0 = Clock::now();
  const auto sweep = sensitivity_sweep(smoking(), ModelMatrix(2), 2, PriorSpec::uniform(4), default_rho_grid(),
                                       50'000, 0.95, kSeed, ctx.threads);
  const double secs = seconds_since(t0);
  const auto& w = sweep.conservative();
  const bool ok = within(w.lower, 0.037, 0.005) && within(w.upper, 0.125, 0.005) && secs < 180.0;
  return {ok, "widest (" + fmt("%.4f", w.lower) + ", " + fmt("%.4f", w.upper) + ") at rho " +
                  fmt("%.2f", w.rho.value_or(-1)) + " (argmax informational), " + fmt("%.1f s", secs)};
}

Outcome coverage_study(const Context& ctx) {
  const auto t0 = Clock::now();
  const StudyConfig config = load_study_config(ctx.assets + "/study_balanced.json");
  const auto cases = study_cases(config);
  const StudyReport report = run_study(config, cases, ctx.threads);
  const double secs = seconds_since(t0);

  double min_neyman = 1.0;
  for (const auto& row : report.rows) {
    if (row.method == Method::Neyman) min_neyman = std::min(min_neyman, row.coverage);
  }
  const MethodSummary* neyman = nullptr;
  const MethodSummary* bayes = nullptr;
  for (const auto& s : report.summary) {
    if (s.method == Method::Neyman) neyman = &s;
    if (s.method == Method::BayesIndep) bayes = &s;
  }
  if (!neyman || !bayes || cases.size() != 100) return {false, "study config does not match the criterion"};

  const bool a = min_neyman >= 0.95;
  const bool b = within(bayes->fraction_over, 0.09, 0.05);
  const bool c = within(bayes->fraction_under, 0.11, 0.05);
  const bool fast = secs < 600.0;
  std::string detail = std::string("(a) ") + (a ? "pass" : "FAIL") + " min Neyman coverage " +
                       fmt("%.3f", min_neyman) + ", share > 0.96 " + fmt("%.2f", neyman->fraction_over) +
                       "; (b) " + (b ? "pass" : "FAIL") + " Bayes share > 0.96 " +
                       fmt("%.2f", bayes->fraction_over) + " vs 0.09 +- 0.05; (c) " + (c ? "pass" : "FAIL") +
                       " Bayes share < 0.94 " + fmt("%.2f", bayes->fraction_under) + " vs 0.11 +- 0.05; " +
                       fmt("%.0f s", secs);
  return {a && b && c && fast, detail};
}

Outcome enumeration_oracle(const Context&) {
  const auto t0 = Clock::now();
  const ModelMatrix h(2);
  const auto ref_h = oracle::model_matrix(2);
  const std::vector<std::int64_t> sizes{2, 2, 2, 2};
  Rng rng(kSeed);
  int failures = 0;
  double worst_var = 0.0;
  double worst_bias = 0.0;
  const int populations = 25;
  for (int p = 0; p < populations; ++p) {
    std::vector<std::vector<int>> rows(8, std::vector<int>(4));
    std::vector<std::uint8_t> flat;
    for (auto& r : rows) {
      for (auto& v : r) {
        v = static_cast<int>(rng.below(2));
        flat.push_back(static_cast<std::uint8_t>(v));
      }
    }
    const PotentialTable table(2, 8, flat);
    for (std::size_t l = 1; l < 4; ++l) {
      std::vector<oracle::Q> estimates;
      double sum_var_hat = 0.0;
      AssignmentEnumerator it(8, sizes);
      while (it.next()) {
        const auto obs = observe(table, it.current());
        // Estimates are multiples of 1/4 here, so the double is exact.
        const double est = point_estimate(obs, h, l);
        const double scaled = est * 4.0;
        if (scaled != std::round(scaled)) ++failures;
        estimates.emplace_back(static_cast<long long>(std::llround(scaled)), 4);
        sum_var_hat += variance_estimate(obs);
      }
      const auto count = static_cast<long long>(estimates.size());
      oracle::Q mean = 0;
      for (const auto& e : estimates) mean += e;
      mean /= oracle::Q(count);
      oracle::Q var = 0;
      for (const auto& e : estimates) var += (e - mean) * (e - mean);
      var /= oracle::Q(count);

      if (count != 2520 || mean != oracle::exact_effect(rows, ref_h, l)) ++failures;
      const double closed = sampling_variance(table, h, sizes, l);
      worst_var = std::max(worst_var, std::abs(oracle::to_double(var) - closed));
      const double bias = effect_heterogeneity(table, h, l) / 8.0;
      worst_bias = std::max(worst_bias, std::abs(sum_var_hat / static_cast<double>(count) - (closed + bias)));
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = failures == 0 && worst_var <= 1e-12 && worst_bias <= 1e-12 && secs < 30.0;
  return {ok, std::to_string(populations) + " populations x 3 effects, exact-mean mismatches " +
                  std::to_string(failures) + ", max |var - closed form| " + fmt("%.1e", worst_var) +
                  ", max bias-identity error " + fmt("%.1e", worst_bias) + ", " + fmt("%.1f s", secs)};
}

Outcome posterior_moments(const Context& ctx) {
  const auto t0 = Clock::now();
  const int datasets = 20;
  const std::size_t draws = 1'000'000;
  std::vector<double> z_mean(datasets), z_var(datasets);
  parallel_for(datasets, ctx.threads, [&](std::size_t d) {
    Rng rng = Rng::substream(kSeed, {0x4d4f4dULL, d});
    const int k = 1 + static_cast<int>(rng.below(2));
    const std::size_t arms = std::size_t{1} << k;
    std::vector<std::int64_t> n(arms), s(arms);
    for (std::size_t j = 0; j < arms; ++j) {
      n[j] = 2 + static_cast<std::int64_t>(rng.below(200));
      s[j] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n[j]) + 1));
    }
    const ObservedData obs(k, n, s);
    const ModelMatrix h(k);
    const auto prior = PriorSpec::symmetric(arms, 0.5 + rng.uniform(), 0.5 + rng.uniform());
    const std::size_t l = 1 + static_cast<std::size_t>(rng.below(arms - 1));
    const auto x = posterior_draws_indep(obs, h, l, prior, draws, rng);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(draws);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
      const double c = (v - mean) * (v - mean);
      m2 += c;
      m4 += c * c;
    }
    m2 /= static_cast<double>(draws);
    m4 /= static_cast<double>(draws);
    const double var = m2 * static_cast<double>(draws) / static_cast<double>(draws - 1);
    const double se_mean = std::sqrt(var / static_cast<double>(draws));
    const double se_var = std::sqrt(std::max(m4 - m2 * m2, 1e-300) / static_cast<double>(draws));
    z_mean[d] = std::abs(mean - posterior_mean_closed(obs, h, l, prior)) / se_mean;
    z_var[d] = std::abs(var - posterior_variance_closed(obs, prior)) / se_var;
  });
  const double secs = seconds_since(t0);
  const double worst_mean = *std::max_element(z_mean.begin(), z_mean.end());
  const double worst_var = *std::max_element(z_var.begin(), z_var.end());
  const bool ok = worst_mean < 4.0 && worst_var < 4.0 && secs < 120.0;
  return {ok, std::to_string(datasets) + " datasets x 1e6 draws, max |z| mean " + fmt("%.2f", worst_mean) +
                  ", variance " + fmt("%.2f", worst_var) + ", " + fmt("%.1f s", secs)};
}

Outcome conditional_properties(const Context&) {
  const auto t0 = Clock::now();
  double worst_total = 0.0;
  double worst_joint = 0.0;
  bool independence = true;
  int points = 0;
  for (int a = 0; a < 20; ++a) {
    for (int b = 0; b < 20; ++b) {
      const double pc = (a + 0.5) / 20.0;
      const double pt = (b + 0.5) / 20.0;
      for (int g = 0; g < 10; ++g) {
        const double gamma = g * 0.099;
        const auto c = conditional_probs(pc, pt, gamma);
        const auto r = conditional_probs(pt, pc, gamma);
        worst_total = std::max(worst_total, std::abs(pc * c.given_one + (1 - pc) * c.given_zero - pt));
        worst_joint = std::max(worst_joint, std::abs(pc * c.given_one - pt * r.given_one));
        ++points;
      }
      const auto zero = conditional_probs(pc, pt, 0.0);
      independence = independence && zero.given_one == pt && zero.given_zero == pt;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = points >= 4000 && worst_total <= 1e-12 && worst_joint <= 1e-12 && independence && secs < 1.0;
  return {ok, std::to_string(points) + " grid points, max total-probability error " + fmt("%.1e", worst_total) +
                  ", max joint asymmetry " + fmt("%.1e", worst_joint) + ", gamma=0 independence " +
                  (independence ? "exact" : "BROKEN") + ", " + fmt("%.3f s", secs)};
}

Outcome approx_variance_inequality(const Context&) {
  const auto t0 = Clock::now();
  Rng rng(kSeed + 8);
  int violations = 0;
  int strict_failures = 0;
  const int datasets = 10'000;
  for (int d = 0; d < datasets; ++d) {
    std::vector<std::int64_t> n(4), s(4);
    for (std::size_t j = 0; j < 4; ++j) {
      n[j] = 2 + static_cast<std::int64_t>(rng.below(300));
      // Mix in degenerate arms.
      const auto roll = rng.below(10);
      s[j] = roll == 0 ? 0 : roll == 1 ? n[j] : static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n[j]) + 1));
    }
    // Isolate each arm's term by zeroing the other arms' successes.
    for (std::size_t j = 0; j < 4; ++j) {
      std::vector<std::int64_t> only(4, 0);
      only[j] = s[j];
      const ObservedData obs(2, n, only);
      const double approx = approx_posterior_variance(obs);
      const double neyman = variance_estimate(obs);
      if (approx > neyman) ++violations;
      const bool interior = s[j] > 0 && s[j] < n[j];
      if (interior && !(approx < neyman)) ++strict_failures;
    }
    const ObservedData obs(2, n, s);
    if (approx_posterior_variance(obs) > variance_estimate(obs)) ++violations;
  }
  const double secs = seconds_since(t0);
  const bool ok = violations == 0 && strict_failures == 0 && secs < 5.0;
  return {ok, std::to_string(datasets) + " datasets, violations " + std::to_string(violations) +
                  ", non-strict interior terms " + std::to_string(strict_failures) + ", " + fmt("%.2f s", secs)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the CLI with stdout captured into dir/stdout; returns stdout plus every file the command wrote.
std::string run_cli(const Context& ctx, const std::string& args, const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cmd = "\"" + ctx.cli + "\" " + args + " > \"" + (dir / "stdout").string() + "\"";
  const int rc = std::system(cmd.c_str());
  std::string out = "rc=" + std::to_string(rc) + "\n";
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out += "== " + fs::relative(f, dir).string() + "\n" + slurp(f);
  return out;
}

Outcome determinism(const Context& ctx) {
  const auto t0 = Clock::now();
  const fs::path root = fs::temp_directory_path() / "factorial_acceptance_determinism";
  fs::create_directories(root);
  const std::string input = ctx.assets + "/ahluwalia.json";
  {
    std::ofstream cfg(root / "study.json");
    cfg << R"({"cases": {"generate": {"count": 6, "units": 200, "seed": 3}}, "arms": [40, 40, 60, 60],
               "replications": 40, "methods": ["neyman", "bayes-indep"], "seed": 11, "draws_per_rep": 1000})";
  }
  const std::size_t max_threads = std::max<std::size_t>(2, std::thread::hardware_concurrency());
  const std::vector<std::pair<std::string, std::string>> commands{
      {"analyze", "analyze --input \"" + input + "\" --seed 7 --draws 20000 --rho-grid 0:0.9:0.3 "
                  "--sensitivity-draws 2000 --out \"{dir}/analysis.json\""},
      {"sensitivity", "sensitivity --input \"" + input + "\" --effect 2 --rho-grid 0:0.95:0.05 --draws 5000 "
                      "--seed 7 --csv \"{dir}/sweep.csv\" --summary \"{dir}/summary.json\""},
      {"simulate", "simulate --config \"" + (root / "study.json").string() + "\" --out-dir \"{dir}/sim\""},
      {"gen-cases", "gen-cases -n 20 -N 800 --seed 7 --out \"{dir}/cases.csv\""},
  };
  std::vector<std::string> bad;
  for (const auto& [name, tmpl] : commands) {
    std::vector<std::string> outputs;
    const std::vector<std::string> thread_flags{"1", "1", std::to_string(max_threads)};
    for (std::size_t run = 0; run < thread_flags.size(); ++run) {
      const fs::path dir = root / (name + "_" + std::to_string(run));
      std::string args = tmpl;
      for (auto pos = args.find("{dir}"); pos != std::string::npos; pos = args.find("{dir}")) {
        args.replace(pos, 5, dir.string());
      }
      if (name != "gen-cases") args += " --threads " + thread_flags[run];
      outputs.push_back(run_cli(ctx, args, dir));
    }
    const bool rc_ok = outputs[0].rfind("rc=0\n", 0) == 0;
    if (!rc_ok || outputs[0] != outputs[1] || outputs[0] != outputs[2]) bad.push_back(name);
  }
  fs::remove_all(root);
  const double secs = seconds_since(t0);
  std::string detail = "analyze, sensitivity, simulate, gen-cases; runs x2 at 1 thread + 1 at " +
                       std::to_string(max_threads) + " threads";
  if (!bad.empty()) {
    detail += "; differing:";
    for (const auto& b : bad) detail += " " + b;
  } else {
    detail += "; byte-identical";
  }
  return {bad.empty(), detail + ", " + fmt("%.1f s", secs)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  Context ctx;
  std::vector<int> only;
  ctx.threads = default_thread_count();
  app.add_option("--cli", ctx.cli, "factorial executable")->required();
  app.add_option("--assets", ctx.assets, "asset directory")->required();
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--threads", ctx.threads, "worker threads");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"Neymanian interval on the smoking data", neyman_smoking},
      {"independent Bayesian interval on the smoking data", bayes_smoking},
      {"sensitivity sweep on the smoking data", sweep_smoking},
      {"balanced coverage study", coverage_study},
      {"enumeration oracle", enumeration_oracle},
      {"posterior moments vs closed form", posterior_moments},
      {"conditional probability properties", conditional_properties},
      {"approximate variance inequality", approx_variance_inequality},
      {"CLI determinism", determinism},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first << "): " << o.detail
              << std::endl;
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
