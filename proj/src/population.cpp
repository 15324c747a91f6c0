#include "factorial/population.hpp"

#include <cmath>
#include <string>

#include "factorial/errors.hpp"

namespace factorial {

namespace {

double effect_scale(int factors) { return std::ldexp(1.0, -(factors - 1)); }

void check_design(const PotentialTable& table, const ModelMatrix& design) {
  if (table.factors() != design.factors()) {
    throw InvalidArgument("population has K=" + std::to_string(table.factors()) +
                          " but design has K=" + std::to_string(design.factors()));
  }
}

void check_arm(const PotentialTable& table, std::size_t arm) {
  if (arm >= table.arms()) throw InvalidArgument("arm index out of range");
}

}  // namespace

std::int64_t CellCounts::total() const {
  std::int64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

PotentialTable::PotentialTable(int factors, std::size_t units, std::vector<std::uint8_t> outcomes)
    : factors_(factors), units_(units), outcomes_(std::move(outcomes)) {
  if (factors < 1 || factors > ModelMatrix::kMaxFactors) throw InvalidArgument("factor count out of range");
  arms_ = std::size_t{1} << factors;
  if (units == 0) throw InvalidArgument("population needs at least one unit");
  if (outcomes_.size() != units * arms_) throw InvalidArgument("outcome matrix has the wrong size");
  for (auto v : outcomes_) {
    if (v > 1) throw InvalidArgument("potential outcomes must be 0 or 1");
  }
}

PotentialTable PotentialTable::from_rows(int factors, const std::vector<std::vector<int>>& rows) {
  if (factors < 1 || factors > ModelMatrix::kMaxFactors) throw InvalidArgument("factor count out of range");
  const std::size_t arms = std::size_t{1} << factors;
  std::vector<std::uint8_t> flat;
  flat.reserve(rows.size() * arms);
  for (const auto& row : rows) {
    if (row.size() != arms) throw InvalidArgument("row length must equal 2^K");
    for (int v : row) {
      if (v != 0 && v != 1) throw InvalidArgument("potential outcomes must be 0 or 1");
      flat.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return PotentialTable(factors, rows.size(), std::move(flat));
}

PotentialTable from_cell_counts(const CellCounts& cells) {
  if (cells.factors < 1 || cells.factors > kMaxCellCountFactors) {
    throw UnsupportedRepresentation("cell counts are supported only for K <= " +
                                    std::to_string(kMaxCellCountFactors));
  }
  const std::size_t arms = std::size_t{1} << cells.factors;
  const std::size_t words = std::size_t{1} << arms;
  if (cells.counts.size() != words) {
    throw InvalidArgument("expected " + std::to_string(words) + " cell counts, got " +
                          std::to_string(cells.counts.size()));
  }
  for (auto c : cells.counts) {
    if (c < 0) throw InvalidArgument("cell counts must be nonnegative");
  }
  const std::int64_t total = cells.total();
  if (total <= 0) throw InvalidArgument("cell counts must sum to a positive population size");

  std::vector<std::uint8_t> flat;
  flat.reserve(static_cast<std::size_t>(total) * arms);
  for (std::size_t w = 0; w < words; ++w) {
    for (std::int64_t copy = 0; copy < cells.counts[w]; ++copy) {
      for (std::size_t j = 0; j < arms; ++j) {
        flat.push_back(static_cast<std::uint8_t>((w >> (arms - 1 - j)) & 1U));
      }
    }
  }
  return PotentialTable(cells.factors, static_cast<std::size_t>(total), std::move(flat));
}

CellCounts to_cell_counts(const PotentialTable& table) {
  if (table.factors() > kMaxCellCountFactors) {
    throw UnsupportedRepresentation("cell counts are supported only for K <= " +
                                    std::to_string(kMaxCellCountFactors));
  }
  const std::size_t arms = table.arms();
  CellCounts out{table.factors(), std::vector<std::int64_t>(std::size_t{1} << arms, 0)};
  for (std::size_t i = 0; i < table.units(); ++i) {
    std::size_t w = 0;
    for (std::size_t j = 0; j < arms; ++j) w = (w << 1) | table(i, j);
    ++out.counts[w];
  }
  return out;
}

Estimands estimands(const PotentialTable& table, const ModelMatrix& design) {
  check_design(table, design);
  const std::size_t arms = table.arms();
  const auto n = static_cast<double>(table.units());
  std::vector<std::int64_t> successes(arms, 0);
  for (std::size_t i = 0; i < table.units(); ++i) {
    for (std::size_t j = 0; j < arms; ++j) successes[j] += table(i, j);
  }
  Estimands out;
  out.p.resize(arms);
  for (std::size_t j = 0; j < arms; ++j) out.p[j] = static_cast<double>(successes[j]) / n;

  // Contrast integer counts first, then divide once.
  const double scale = effect_scale(table.factors());
  out.tau.resize(arms - 1);
  for (std::size_t l = 1; l < arms; ++l) {
    std::int64_t contrast = 0;
    for (std::size_t j = 0; j < arms; ++j) contrast += design(j, l) * successes[j];
    out.tau[l - 1] = scale * static_cast<double>(contrast) / n;
  }
  return out;
}

void check_effect_index(const ModelMatrix& design, std::size_t l) {
  if (l < 1 || l >= design.size()) {
    throw InvalidArgument("effect index must be in [1, " + std::to_string(design.size() - 1) +
                          "], got " + std::to_string(l));
  }
}

double individual_effect(const PotentialTable& table, const ModelMatrix& design,
                         std::size_t unit, std::size_t l) {
  check_design(table, design);
  check_effect_index(design, l);
  int contrast = 0;
  for (std::size_t j = 0; j < table.arms(); ++j) contrast += design(j, l) * table(unit, j);
  return effect_scale(table.factors()) * contrast;
}

double arm_variance(const PotentialTable& table, std::size_t arm) {
  check_arm(table, arm);
  const auto n = static_cast<double>(table.units());
  if (table.units() < 2) return 0.0;
  std::int64_t ones = 0;
  for (std::size_t i = 0; i < table.units(); ++i) ones += table(i, arm);
  const double p = static_cast<double>(ones) / n;
  return n * p * (1.0 - p) / (n - 1.0);
}

double arm_variance_direct(const PotentialTable& table, std::size_t arm) {
  check_arm(table, arm);
  if (table.units() < 2) return 0.0;
  const auto n = static_cast<double>(table.units());
  double mean = 0.0;
  for (std::size_t i = 0; i < table.units(); ++i) mean += table(i, arm);
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < table.units(); ++i) {
    const double d = table(i, arm) - mean;
    ss += d * d;
  }
  return ss / (n - 1.0);
}

double effect_heterogeneity(const PotentialTable& table, const ModelMatrix& design, std::size_t l) {
  check_design(table, design);
  check_effect_index(design, l);
  if (table.units() < 2) return 0.0;
  const auto n = static_cast<double>(table.units());
  const double mean = estimands(table, design).effect(l);
  double ss = 0.0;
  for (std::size_t i = 0; i < table.units(); ++i) {
    const double d = individual_effect(table, design, i, l) - mean;
    ss += d * d;
  }
  return ss / (n - 1.0);
}

double sampling_variance(const PotentialTable& table, const ModelMatrix& design,
                         std::span<const std::int64_t> arm_sizes, std::size_t l) {
  check_design(table, design);
  check_effect_index(design, l);
  if (arm_sizes.size() != table.arms()) throw InvalidArgument("need one arm size per treatment combination");
  std::int64_t total = 0;
  for (auto nj : arm_sizes) {
    if (nj < 2) throw InvalidArgument("every arm needs at least 2 units");
    total += nj;
  }
  if (total != static_cast<std::int64_t>(table.units())) {
    throw InvalidArgument("arm sizes must sum to the population size");
  }
  const double scale = effect_scale(table.factors());
  double within = 0.0;
  for (std::size_t j = 0; j < table.arms(); ++j) {
    within += arm_variance(table, j) / static_cast<double>(arm_sizes[j]);
  }
  return scale * scale * within -
         effect_heterogeneity(table, design, l) / static_cast<double>(table.units());
}

double pairwise_covariance(const PotentialTable& table, std::size_t arm, std::size_t other_arm) {
  check_arm(table, arm);
  check_arm(table, other_arm);
  if (arm == other_arm) throw InvalidArgument("pairwise covariance needs two distinct arms");
  if (table.units() < 2) return 0.0;
  const auto n = static_cast<double>(table.units());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < table.units(); ++i) {
    mean_a += table(i, arm);
    mean_b += table(i, other_arm);
  }
  mean_a /= n;
  mean_b /= n;
  double cross = 0.0;
  for (std::size_t i = 0; i < table.units(); ++i) {
    cross += (table(i, arm) - mean_a) * (table(i, other_arm) - mean_b);
  }
  return cross / (n - 1.0);
}

}  // namespace factorial
