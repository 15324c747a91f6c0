#pragma once

// Finite population of binary potential outcomes.
//
// A PotentialTable holds N units by J = 2^K arms; row i is unit i's vector of
// potential outcomes (Y_i(z_1), ..., Y_i(z_J)). For K <= 2 the same
// population can be written as cell counts D: D[w] is the number of units
// whose outcome vector, read as a J-bit word with arm 1 in the most
// significant bit, equals w.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "factorial/design.hpp"

namespace factorial {

struct CellCounts {
  int factors = 0;
  std::vector<std::int64_t> counts;

  std::int64_t total() const;
};

// Largest K for which the cell-count form is supported (2^(2^K) cells).
inline constexpr int kMaxCellCountFactors = 2;

class PotentialTable {
 public:
  PotentialTable(int factors, std::size_t units, std::vector<std::uint8_t> outcomes);

  // Rows of 0/1 values, each of length 2^factors.
  static PotentialTable from_rows(int factors, const std::vector<std::vector<int>>& rows);

  int factors() const noexcept { return factors_; }
  std::size_t units() const noexcept { return units_; }
  std::size_t arms() const noexcept { return arms_; }

  int operator()(std::size_t unit, std::size_t arm) const {
    return outcomes_[unit * arms_ + arm];
  }
  std::span<const std::uint8_t> row(std::size_t unit) const {
    return {outcomes_.data() + unit * arms_, arms_};
  }

 private:
  int factors_;
  std::size_t units_;
  std::size_t arms_;
  std::vector<std::uint8_t> outcomes_;
};

// Rows come out in ascending word order.
PotentialTable from_cell_counts(const CellCounts& counts);
CellCounts to_cell_counts(const PotentialTable& table);

struct Estimands {
  std::vector<double> p;    // arm means, index j = 0..J-1
  std::vector<double> tau;  // tau[l - 1] is the effect for column l = 1..J-1

  double effect(std::size_t l) const { return tau.at(l - 1); }
};

Estimands estimands(const PotentialTable& table, const ModelMatrix& design);

// tau_il = 2^-(K-1) h_l' Y_i.
double individual_effect(const PotentialTable& table, const ModelMatrix& design,
                         std::size_t unit, std::size_t l);

// S_j^2 via the closed form N p_j (1 - p_j) / (N - 1).
double arm_variance(const PotentialTable& table, std::size_t arm);
// S_j^2 via the sum of squared deviations.
double arm_variance_direct(const PotentialTable& table, std::size_t arm);

// S^2(tau_l): variance of the individual-level effects, N - 1 denominator.
double effect_heterogeneity(const PotentialTable& table, const ModelMatrix& design, std::size_t l);

// Randomization variance of the plug-in estimator under complete
// randomization with the given arm sizes.
double sampling_variance(const PotentialTable& table, const ModelMatrix& design,
                         std::span<const std::int64_t> arm_sizes, std::size_t l);

// S_{jj'}: finite-population covariance of the outcomes under arms j and j'.
double pairwise_covariance(const PotentialTable& table, std::size_t arm, std::size_t other_arm);

// Throws InvalidArgument unless 1 <= l <= J - 1.
void check_effect_index(const ModelMatrix& design, std::size_t l);

}  // namespace factorial
