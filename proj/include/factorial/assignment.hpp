#pragma once

// Completely randomized assignment and the observed data it produces.
//
// Arms are 0-based in code: arm j here is treatment combination z_{j+1}.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "factorial/population.hpp"
#include "factorial/random.hpp"

namespace factorial {

struct Assignment {
  std::vector<std::uint32_t> arm_of;  // arm_of[i] is unit i's arm
};

class ObservedData {
 public:
  // Validates 0 <= n_obs[j] <= n[j], n[j] >= 2 and n.size() == 2^factors.
  ObservedData(int factors, std::vector<std::int64_t> arm_sizes, std::vector<std::int64_t> successes);

  int factors() const noexcept { return factors_; }
  std::size_t arms() const noexcept { return arm_sizes_.size(); }
  std::int64_t units() const noexcept { return units_; }

  const std::vector<std::int64_t>& arm_sizes() const noexcept { return arm_sizes_; }
  const std::vector<std::int64_t>& successes() const noexcept { return successes_; }

  std::int64_t arm_size(std::size_t j) const { return arm_sizes_[j]; }
  std::int64_t arm_successes(std::size_t j) const { return successes_[j]; }
  // p-hat_j = n_j^obs / n_j
  double arm_rate(std::size_t j) const {
    return static_cast<double>(successes_[j]) / static_cast<double>(arm_sizes_[j]);
  }

 private:
  int factors_;
  std::vector<std::int64_t> arm_sizes_;
  std::vector<std::int64_t> successes_;
  std::int64_t units_ = 0;
};

// Uniform over all partitions of the units into groups of the given sizes:
// a Fisher-Yates permutation cut into consecutive blocks.
Assignment draw_assignment(std::span<const std::int64_t> arm_sizes, std::size_t units, Rng& rng);

ObservedData observe(const PotentialTable& table, const Assignment& assignment);

// Multinomial coefficient N! / prod(n_j!). Throws ResourceLimit above `cap`.
std::uint64_t count_assignments(std::span<const std::int64_t> arm_sizes,
                                std::uint64_t cap = UINT64_MAX);

// Visits every distinct assignment exactly once, in lexicographic order of
// the arm-label sequence.
class AssignmentEnumerator {
 public:
  static constexpr std::uint64_t kMaxAssignments = 10'000'000;

  // Throws ResourceLimit if the number of assignments exceeds kMaxAssignments.
  AssignmentEnumerator(std::size_t units, std::span<const std::int64_t> arm_sizes);

  // Advances to the next assignment; false once all have been visited.
  bool next();
  const Assignment& current() const { return current_; }
  std::uint64_t total() const noexcept { return total_; }

 private:
  Assignment current_;
  std::uint64_t total_ = 0;
  bool started_ = false;
};

}  // namespace factorial
