#include "factorial/assignment.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "factorial/errors.hpp"

namespace factorial {

__extension__ using u128 = unsigned __int128;

namespace {

std::int64_t checked_total(std::span<const std::int64_t> arm_sizes, std::size_t units) {
  if (arm_sizes.empty()) throw InvalidArgument("need at least one arm");
  std::int64_t total = 0;
  for (auto nj : arm_sizes) {
    if (nj < 2) throw InvalidArgument("every arm needs at least 2 units");
    total += nj;
  }
  if (total != static_cast<std::int64_t>(units)) {
    throw InvalidArgument("arm sizes sum to " + std::to_string(total) + " but there are " +
                          std::to_string(units) + " units");
  }
  return total;
}

}  // namespace

ObservedData::ObservedData(int factors, std::vector<std::int64_t> arm_sizes,
                           std::vector<std::int64_t> successes)
    : factors_(factors), arm_sizes_(std::move(arm_sizes)), successes_(std::move(successes)) {
  if (factors < 1 || factors > ModelMatrix::kMaxFactors) {
    throw InvalidArgument("factor count out of range: " + std::to_string(factors));
  }
  const std::size_t arms = std::size_t{1} << factors;
  if (arm_sizes_.size() != arms) {
    throw InvalidArgument("expected " + std::to_string(arms) + " arm sizes, got " +
                          std::to_string(arm_sizes_.size()));
  }
  if (successes_.size() != arms) {
    throw InvalidArgument("expected " + std::to_string(arms) + " success counts, got " +
                          std::to_string(successes_.size()));
  }
  for (std::size_t j = 0; j < arms; ++j) {
    if (arm_sizes_[j] < 2) {
      throw InvalidArgument("arm " + std::to_string(j + 1) + " has fewer than 2 units");
    }
    if (successes_[j] < 0 || successes_[j] > arm_sizes_[j]) {
      throw InvalidArgument("arm " + std::to_string(j + 1) + " successes must be in [0, n_j]");
    }
    units_ += arm_sizes_[j];
  }
}

Assignment draw_assignment(std::span<const std::int64_t> arm_sizes, std::size_t units, Rng& rng) {
  checked_total(arm_sizes, units);
  std::vector<std::uint32_t> order(units);
  std::iota(order.begin(), order.end(), 0U);
  shuffle(std::span<std::uint32_t>(order), rng);

  Assignment out{std::vector<std::uint32_t>(units)};
  std::size_t pos = 0;
  for (std::size_t j = 0; j < arm_sizes.size(); ++j) {
    for (std::int64_t c = 0; c < arm_sizes[j]; ++c) out.arm_of[order[pos++]] = static_cast<std::uint32_t>(j);
  }
  return out;
}

ObservedData observe(const PotentialTable& table, const Assignment& assignment) {
  if (assignment.arm_of.size() != table.units()) {
    throw InvalidArgument("assignment covers a different number of units than the population");
  }
  std::vector<std::int64_t> sizes(table.arms(), 0);
  std::vector<std::int64_t> successes(table.arms(), 0);
  for (std::size_t i = 0; i < table.units(); ++i) {
    const std::size_t j = assignment.arm_of[i];
    if (j >= table.arms()) throw InvalidArgument("assignment refers to a nonexistent arm");
    ++sizes[j];
    successes[j] += table(i, j);
  }
  return ObservedData(table.factors(), std::move(sizes), std::move(successes));
}

std::uint64_t count_assignments(std::span<const std::int64_t> arm_sizes, std::uint64_t cap) {
  // Product of binomial coefficients C(n_1 + ... + n_j, n_j), with overflow
  // and cap checks at every step.
  u128 count = 1;
  std::int64_t placed = 0;
  for (auto nj : arm_sizes) {
    if (nj < 0) throw InvalidArgument("arm sizes must be nonnegative");
    for (std::int64_t k = 1; k <= nj; ++k) {
      ++placed;
      count = count * static_cast<unsigned>(placed) / static_cast<unsigned>(k);
      if (count > cap) {
        throw ResourceLimit("number of assignments exceeds " + std::to_string(cap));
      }
    }
  }
  return static_cast<std::uint64_t>(count);
}

AssignmentEnumerator::AssignmentEnumerator(std::size_t units, std::span<const std::int64_t> arm_sizes) {
  checked_total(arm_sizes, units);
  total_ = count_assignments(arm_sizes, kMaxAssignments);
  current_.arm_of.reserve(units);
  for (std::size_t j = 0; j < arm_sizes.size(); ++j) {
    current_.arm_of.insert(current_.arm_of.end(), static_cast<std::size_t>(arm_sizes[j]),
                           static_cast<std::uint32_t>(j));
  }
}

bool AssignmentEnumerator::next() {
  if (!started_) {
    started_ = true;
    return true;
  }
  return std::next_permutation(current_.arm_of.begin(), current_.arm_of.end());
}

}  // namespace factorial
