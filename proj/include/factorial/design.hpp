#pragma once

// 2^K factorial model matrix.
//
// Column 0 is the intercept. Columns 1..K are the main effects: column k has
// blocks of 2^(K-k) entries alternating -1, +1. Columns K+1..J-1 are the
// interactions, one per factor subset of size >= 2, ordered by cardinality
// and then lexicographically; each is the entry-wise product of its factors'
// main-effect columns. Row j of columns 1..K is treatment combination z_j.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace factorial {

class ModelMatrix {
 public:
  static constexpr int kMaxFactors = 10;

  // Throws InvalidArgument unless 1 <= factors <= max_factors.
  explicit ModelMatrix(int factors, int max_factors = kMaxFactors);

  int factors() const noexcept { return factors_; }
  // J = 2^K; the matrix is J x J.
  std::size_t size() const noexcept { return size_; }

  int operator()(std::size_t row, std::size_t col) const {
    return entries_[row * size_ + col];
  }

  std::vector<int> column(std::size_t col) const;

  // Factors (1-based) whose product defines column `col`; empty for column 0.
  const std::vector<int>& subset(std::size_t col) const { return subsets_[col]; }

  // Conventional label, e.g. "A", "B", "AB". Column 0 is "I".
  std::string label(std::size_t col) const;

 private:
  int factors_;
  std::size_t size_;
  std::vector<std::int8_t> entries_;
  std::vector<std::vector<int>> subsets_;
};

ModelMatrix build_model_matrix(int factors);

// Element j is z_{j+1}: row j of columns 1..K.
std::vector<std::vector<int>> treatment_combinations(const ModelMatrix& design);

}  // namespace factorial
