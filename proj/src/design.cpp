#include "factorial/design.hpp"

#include "factorial/errors.hpp"

namespace factorial {

namespace {

// Subsets of {1..k} with at least two elements, by cardinality then lexicographic.
std::vector<std::vector<int>> interaction_subsets(int k) {
  std::vector<std::vector<int>> out;
  for (int size = 2; size <= k; ++size) {
    std::vector<int> comb(size);
    for (int i = 0; i < size; ++i) comb[i] = i + 1;
    while (true) {
      out.push_back(comb);
      int pos = size - 1;
      while (pos >= 0 && comb[pos] == k - size + pos + 1) --pos;
      if (pos < 0) break;
      ++comb[pos];
      for (int i = pos + 1; i < size; ++i) comb[i] = comb[i - 1] + 1;
    }
  }
  return out;
}

}  // namespace

ModelMatrix::ModelMatrix(int factors, int max_factors) : factors_(factors) {
  if (factors < 1 || factors > max_factors) {
    throw InvalidArgument("factor count must be in [1, " + std::to_string(max_factors) +
                          "], got " + std::to_string(factors));
  }
  size_ = std::size_t{1} << factors;
  entries_.assign(size_ * size_, 1);

  subsets_.reserve(size_);
  subsets_.emplace_back();
  for (int k = 1; k <= factors; ++k) subsets_.push_back({k});
  for (auto& s : interaction_subsets(factors)) subsets_.push_back(std::move(s));

  for (std::size_t row = 0; row < size_; ++row) {
    for (std::size_t col = 1; col < size_; ++col) {
      int v = 1;
      for (int k : subsets_[col]) {
        const bool high = (row >> (factors - k)) & 1U;
        v *= high ? 1 : -1;
      }
      entries_[row * size_ + col] = static_cast<std::int8_t>(v);
    }
  }
}

std::vector<int> ModelMatrix::column(std::size_t col) const {
  std::vector<int> out(size_);
  for (std::size_t row = 0; row < size_; ++row) out[row] = (*this)(row, col);
  return out;
}

std::string ModelMatrix::label(std::size_t col) const {
  if (col == 0) return "I";
  std::string out;
  for (int k : subsets_[col]) {
    if (factors_ <= 26) {
      out.push_back(static_cast<char>('A' + k - 1));
    } else {
      out += "F" + std::to_string(k);
    }
  }
  return out;
}

ModelMatrix build_model_matrix(int factors) { return ModelMatrix(factors); }

std::vector<std::vector<int>> treatment_combinations(const ModelMatrix& design) {
  const auto k = static_cast<std::size_t>(design.factors());
  std::vector<std::vector<int>> out(design.size(), std::vector<int>(k));
  for (std::size_t row = 0; row < design.size(); ++row) {
    for (std::size_t c = 0; c < k; ++c) out[row][c] = design(row, c + 1);
  }
  return out;
}

}  // namespace factorial
