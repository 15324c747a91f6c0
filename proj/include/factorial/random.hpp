#pragma once

// Seeded random streams with platform-independent output.
//
// The engine is xoshiro256** (Blackman & Vigna, 2018), seeded through
// splitmix64. Every variate generator below is implemented here rather than
// taken from <random>, whose distributions are implementation-defined; a
// given (seed, keys) pair therefore yields the same stream on every platform
// and standard library.
//
// Substreams: Rng::substream(seed, {a, b, ...}) hashes the master seed and the
// keys into an independent starting state. Parallel work keys its stream by
// the work item's indices, never by thread id.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace factorial {

inline constexpr const char* kRngAlgorithm = "xoshiro256**/splitmix64 v1";

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  // Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  double normal();
  // Gamma(shape, 1), shape > 0.
  double gamma(double shape);
  // log of a Gamma(shape, 1) variate; stays finite for tiny shapes.
  double log_gamma_variate(double shape);
  // Beta(a, b), a, b > 0.
  double beta(double a, double b);
  // Binomial(n, p); p is clamped to [0, 1].
  std::int64_t binomial(std::int64_t n, double p);
  // Multinomial(n, probs); probs need not be normalized.
  std::vector<std::int64_t> multinomial(std::int64_t n, std::span<const double> probs);

 private:
  std::int64_t binomial_inversion(std::int64_t n, double p);
  std::int64_t binomial_btrd(std::int64_t n, double p);

  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Fisher-Yates shuffle driven by Rng::below.
template <typename T>
void shuffle(std::span<T> values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace factorial
