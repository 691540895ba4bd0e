#pragma once

#include <cstdint>
#include <random>

#include "bgsm/types.hpp"

namespace bgsm {

/// splitmix64 finalizer; used to derive independent per-task seeds from a
/// master seed and a task index.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

/// Per-chain random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the distributions come from
/// Boost.Random so that draws do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();        // (0, 1)
  double normal();         // N(0, 1)
  double gamma(double shape, double rate);
  double inverse_gamma(double shape, double scale);
  double chi_squared(double df);
  /// Inverse-Gaussian with the given mean and shape.
  double inverse_gaussian(double mean, double shape);
  Index uniform_index(Index n);  // 0..n-1

  void fill_normal(Matrix& m);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Free-function form of Rng::inverse_gaussian; throws DomainError on
/// nonpositive parameters.
double sample_inverse_gaussian(double mean, double shape, Rng& rng);

}  // namespace bgsm
