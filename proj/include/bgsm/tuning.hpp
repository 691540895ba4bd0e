#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bgsm/gibbs.hpp"
#include "bgsm/types.hpp"

namespace bgsm {

struct WaicTerms {
  double waic = 0.0;
  double lppd = 0.0;     // sum over subjects of log mean_s p(y_l | draw s)
  double penalty = 0.0;  // sum over subjects of the sample variance of log p(y_l | draw s)
};

/// WAIC from an S x n matrix of pointwise log-likelihoods (S >= 2).
/// waic = -2 lppd + 2 penalty.
WaicTerms waic(const Matrix& loglik);
WaicTerms waic(const ChainOutput& chain);

struct GridPoint {
  double lambda1_sq = 1.0;
  double lambda2_sq = 1.0;
  auto operator<=>(const GridPoint&) const = default;
};

/// Ordered, duplicate-free list of (lambda1^2, lambda2^2) pairs.
class TuningGrid {
 public:
  TuningGrid() = default;
  explicit TuningGrid(std::vector<GridPoint> points);

  /// Cartesian product, ordered lexicographically in (lambda1^2, lambda2^2).
  static TuningGrid product(const std::vector<double>& axis1, const std::vector<double>& axis2);
  /// {10^lo, ..., 10^hi} on both axes.
  static TuningGrid log10_square(int lo, int hi);
  /// Full {1e-5, ..., 1e5}^2 grid (121 points).
  static TuningGrid full();
  /// 7 x 7 subgrid {1e-3, ..., 1e3}^2 (49 points).
  static TuningGrid subgrid49();

  /// Grid spec forms: "full", "49", "LO:HI" (log10 exponents, both axes),
  /// "a,b,c" (same values on both axes), "a,b/c,d" (axis 1 / axis 2).
  static TuningGrid parse(const std::string& spec);

  const std::vector<GridPoint>& points() const { return points_; }
  Index size() const { return static_cast<Index>(points_.size()); }
  const GridPoint& operator[](Index i) const { return points_[i]; }

 private:
  std::vector<GridPoint> points_;
};

struct WaicRow {
  GridPoint point;
  WaicTerms terms;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  bool ok = false;
  std::string error;
};

struct WaicReport {
  std::vector<WaicRow> rows;
  Index best = -1;

  Index failed() const;
};

struct GridSearchResult {
  WaicReport report;
  ChainOutput best_chain;
};

/// Seed of grid point `index` under master seed `master`.
std::uint64_t grid_point_seed(std::uint64_t master, Index index);

/// One chain per grid point, run on up to `workers` threads. The sampler
/// settings come from `config` (its seed is the master seed); a_sigma and
/// b_sigma from `base`. The argmin of WAIC is chosen over successful points,
/// ties going to the smaller grid index. Throws NumericalError if every chain fails.
GridSearchResult grid_search(const Dataset& data, const TuningGrid& grid, const Hyperparams& base,
                             const SamplerConfig& config, int workers = 1);

}  // namespace bgsm
