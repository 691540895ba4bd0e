#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bgsm/types.hpp"

namespace bgsm {

struct WangOptions {
  double tol = 1e-6;       // relative change in W that stops the iteration
  Index max_iter = 1000;
  double eps = 1e-10;      // norms are smoothed as sqrt(. + eps)
  bool record_trace = false;
};

struct WangFit {
  Matrix w;
  bool converged = false;
  Index iterations = 0;
  std::vector<double> objective_trace;  // smoothed objective after each iteration
};

/// Penalized objective with every norm replaced by sqrt(norm^2 + eps).
double smoothed_wang_objective(const Matrix& w, const Matrix& y, const Matrix& x,
                               const GroupStructure& groups, double gamma1, double gamma2,
                               double eps);

/// Minimizes RSS + gamma1 G21 + gamma2 L21 by majorize-minimize: each step
/// solves (X'X + diag(q)) W = X'Y with per-row weights
/// q_i = gamma1 / (2 ||W^(k(i))||_eps) + gamma2 / (2 ||w^i||_eps).
/// Starts from a light ridge fit unless `warm_start` is given.
WangFit fit_wang(const Dataset& data, double gamma1, double gamma2,
                 const WangOptions& options = {}, const Matrix* warm_start = nullptr);

struct PenaltyPair {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

/// Fold label per subject. Each subject's label depends only on the seed and
/// the content of its (x, y) row, so reordering subjects does not change
/// which subjects share a fold.
std::vector<Index> assign_folds(const Dataset& data, Index folds, std::uint64_t seed);

struct CvResult {
  PenaltyPair best;
  Index best_index = 0;
  std::vector<double> heldout_rss;  // per grid point, averaged over folds
  std::vector<Index> fold_of;
};

/// K-fold CV over the grid, minimizing mean held-out RSS summed over
/// phenotypes. Ties go to the smallest grid index.
CvResult cv_select(const Dataset& data, std::span<const PenaltyPair> grid, Index folds = 5,
                   std::uint64_t seed = 1, int workers = 1, const WangOptions& options = {});

struct BootstrapResult {
  Index replicates = 0;
  double level = 0.95;
  PenaltyPair tuning;
  Matrix estimate;  // fit on the full data
  Matrix lower;
  Matrix upper;
  Index nonconverged = 0;  // replicates that hit max_iter (still included)
  std::vector<Matrix> replicate_estimates;

  double converged_fraction() const {
    return replicates == 0 ? 0.0
                           : 1.0 - static_cast<double>(nonconverged) / static_cast<double>(replicates);
  }
  /// Percentile intervals at another level from the same replicates.
  void recompute_intervals(double new_level);
};

/// Nonparametric subject-level bootstrap with fixed tuning. Requires B >= 100.
BootstrapResult bootstrap_intervals(const Dataset& data, double gamma1, double gamma2,
                                    Index replicates = 1000, double level = 0.95,
                                    std::uint64_t seed = 1, int workers = 1,
                                    const WangOptions& options = {});

/// Same as bootstrap_intervals but with caller-supplied resample index sets.
BootstrapResult bootstrap_from_indices(const Dataset& data, double gamma1, double gamma2,
                                       const std::vector<std::vector<Index>>& resamples,
                                       double level = 0.95, int workers = 1,
                                       const WangOptions& options = {});

/// Subset of subjects (rows) of a dataset; groups and names are shared.
Dataset subset_rows(const Dataset& data, std::span<const Index> rows);

}  // namespace bgsm
