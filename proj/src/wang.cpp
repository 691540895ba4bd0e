#include "bgsm/wang.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <numeric>

#include "bgsm/error.hpp"
#include "bgsm/parallel.hpp"
#include "bgsm/random.hpp"
#include "bgsm/stats.hpp"

namespace bgsm {
namespace {

Matrix solve_spd(Matrix a, const Matrix& rhs) {
  Eigen::LLT<Matrix> chol(a);
  const double jitter = 1e-10 * std::max(a.trace(), 1.0);
  for (int retry = 0; chol.info() != Eigen::Success; ++retry) {
    if (retry >= 8) throw NumericalError("penalized normal equations are singular");
    a.diagonal().array() += jitter;
    chol.compute(a);
  }
  return chol.solve(rhs);
}

std::uint64_t hash_row(const Matrix& x, const Matrix& y, Index l) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  };
  for (Index j = 0; j < x.cols(); ++j) feed(x(l, j));
  for (Index j = 0; j < y.cols(); ++j) feed(y(l, j));
  return h;
}

void percentile_bounds(const std::vector<Matrix>& reps, double level, Matrix& lower,
                       Matrix& upper) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("interval level must lie in (0, 1)");
  const Index d = reps.front().rows();
  const Index c = reps.front().cols();
  lower.resize(d, c);
  upper.resize(d, c);
  std::vector<double> values(reps.size());
  const double alpha = 0.5 * (1.0 - level);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < d; ++i) {
      for (std::size_t b = 0; b < reps.size(); ++b) values[b] = reps[b](i, j);
      std::sort(values.begin(), values.end());
      lower(i, j) = stats::quantile_sorted(values, alpha);
      upper(i, j) = stats::quantile_sorted(values, 1.0 - alpha);
    }
  }
}

}  // namespace

double smoothed_wang_objective(const Matrix& w, const Matrix& y, const Matrix& x,
                               const GroupStructure& groups, double gamma1, double gamma2,
                               double eps) {
  double g21 = 0.0;
  double l21 = 0.0;
  for (Index k = 0; k < groups.num_groups(); ++k) {
    double block_sq = 0.0;
    for (Index i : groups.members(k)) {
      const double row_sq = w.row(i).squaredNorm();
      block_sq += row_sq;
      l21 += std::sqrt(row_sq + eps);
    }
    g21 += std::sqrt(block_sq + eps);
  }
  return (y - x * w).squaredNorm() + gamma1 * g21 + gamma2 * l21;
}

WangFit fit_wang(const Dataset& data, double gamma1, double gamma2, const WangOptions& options,
                 const Matrix* warm_start) {
  if (gamma1 < 0.0 || gamma2 < 0.0) throw DomainError("penalty weights must be nonnegative");
  if (!(options.eps > 0.0) || !(options.tol > 0.0) || options.max_iter <= 0) {
    throw InputError("invalid solver options");
  }
  const auto& groups = data.groups;
  const Index d = data.d();
  const Matrix xtx = data.x.transpose() * data.x;
  const Matrix xty = data.x.transpose() * data.y;

  WangFit fit;
  if (warm_start != nullptr) {
    fit.w = *warm_start;
  } else {
    Matrix ridge = xtx;
    ridge.diagonal().array() += 1e-3 * std::max(xtx.trace() / static_cast<double>(d), 1e-8);
    fit.w = solve_spd(std::move(ridge), xty);
  }

  Vector row_norm(d);
  Vector block_norm(groups.num_groups());
#ifndef NDEBUG
  const bool track = true;
#else
  const bool track = options.record_trace;
#endif
  double previous =
      track ? smoothed_wang_objective(fit.w, data.y, data.x, groups, gamma1, gamma2, options.eps)
            : 0.0;
  for (Index iter = 1; iter <= options.max_iter; ++iter) {
    for (Index i = 0; i < d; ++i) row_norm[i] = fit.w.row(i).squaredNorm();
    for (Index k = 0; k < groups.num_groups(); ++k) {
      double s = 0.0;
      for (Index i : groups.members(k)) s += row_norm[i];
      block_norm[k] = std::sqrt(s + options.eps);
    }
    Matrix a = xtx;
    for (Index i = 0; i < d; ++i) {
      a(i, i) += 0.5 * gamma1 / block_norm[groups.group_of(i)] +
                 0.5 * gamma2 / std::sqrt(row_norm[i] + options.eps);
    }
    Matrix next = solve_spd(std::move(a), xty);
    const double change = (next - fit.w).norm();
    const double scale = next.norm();
    fit.w = std::move(next);
    fit.iterations = iter;

    if (track) {
      const double current =
          smoothed_wang_objective(fit.w, data.y, data.x, groups, gamma1, gamma2, options.eps);
      assert(current <= previous + 1e-9 * std::max(1.0, std::abs(previous)));
      previous = current;
      (void)previous;
      if (options.record_trace) fit.objective_trace.push_back(current);
    }
    if (change <= options.tol * scale) {
      fit.converged = true;
      break;
    }
  }
  // The smoothed penalty parks zero rows at a norm of order sqrt(eps) instead of 0.
  if (gamma1 + gamma2 > 0.0) {
    const double cut = 10.0 * std::sqrt(options.eps);
    for (Index i = 0; i < d; ++i) {
      if (fit.w.row(i).norm() < cut) fit.w.row(i).setZero();
    }
  }
  return fit;
}

Dataset subset_rows(const Dataset& data, std::span<const Index> rows) {
  Dataset out;
  out.x.resize(static_cast<Index>(rows.size()), data.d());
  out.y.resize(static_cast<Index>(rows.size()), data.c());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.x.row(static_cast<Index>(r)) = data.x.row(rows[r]);
    out.y.row(static_cast<Index>(r)) = data.y.row(rows[r]);
  }
  out.groups = data.groups;
  out.snp_names = data.snp_names;
  out.phenotype_names = data.phenotype_names;
  return out;
}

std::vector<Index> assign_folds(const Dataset& data, Index folds, std::uint64_t seed) {
  const Index n = data.n();
  if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
  if (n < folds) throw InputError("fewer subjects than folds");
  std::vector<std::pair<std::uint64_t, Index>> keyed(static_cast<std::size_t>(n));
  for (Index l = 0; l < n; ++l) keyed[l] = {mix_seed(seed, hash_row(data.x, data.y, l)), l};
  std::sort(keyed.begin(), keyed.end());
  std::vector<Index> fold_of(static_cast<std::size_t>(n));
  for (Index rank = 0; rank < n; ++rank) fold_of[keyed[rank].second] = rank % folds;
  return fold_of;
}

CvResult cv_select(const Dataset& data, std::span<const PenaltyPair> grid, Index folds,
                   std::uint64_t seed, int workers, const WangOptions& options) {
  if (grid.empty()) throw InputError("empty penalty grid");
  CvResult result;
  result.fold_of = assign_folds(data, folds, seed);

  std::vector<Dataset> train(static_cast<std::size_t>(folds));
  std::vector<Dataset> test(static_cast<std::size_t>(folds));
  for (Index f = 0; f < folds; ++f) {
    std::vector<Index> in;
    std::vector<Index> out;
    for (Index l = 0; l < data.n(); ++l) (result.fold_of[l] == f ? out : in).push_back(l);
    train[f] = subset_rows(data, in);
    test[f] = subset_rows(data, out);
  }

  const Index points = static_cast<Index>(grid.size());
  Matrix rss(points, folds);
  parallel_for(points * folds, workers, [&](Index task) {
    const Index g = task / folds;
    const Index f = task % folds;
    const WangFit fit = fit_wang(train[f], grid[g].gamma1, grid[g].gamma2, options);
    rss(g, f) = (test[f].y - test[f].x * fit.w).squaredNorm();
  });

  result.heldout_rss.resize(static_cast<std::size_t>(points));
  for (Index g = 0; g < points; ++g) {
    result.heldout_rss[g] = rss.row(g).mean();
    if (result.heldout_rss[g] < result.heldout_rss[result.best_index]) result.best_index = g;
  }
  result.best = grid[result.best_index];
  return result;
}

void BootstrapResult::recompute_intervals(double new_level) {
  if (replicate_estimates.empty()) throw InputError("no bootstrap replicates stored");
  level = new_level;
  percentile_bounds(replicate_estimates, level, lower, upper);
}

BootstrapResult bootstrap_from_indices(const Dataset& data, double gamma1, double gamma2,
                                       const std::vector<std::vector<Index>>& resamples,
                                       double level, int workers, const WangOptions& options) {
  if (resamples.empty()) throw InputError("no bootstrap resamples");
  BootstrapResult out;
  out.replicates = static_cast<Index>(resamples.size());
  out.level = level;
  out.tuning = {gamma1, gamma2};
  out.estimate = fit_wang(data, gamma1, gamma2, options).w;
  out.replicate_estimates.resize(resamples.size());
  std::vector<char> converged(resamples.size(), 0);
  parallel_for(out.replicates, workers, [&](Index b) {
    const Dataset sample = subset_rows(data, resamples[b]);
    WangFit fit = fit_wang(sample, gamma1, gamma2, options);
    converged[b] = fit.converged ? 1 : 0;
    out.replicate_estimates[b] = std::move(fit.w);
  });
  out.nonconverged = static_cast<Index>(std::count(converged.begin(), converged.end(), 0));
  percentile_bounds(out.replicate_estimates, level, out.lower, out.upper);
  return out;
}

BootstrapResult bootstrap_intervals(const Dataset& data, double gamma1, double gamma2,
                                    Index replicates, double level, std::uint64_t seed,
                                    int workers, const WangOptions& options) {
  if (replicates < 100) throw InputError("bootstrap needs at least 100 replicates");
  std::vector<std::vector<Index>> resamples(static_cast<std::size_t>(replicates));
  for (Index b = 0; b < replicates; ++b) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(b)));
    auto& rows = resamples[b];
    rows.resize(static_cast<std::size_t>(data.n()));
    for (auto& r : rows) r = rng.uniform_index(data.n());
  }
  return bootstrap_from_indices(data, gamma1, gamma2, resamples, level, workers, options);
}

}  // namespace bgsm
