#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "bgsm/error.hpp"
#include "bgsm/model.hpp"
#include "bgsm/wang.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bgsm;

TEST_CASE("unpenalized fit is least squares") {
  for (int rep = 0; rep < 10; ++rep) {
    Dataset data = fixture::make_dataset(30, {2, 3, 1}, 3, 200 + rep);
    const auto fit = fit_wang(data, 0.0, 0.0);
    const Matrix ols = data.x.householderQr().solve(data.y);
    CHECK((fit.w - ols).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("huge penalties shrink everything") {
  Dataset data = fixture::make_dataset(30, {2, 2}, 2, 3, 1.0);
  data.y /= data.y.norm() / std::sqrt(static_cast<double>(data.y.size()));
  CHECK(fit_wang(data, 1e8, 1e8).w.norm() < 1e-3);
}

TEST_CASE("MM iterations decrease the smoothed objective") {
  for (int rep = 0; rep < 20; ++rep) {
    Dataset data = fixture::make_dataset(15 + rep, {2, 3, 2}, 2, 300 + rep, 1.0, {0, 1, 4});
    WangOptions opt;
    opt.record_trace = true;
    const auto fit = fit_wang(data, 1.0 + rep, 0.5 * rep, opt);
    REQUIRE(!fit.objective_trace.empty());
    for (std::size_t t = 1; t < fit.objective_trace.size(); ++t) {
      CHECK(fit.objective_trace[t] <= fit.objective_trace[t - 1] * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("fit is a local minimum of the objective") {
  Dataset data = fixture::make_dataset(25, {2, 2}, 2, 7, 1.0);
  const double g1 = 3.0, g2 = 2.0;
  WangOptions opt;
  opt.tol = 1e-10;
  opt.max_iter = 20000;
  const auto fit = fit_wang(data, g1, g2, opt);
  const double at_fit = wang_objective(fit.w, data.y, data.x, data.groups, g1, g2);
  std::mt19937_64 gen(7);
  int worse = 0;
  for (int t = 0; t < 200; ++t) {
    Matrix delta = fixture::random_matrix(4, 2, gen);
    delta *= 1e-3 / delta.norm();
    if (wang_objective(fit.w + delta, data.y, data.x, data.groups, g1, g2) >= at_fit - 1e-9) ++worse;
  }
  CHECK(worse == 200);
}

TEST_CASE("iteration cap is reported") {
  Dataset data = fixture::make_dataset(20, {2, 2}, 2, 8);
  WangOptions opt;
  opt.max_iter = 1;
  const auto fit = fit_wang(data, 5.0, 5.0, opt);
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 1);
}

TEST_CASE("fold assignment") {
  Dataset data = fixture::make_dataset(23, {2, 2}, 2, 9);
  const auto folds = assign_folds(data, 5, 4);
  std::vector<int> counts(5, 0);
  for (Index f : folds) ++counts[f];
  for (int c : counts) {
    CHECK(c >= 4);
    CHECK(c <= 5);
  }
  // permuting subjects permutes labels along with them
  std::vector<Index> order(23);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(3));
  const Dataset permuted = subset_rows(data, order);
  const auto permuted_folds = assign_folds(permuted, 5, 4);
  for (Index r = 0; r < 23; ++r) CHECK(permuted_folds[r] == folds[order[r]]);
}

TEST_CASE("cross-validation") {
  Dataset data = fixture::make_dataset(40, {2, 2}, 2, 10, 0.5);
  const std::vector<PenaltyPair> single{{1.0, 1.0}};
  CHECK(cv_select(data, single).best_index == 0);

  const std::vector<PenaltyPair> grid{{0.1, 0.1}, {1.0, 1.0}, {10.0, 10.0}, {1e4, 1e4}};
  const auto cv = cv_select(data, grid, 5, 3);
  CHECK(cv.heldout_rss.size() == 4);
  CHECK(cv.heldout_rss[cv.best_index] <= cv.heldout_rss[3]);

  std::vector<Index> order(40);
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  const auto again = cv_select(subset_rows(data, order), grid, 5, 3);
  CHECK(again.best_index == cv.best_index);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CHECK(again.heldout_rss[g] == doctest::Approx(cv.heldout_rss[g]).epsilon(1e-9));
  }

  const auto parallel = cv_select(data, grid, 5, 3, 3);
  CHECK(parallel.heldout_rss == cv.heldout_rss);
  CHECK_THROWS_AS(cv_select(subset_rows(data, std::vector<Index>{0, 1, 2}), grid, 5, 3), InputError);
}

TEST_CASE("bootstrap with zero response") {
  Dataset data = fixture::make_dataset(20, {2, 1}, 2, 11);
  data.y.setZero();
  const auto boot = bootstrap_intervals(data, 1.0, 1.0, 100, 0.95, 2);
  CHECK(boot.estimate.norm() == 0.0);
  CHECK(boot.lower.norm() == 0.0);
  CHECK(boot.upper.norm() == 0.0);
  CHECK(boot.converged_fraction() == 1.0);
}

TEST_CASE("bootstrap percentiles are order statistics of the replicates") {
  Dataset data;
  data.groups = GroupStructure::contiguous(std::vector<Index>{1});
  data.x = Matrix(5, 1);
  data.x << 0, 1, 2, 1, 2;
  data.y = Matrix(5, 1);
  data.y << 0.1, 1.3, 1.7, 0.8, 2.4;
  const std::vector<std::vector<Index>> resamples{{0, 1, 1, 2, 3}, {1, 2, 3, 4, 4}, {0, 0, 2, 2, 4}, {1, 3, 3, 4, 2}};
  const auto boot = bootstrap_from_indices(data, 0.0, 0.0, resamples, 0.5);
  std::vector<double> estimates;
  for (const auto& rows : resamples) {
    double xy = 0.0, xx = 0.0;
    for (Index r : rows) {
      xy += data.x(r, 0) * data.y(r, 0);
      xx += data.x(r, 0) * data.x(r, 0);
    }
    estimates.push_back(xy / xx);
  }
  std::sort(estimates.begin(), estimates.end());
  // level 0.5 -> quantiles 0.25 and 0.75 -> h = 0.75 and 2.25
  CHECK(boot.lower(0, 0) == doctest::Approx(estimates[0] + 0.75 * (estimates[1] - estimates[0])).epsilon(1e-6));
  CHECK(boot.upper(0, 0) == doctest::Approx(estimates[2] + 0.25 * (estimates[3] - estimates[2])).epsilon(1e-6));
}

TEST_CASE("bootstrap intervals nest across levels and are reproducible") {
  Dataset data = fixture::make_dataset(30, {2, 2}, 2, 12, 1.0, {0, 2});
  auto boot = bootstrap_intervals(data, 2.0, 1.0, 120, 0.95, 5, 2);
  const auto again = bootstrap_intervals(data, 2.0, 1.0, 120, 0.95, 5, 1);
  CHECK(boot.lower == again.lower);
  CHECK(boot.upper == again.upper);
  CHECK((boot.lower.array() <= boot.upper.array()).all());
  const Matrix lo95 = boot.lower, hi95 = boot.upper;
  boot.recompute_intervals(0.9);
  CHECK((boot.lower.array() >= lo95.array()).all());
  CHECK((boot.upper.array() <= hi95.array()).all());
  CHECK_THROWS_AS(bootstrap_intervals(data, 1.0, 1.0, 50), InputError);
}
