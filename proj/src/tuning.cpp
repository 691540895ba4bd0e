#include "bgsm/tuning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <optional>
#include <sstream>

#include "bgsm/error.hpp"
#include "bgsm/parallel.hpp"
#include "bgsm/random.hpp"
#include "bgsm/stats.hpp"

namespace bgsm {

WaicTerms waic(const Matrix& loglik) {
  const Index draws = loglik.rows();
  if (draws < 2) throw InputError("WAIC needs at least 2 stored draws");
  WaicTerms out;
  std::vector<double> column(static_cast<std::size_t>(draws));
  const double log_draws = std::log(static_cast<double>(draws));
  for (Index l = 0; l < loglik.cols(); ++l) {
    for (Index s = 0; s < draws; ++s) column[s] = loglik(s, l);
    out.lppd += stats::log_sum_exp(column) - log_draws;
    out.penalty += stats::sample_variance(column);
  }
  out.waic = -2.0 * out.lppd + 2.0 * out.penalty;
  return out;
}

WaicTerms waic(const ChainOutput& chain) { return waic(chain.loglik); }

TuningGrid::TuningGrid(std::vector<GridPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw InputError("tuning grid is empty");
  for (const auto& p : points_) {
    if (!(p.lambda1_sq > 0.0) || !(p.lambda2_sq > 0.0)) {
      throw InputError("tuning grid values must be positive");
    }
  }
  std::vector<GridPoint> sorted = points_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("tuning grid contains duplicate points");
  }
}

TuningGrid TuningGrid::product(const std::vector<double>& axis1, const std::vector<double>& axis2) {
  std::vector<double> a = axis1;
  std::vector<double> b = axis2;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<GridPoint> points;
  for (double l1 : a) {
    for (double l2 : b) points.push_back({l1, l2});
  }
  return TuningGrid(std::move(points));
}

TuningGrid TuningGrid::log10_square(int lo, int hi) {
  if (lo > hi) throw InputError("grid exponent range is empty");
  std::vector<double> axis;
  for (int e = lo; e <= hi; ++e) axis.push_back(std::pow(10.0, e));
  return product(axis, axis);
}

TuningGrid TuningGrid::full() { return log10_square(-5, 5); }
TuningGrid TuningGrid::subgrid49() { return log10_square(-3, 3); }

namespace {

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw InputError("");
    } catch (const std::exception&) {
      throw InputError("bad grid value '" + item + "'");
    }
  }
  if (out.empty()) throw InputError("grid axis has no values");
  return out;
}

}  // namespace

TuningGrid TuningGrid::parse(const std::string& spec) {
  if (spec == "full") return full();
  if (spec == "49") return subgrid49();
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    try {
      return log10_square(std::stoi(spec.substr(0, colon)), std::stoi(spec.substr(colon + 1)));
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      throw InputError("bad grid exponent range '" + spec + "'");
    }
  }
  if (const auto slash = spec.find('/'); slash != std::string::npos) {
    return product(parse_values(spec.substr(0, slash)), parse_values(spec.substr(slash + 1)));
  }
  const auto axis = parse_values(spec);
  return product(axis, axis);
}

Index WaicReport::failed() const {
  return static_cast<Index>(std::count_if(rows.begin(), rows.end(), [](const WaicRow& r) { return !r.ok; }));
}

std::uint64_t grid_point_seed(std::uint64_t master, Index index) {
  return mix_seed(master, static_cast<std::uint64_t>(index));
}

GridSearchResult grid_search(const Dataset& data, const TuningGrid& grid, const Hyperparams& base,
                             const SamplerConfig& config, int workers) {
  data.validate();
  config.validate();
  if (config.num_stored() < 2) throw InputError("grid search needs at least 2 stored draws per chain");

  GridSearchResult result;
  auto& rows = result.report.rows;
  rows.resize(static_cast<std::size_t>(grid.size()));

  std::mutex best_mutex;
  std::optional<ChainOutput> best_chain;
  Index best_index = -1;

  parallel_for(grid.size(), workers, [&](Index g) {
    WaicRow& row = rows[g];
    row.point = grid[g];
    row.seed = grid_point_seed(config.seed, g);
    Hyperparams hyper = base;
    hyper.lambda1_sq = row.point.lambda1_sq;
    hyper.lambda2_sq = row.point.lambda2_sq;
    SamplerConfig chain_config = config;
    chain_config.seed = row.seed;

    const auto start = std::chrono::steady_clock::now();
    try {
      ChainOutput chain = run_gibbs(data, hyper, chain_config);
      row.terms = waic(chain);
      row.ok = std::isfinite(row.terms.waic);
      if (!row.ok) row.error = "non-finite WAIC";
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (row.ok) {
        std::lock_guard lock(best_mutex);
        const bool better = best_index < 0 || row.terms.waic < rows[best_index].terms.waic ||
                            (row.terms.waic == rows[best_index].terms.waic && g < best_index);
        if (better) {
          best_index = g;
          best_chain = std::move(chain);
        }
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });

  if (best_index < 0) {
    std::string first_error = rows.empty() ? "" : rows.front().error;
    throw NumericalError("every grid point failed; first error: " + first_error);
  }
  result.report.best = best_index;
  result.best_chain = std::move(*best_chain);
  return result;
}

}  // namespace bgsm
