#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bgsm/types.hpp"

namespace bgsm {

/// Posterior summary per (SNP, phenotype).
struct IntervalReport {
  Matrix mean;
  Matrix lower;
  Matrix upper;
  double level = 0.95;
  std::vector<std::string> snp_names;
  std::vector<std::string> phenotype_names;

  Index num_snps() const { return mean.rows(); }
  Index num_phenotypes() const { return mean.cols(); }
  /// The interval excludes zero (strictly: an endpoint equal to 0 does not count).
  bool selected(Index snp, Index phenotype) const {
    return lower(snp, phenotype) > 0.0 || upper(snp, phenotype) < 0.0;
  }
  bool snp_selected(Index snp) const;
  Index snp_index(const std::string& name) const;
};

/// Equal-tail intervals from empirical quantiles (linear interpolation
/// between order statistics) and draw-average means. Needs at least
/// `min_draws` draws.
IntervalReport credible_intervals(const std::vector<Matrix>& draws, double level,
                                  Index min_draws = 100);
IntervalReport credible_intervals(const ChainOutput& chain, double level, Index min_draws = 100);

struct Selection {
  std::vector<std::pair<Index, Index>> pairs;  // (snp, phenotype), SNP-major order
  std::vector<Index> snps;                     // deduplicated, ascending
};

Selection select_snps(const IntervalReport& report);

struct RankedSnp {
  Index snp = 0;
  double score = 0.0;  // sum over phenotypes of |w_ij|
};

/// Descending by score, ties by ascending SNP index.
std::vector<RankedSnp> rank_snps(const Matrix& w_hat);

struct Standardization {
  Matrix y;     // standardized phenotypes
  Vector mean;  // per column
  Vector sd;    // per column, (n - 1) denominator

  Matrix back_transform(const Matrix& standardized) const;
};

/// Centers each column and scales it to unit sample variance. Throws
/// InputError naming the column when its variance is zero.
Standardization standardize_phenotypes(const Matrix& y_raw,
                                       const std::vector<std::string>& names = {});

/// SVG interval plot for one SNP: one interval glyph per phenotype in column
/// order, posterior mean marked, optional second estimate (e.g. the penalized
/// point estimate) overlaid. Output bytes depend only on the inputs.
std::string render_interval_plot(const IntervalReport& report, Index snp,
                                 const Matrix* overlay = nullptr);
void emit_interval_plot(const IntervalReport& report, const std::string& snp,
                        const std::filesystem::path& path, const Matrix* overlay = nullptr);

}  // namespace bgsm
