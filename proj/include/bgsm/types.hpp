#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bgsm {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Partition of the SNP indices 0..d-1 into K nonempty groups (genes).
///
/// Internally every index is dense and 0-based; the optional labels carry the
/// gene identifiers read from input files so that outputs can be joined back
/// against annotation tables.
class GroupStructure {
 public:
  GroupStructure() = default;

  /// Throws InputError unless `members` is a partition of 0..d-1 into nonempty sets.
  GroupStructure(std::vector<std::vector<Index>> members, Index d,
                 std::vector<std::string> labels = {});

  /// Builds groups from a per-SNP assignment; group ids must cover 0..K-1.
  static GroupStructure from_assignment(std::span<const Index> group_of,
                                        std::vector<std::string> labels = {});

  /// Consecutive blocks of the given sizes.
  static GroupStructure contiguous(std::span<const Index> sizes);

  Index num_groups() const { return static_cast<Index>(members_.size()); }
  Index num_snps() const { return static_cast<Index>(group_of_.size()); }
  Index size(Index k) const { return static_cast<Index>(members_[k].size()); }
  const std::vector<Index>& members(Index k) const { return members_[k]; }
  Index group_of(Index i) const { return group_of_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::vector<Index> sizes() const;

 private:
  std::vector<std::vector<Index>> members_;
  std::vector<Index> group_of_;
  std::vector<std::string> labels_;
};

/// Rows of W belonging to group k, as an assignable view (m_k x c).
inline auto group_block(Matrix& w, const GroupStructure& groups, Index k) {
  return w(groups.members(k), Eigen::all);
}
inline auto group_block(const Matrix& w, const GroupStructure& groups, Index k) {
  return w(groups.members(k), Eigen::all);
}

/// Genotypes X (n x d, minor-allele counts), phenotypes Y (n x c), SNP groups.
struct Dataset {
  Matrix x;
  Matrix y;
  GroupStructure groups;
  std::vector<std::string> snp_names;
  std::vector<std::string> phenotype_names;

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }
  Index c() const { return y.cols(); }

  /// Checks shapes, genotype coding in {0,1,2}, finiteness, and, when
  /// `require_standardized` is set, zero column means and unit variances.
  void validate(bool require_standardized = false) const;

  /// Fills missing SNP/phenotype names with "snp<i>" / "pheno<j>".
  void ensure_names();
};

/// Scale-mixing variables and the residual variance.
struct MixingState {
  Vector tau2;    // one per group
  Vector omega2;  // one per SNP
  double sigma2 = 1.0;

  static MixingState ones(Index num_groups, Index num_snps);
  void validate() const;
};

struct Hyperparams {
  double lambda1_sq = 1.0;
  double lambda2_sq = 1.0;
  double a_sigma = 1.0;
  double b_sigma = 1.0;

  void validate() const;
};

/// Stored (post burn-in, thinned) draws of one Gibbs chain.
struct ChainOutput {
  std::vector<Matrix> w;   // S draws, each d x c
  Vector sigma2;           // S
  Matrix loglik;           // S x n, log p(y_l | W, sigma2) per stored draw
  Vector log_posterior;    // S, log-likelihood + log prior kernel of W given sigma
  std::uint64_t seed = 0;
  Index iterations = 0;
  Index burn_in = 0;
  Index thin = 1;
  Hyperparams hyper;
  Index jitter_events = 0;  // Cholesky retries during W-block updates

  Index num_draws() const { return static_cast<Index>(w.size()); }
  Matrix posterior_mean() const;
};

}  // namespace bgsm
