#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bgsm/random.hpp"
#include "bgsm/types.hpp"

namespace bgsm {

enum class ErrorFamily { gaussian, student_t4 };

std::string to_string(ErrorFamily family);
ErrorFamily parse_error_family(const std::string& text);

/// Ground-truth generation and fitting protocol for one coverage study.
/// Defaults describe a reduced-size analog of the gene-level simulation:
/// d = 20 SNPs in K = 4 genes, c = 4 phenotypes.
struct StudyDesign {
  // data
  Index n = 100;
  Index c = 4;
  std::vector<Index> group_sizes{6, 6, 4, 4};
  ErrorFamily family = ErrorFamily::gaussian;
  double lambda1_sq = 2.0;
  double lambda2_sq = 2.0;
  double sigma2 = 2.0;
  std::vector<Index> active_genes{3};  // every SNP of these genes stays nonzero
  Index extra_active_rows = 2;         // further nonzero rows, in other genes
  double maf_min = 0.05;
  double maf_max = 0.5;
  double ld_correlation = 0.7;         // latent within-gene correlation
  bool redraw_truth = false;           // new genotypes and W for every replicate

  // protocol
  Index replicates = 50;
  std::uint64_t seed = 20170101;
  double level = 0.95;
  Index iterations = 3000;
  Index burn_in = 1000;
  Index thin = 1;
  std::string bayes_grid = "-1:1";     // TuningGrid spec, or "truth"
  std::string cv_grid = "-2:2";        // log10 exponents for gamma1 = gamma2 axes
  Index folds = 5;
  Index bootstrap_replicates = 200;
  int workers = 1;

  Index d() const;
  Index num_groups() const { return static_cast<Index>(group_sizes.size()); }
  Index active_rows() const;
  void validate() const;

  /// key = value lines; unknown keys are an InputError.
  static StudyDesign parse(const std::string& text);
  std::string to_config() const;
};

/// Minor-allele counts under Hardy-Weinberg with per-SNP MAF ~ U(maf_min, maf_max);
/// SNPs of one gene share an exchangeable Gaussian copula with correlation `ld_correlation`.
Matrix simulate_genotypes(Index n, const GroupStructure& groups, double maf_min, double maf_max,
                          double ld_correlation, Rng& rng);

/// w_ij ~ N(0, sigma2 / (1/tau2_k(i) + 1/omega2_i)), independently.
Matrix draw_coefficients(const MixingState& mix, const GroupStructure& groups, Index c, Rng& rng);

struct TruthDraw {
  Matrix w;
  MixingState mix;
  std::vector<Index> active_rows;  // ascending
};

/// tau2_k ~ Gamma((m_k c + 1)/2, rate lambda1^2/2), omega2_i ~ Gamma((c + 1)/2, rate lambda2^2/2),
/// W from the scale mixture, then every row outside the active layout set to exactly zero.
TruthDraw simulate_truth(const StudyDesign& design, const GroupStructure& groups, Rng& rng);

/// Y = XW + E; E rows are N(0, sigma2 I_c) or multivariate t_4 with scale matrix sigma2 I_c.
Matrix simulate_phenotypes(const Matrix& x, const Matrix& w, double sigma2, ErrorFamily family,
                           Rng& rng);

struct MethodCoverage {
  std::string method;
  Matrix coverage;  // per parameter, fraction of successful replicates covering the truth
  Index replicates_used = 0;
  Index failures = 0;
  double mcp_overall = 0.0;
  double mcp_active = 0.0;  // over (replicate, parameter) pairs with nonzero truth
};

struct CoverageTable {
  std::vector<MethodCoverage> methods;
  std::vector<std::string> warnings;

  const MethodCoverage& method(const std::string& name) const;
};

struct StudyMethods {
  bool bayes = true;
  bool bootstrap = true;
};

struct StudyHooks {
  /// Called on every interval pair before coverage is scored.
  std::function<void(Matrix& lower, Matrix& upper)> adjust_intervals;
};

CoverageTable run_study(const StudyDesign& design, StudyMethods methods = {},
                        const StudyHooks& hooks = {});

}  // namespace bgsm
