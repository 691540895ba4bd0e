#pragma once

#include "bgsm/types.hpp"

namespace bgsm {

/// Sum over subjects of log N_c(y_l; W'x_l, sigma2 I_c).
double log_likelihood(const Matrix& y, const Matrix& x, const Matrix& w, double sigma2);

/// Per-subject terms of log_likelihood, length n.
Vector subject_log_likelihoods(const Matrix& y, const Matrix& x, const Matrix& w, double sigma2);

/// Same as subject_log_likelihoods but from a precomputed residual Y - XW.
Vector subject_log_likelihoods_from_residual(const Matrix& residual, double sigma2);

struct GroupNorms {
  double g21 = 0.0;  // sum over groups of the Frobenius norm of the block
  double l21 = 0.0;  // sum over SNPs of the Euclidean norm of the row
};

GroupNorms group_norms(const Matrix& w, const GroupStructure& groups);

/// Residual sum of squares plus gamma1 * G21 + gamma2 * L21.
double wang_objective(const Matrix& w, const Matrix& y, const Matrix& x,
                      const GroupStructure& groups, double gamma1, double gamma2);

/// Unnormalized log prior of W given (lambda1, lambda2, sigma):
/// -(lambda1/sigma) G21 - (lambda2/sigma) L21.
///
/// The kernel's normalizer is sigma^{dc} times a constant in the lambdas, so
/// only differences at fixed sigma are meaningful without that factor.
double log_prior_kernel(const Matrix& w, const GroupStructure& groups, double lambda1,
                        double lambda2, double sigma);

/// log of pi^{(mc-1)/2} Gamma((mc+1)/2) 2^{mc} (lambda1^2/sigma^2)^{-mc/2},
/// the closed-form integral of the lambda2 = 0 group kernel that bounds the
/// normalizer of one group block.
double log_propriety_bound(Index m, Index c, double lambda1, double sigma);
double propriety_bound(Index m, Index c, double lambda1, double sigma);

}  // namespace bgsm
