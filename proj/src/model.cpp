#include "bgsm/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bgsm/error.hpp"

namespace bgsm {
namespace {

void check_regression_shapes(const Matrix& y, const Matrix& x, const Matrix& w) {
  if (x.rows() != y.rows() || x.cols() != w.rows() || w.cols() != y.cols()) {
    std::ostringstream msg;
    msg << "shape mismatch: Y is " << y.rows() << "x" << y.cols() << ", X is " << x.rows() << "x"
        << x.cols() << ", W is " << w.rows() << "x" << w.cols();
    throw InputError(msg.str());
  }
}

void check_group_rows(const Matrix& w, const GroupStructure& groups) {
  if (groups.num_snps() != w.rows()) {
    std::ostringstream msg;
    msg << "group structure covers " << groups.num_snps() << " rows but W has " << w.rows();
    throw InputError(msg.str());
  }
}

}  // namespace

Vector subject_log_likelihoods_from_residual(const Matrix& residual, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
  const double c = static_cast<double>(residual.cols());
  const double norm_const = -0.5 * c * std::log(2.0 * std::numbers::pi * sigma2);
  return (norm_const - residual.rowwise().squaredNorm().array() / (2.0 * sigma2)).matrix();
}

Vector subject_log_likelihoods(const Matrix& y, const Matrix& x, const Matrix& w, double sigma2) {
  check_regression_shapes(y, x, w);
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
  const Matrix residual = y - x * w;
  return subject_log_likelihoods_from_residual(residual, sigma2);
}

double log_likelihood(const Matrix& y, const Matrix& x, const Matrix& w, double sigma2) {
  return subject_log_likelihoods(y, x, w, sigma2).sum();
}

GroupNorms group_norms(const Matrix& w, const GroupStructure& groups) {
  check_group_rows(w, groups);
  GroupNorms out;
  for (Index k = 0; k < groups.num_groups(); ++k) {
    double block_sq = 0.0;
    for (Index i : groups.members(k)) {
      const double row_sq = w.row(i).squaredNorm();
      block_sq += row_sq;
      out.l21 += std::sqrt(row_sq);
    }
    out.g21 += std::sqrt(block_sq);
  }
  return out;
}

double wang_objective(const Matrix& w, const Matrix& y, const Matrix& x,
                      const GroupStructure& groups, double gamma1, double gamma2) {
  check_regression_shapes(y, x, w);
  if (gamma1 < 0.0 || gamma2 < 0.0) throw DomainError("penalty weights must be nonnegative");
  const GroupNorms norms = group_norms(w, groups);
  return (y - x * w).squaredNorm() + gamma1 * norms.g21 + gamma2 * norms.l21;
}

double log_prior_kernel(const Matrix& w, const GroupStructure& groups, double lambda1,
                        double lambda2, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw DomainError("lambdas must be nonnegative");
  const GroupNorms norms = group_norms(w, groups);
  return -(lambda1 / sigma) * norms.g21 - (lambda2 / sigma) * norms.l21;
}

double log_propriety_bound(Index m, Index c, double lambda1, double sigma) {
  if (m <= 0 || c <= 0 || !(lambda1 > 0.0) || !(sigma > 0.0)) {
    throw DomainError("propriety bound needs positive arguments");
  }
  const double dim = static_cast<double>(m * c);
  return 0.5 * (dim - 1.0) * std::log(std::numbers::pi) + std::lgamma(0.5 * (dim + 1.0)) +
         dim * std::log(2.0) - 0.5 * dim * (2.0 * std::log(lambda1) - 2.0 * std::log(sigma));
}

double propriety_bound(Index m, Index c, double lambda1, double sigma) {
  return std::exp(log_propriety_bound(m, c, lambda1, sigma));
}

}  // namespace bgsm
