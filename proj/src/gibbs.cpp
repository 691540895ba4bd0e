#include "bgsm/gibbs.hpp"

#include <cmath>
#include <sstream>

#include "bgsm/error.hpp"
#include "bgsm/model.hpp"
#include "bgsm/wang.hpp"

namespace bgsm {
namespace {

// Factors A in place; on failure inflates the diagonal by 1e-10 * trace(A).
Eigen::LLT<Matrix> factor_with_jitter(Matrix& precision, int& retries) {
  Eigen::LLT<Matrix> chol(precision);
  retries = 0;
  const double jitter = 1e-10 * precision.trace();
  while (chol.info() != Eigen::Success) {
    if (++retries > 8) throw NumericalError("Cholesky failed after jitter retries");
    precision.diagonal().array() += jitter;
    chol.compute(precision);
  }
  return chol;
}

}  // namespace

void SamplerConfig::validate() const {
  if (iterations <= 0) throw InputError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw InputError("burn_in must lie in [0, iterations)");
  if (thin <= 0) throw InputError("thin must be positive");
  if (!(numeric_floor > 0.0)) throw InputError("numeric_floor must be positive");
}

GramCache::GramCache(const Dataset& data) {
  const auto& groups = data.groups;
  for (Index k = 0; k < groups.num_groups(); ++k) {
    Matrix xk = data.x(Eigen::all, groups.members(k));
    grams_.push_back(xk.transpose() * xk);
    cross_.push_back(xk.transpose() * data.y);
    x_blocks_.push_back(std::move(xk));
  }
}

GibbsState GibbsState::initial(const Dataset& data, Matrix w0) {
  GibbsState state;
  state.w = std::move(w0);
  state.mix = MixingState::ones(data.groups.num_groups(), data.d());
  state.refresh_residual(data);
  return state;
}

void GibbsState::refresh_residual(const Dataset& data) { residual = data.y - data.x * w; }

InvGammaParams sigma2_conditional(const GibbsState& state, const Dataset& data,
                                  const Hyperparams& hyper) {
  const double n = static_cast<double>(data.n());
  const double d = static_cast<double>(data.d());
  const double c = static_cast<double>(data.c());
  double penalty = 0.0;
  for (Index i = 0; i < data.d(); ++i) {
    const double prec = 1.0 / state.mix.tau2[data.groups.group_of(i)] + 1.0 / state.mix.omega2[i];
    penalty += prec * state.w.row(i).squaredNorm();
  }
  return {0.5 * c * (n + d) + hyper.a_sigma,
          0.5 * state.residual.squaredNorm() + 0.5 * penalty + hyper.b_sigma};
}

InvGaussianParams tau2_reciprocal_conditional(const GibbsState& state,
                                              const GroupStructure& groups, Index k,
                                              const Hyperparams& hyper, double numeric_floor) {
  double norm_sq = 0.0;
  for (Index i : groups.members(k)) norm_sq += state.w.row(i).squaredNorm();
  norm_sq = std::max(norm_sq, numeric_floor);
  return {std::sqrt(hyper.lambda1_sq * state.mix.sigma2 / norm_sq), hyper.lambda1_sq};
}

InvGaussianParams omega2_reciprocal_conditional(const GibbsState& state, Index i,
                                                const Hyperparams& hyper, double numeric_floor) {
  const double norm_sq = std::max(state.w.row(i).squaredNorm(), numeric_floor);
  return {std::sqrt(hyper.lambda2_sq * state.mix.sigma2 / norm_sq), hyper.lambda2_sq};
}

double update_sigma2(GibbsState& state, const Dataset& data, const Hyperparams& hyper, Rng& rng) {
  const auto p = sigma2_conditional(state, data, hyper);
  state.mix.sigma2 = rng.inverse_gamma(p.shape, p.scale);
  return state.mix.sigma2;
}

double update_tau2(GibbsState& state, const GroupStructure& groups, Index k,
                   const Hyperparams& hyper, Rng& rng, double numeric_floor) {
  const auto p = tau2_reciprocal_conditional(state, groups, k, hyper, numeric_floor);
  const double tau2 = 1.0 / rng.inverse_gaussian(p.mean, p.shape);
  if (!(tau2 > 0.0) || !std::isfinite(tau2)) throw NumericalError("non-positive tau2 draw");
  state.mix.tau2[k] = tau2;
  return tau2;
}

double update_omega2(GibbsState& state, Index i, const Hyperparams& hyper, Rng& rng,
                     double numeric_floor) {
  const auto p = omega2_reciprocal_conditional(state, i, hyper, numeric_floor);
  const double omega2 = 1.0 / rng.inverse_gaussian(p.mean, p.shape);
  if (!(omega2 > 0.0) || !std::isfinite(omega2)) throw NumericalError("non-positive omega2 draw");
  state.mix.omega2[i] = omega2;
  return omega2;
}

BlockConditional block_conditional(const GibbsState& state, const Dataset& data,
                                   const GramCache& cache, Index k) {
  const auto& members = data.groups.members(k);
  const Matrix wk = group_block(state.w, data.groups, k);
  BlockConditional cond;
  cond.precision = cache.gram(k);
  for (std::size_t r = 0; r < members.size(); ++r) {
    cond.precision(r, r) += 1.0 / state.mix.tau2[k] + 1.0 / state.mix.omega2[members[r]];
  }
  // X_k'(Y - X_{-k} W_{-k}) = X_k' R + X_k'X_k W_k
  const Matrix rhs = cache.x_block(k).transpose() * state.residual + cache.gram(k) * wk;
  Matrix factored = cond.precision;
  int retries = 0;
  cond.mean = factor_with_jitter(factored, retries).solve(rhs);
  return cond;
}

Matrix draw_block(const BlockConditional& cond, double sigma2, Rng& rng, int* jitter_retries) {
  Matrix precision = cond.precision;
  int retries = 0;
  const auto chol = factor_with_jitter(precision, retries);
  if (jitter_retries != nullptr) *jitter_retries = retries;
  Matrix z(cond.mean.rows(), cond.mean.cols());
  rng.fill_normal(z);
  // L' x = z gives cov(x) = A^{-1} for each of the c columns independently.
  chol.matrixU().solveInPlace(z);
  return cond.mean + std::sqrt(sigma2) * z;
}

int update_w_block(GibbsState& state, const Dataset& data, const GramCache& cache, Index k,
                   Rng& rng) {
  const auto& members = data.groups.members(k);
  const Index m = static_cast<Index>(members.size());
  const Index c = data.c();
  const Matrix& xk = cache.x_block(k);

  Matrix precision = cache.gram(k);
  for (Index r = 0; r < m; ++r) {
    precision(r, r) += 1.0 / state.mix.tau2[k] + 1.0 / state.mix.omega2[members[r]];
  }
  Matrix wk = group_block(state.w, data.groups, k);

  // blocks are narrow, so contiguous column dot products beat the blocked GEMM path
  Matrix draw(m, c);
  for (Index j = 0; j < c; ++j) {
    for (Index r = 0; r < m; ++r) draw(r, j) = xk.col(r).dot(state.residual.col(j));
  }
  draw.noalias() += cache.gram(k).lazyProduct(wk);

  int retries = 0;
  const double jitter = 1e-10 * precision.trace();
  Eigen::LLT<Eigen::Ref<Matrix>> chol(precision);
  while (chol.info() != Eigen::Success) {
    if (++retries > 8) throw NumericalError("Cholesky failed after jitter retries");
    precision = cache.gram(k);
    for (Index r = 0; r < m; ++r) {
      precision(r, r) += 1.0 / state.mix.tau2[k] + 1.0 / state.mix.omega2[members[r]] +
                         retries * jitter;
    }
    chol.compute(precision);
  }

  // mean + sigma U^{-1} z = U^{-1} (L^{-1} rhs + sigma z)
  const double sigma = std::sqrt(state.mix.sigma2);
  for (Index j = 0; j < c; ++j) {
    auto col = draw.col(j);
    chol.matrixL().solveInPlace(col);
    for (Index r = 0; r < m; ++r) col[r] += sigma * rng.normal();
    chol.matrixU().solveInPlace(col);
  }

  wk = draw - wk;
  for (Index j = 0; j < c; ++j) {
    for (Index r = 0; r < m; ++r) state.residual.col(j) -= wk(r, j) * xk.col(r);
  }
  group_block(state.w, data.groups, k) = draw;
  return retries;
}

ChainOutput run_gibbs(const Dataset& data, const Hyperparams& hyper,
                      const SamplerConfig& config) {
  data.validate();
  hyper.validate();
  config.validate();

  Matrix w0 = Matrix::Zero(data.d(), data.c());
  if (config.init == InitKind::user) {
    if (config.init_w.rows() != data.d() || config.init_w.cols() != data.c()) {
      throw InputError("user-supplied initial W has the wrong shape");
    }
    w0 = config.init_w;
  } else if (config.init == InitKind::wang) {
    // gamma = 2 sigma lambda with the initial sigma = 1
    w0 = fit_wang(data, 2.0 * std::sqrt(hyper.lambda1_sq), 2.0 * std::sqrt(hyper.lambda2_sq)).w;
  }

  const GramCache cache(data);
  GibbsState state = GibbsState::initial(data, std::move(w0));
  Rng rng(config.seed);

  ChainOutput out;
  out.seed = config.seed;
  out.iterations = config.iterations;
  out.burn_in = config.burn_in;
  out.thin = config.thin;
  out.hyper = hyper;
  const Index stored = config.num_stored();
  out.w.reserve(static_cast<std::size_t>(stored));
  out.sigma2.resize(stored);
  out.loglik.resize(stored, data.n());
  out.log_posterior.resize(stored);

  const double lambda1 = std::sqrt(hyper.lambda1_sq);
  const double lambda2 = std::sqrt(hyper.lambda2_sq);
  const auto& groups = data.groups;
  Index slot = 0;
  for (Index iter = 1; iter <= config.iterations; ++iter) {
    try {
      update_sigma2(state, data, hyper, rng);
      for (Index k = 0; k < groups.num_groups(); ++k) {
        update_tau2(state, groups, k, hyper, rng, config.numeric_floor);
      }
      for (Index i = 0; i < data.d(); ++i) {
        update_omega2(state, i, hyper, rng, config.numeric_floor);
      }
      for (Index k = 0; k < groups.num_groups(); ++k) {
        out.jitter_events += update_w_block(state, data, cache, k, rng);
      }
      if (iter % 256 == 0) state.refresh_residual(data);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "Gibbs chain (seed " << config.seed << ") failed at iteration " << iter << ": "
          << e.what();
      throw NumericalError(msg.str());
    }

    if (iter > config.burn_in && (iter - config.burn_in) % config.thin == 0 && slot < stored) {
      const Vector ll = subject_log_likelihoods_from_residual(state.residual, state.mix.sigma2);
      out.w.push_back(state.w);
      out.sigma2[slot] = state.mix.sigma2;
      out.loglik.row(slot) = ll.transpose();
      out.log_posterior[slot] =
          ll.sum() + log_prior_kernel(state.w, groups, lambda1, lambda2, std::sqrt(state.mix.sigma2));
      ++slot;
    }
  }
  return out;
}

}  // namespace bgsm
