#pragma once

#include <cstdint>
#include <optional>

#include "bgsm/random.hpp"
#include "bgsm/types.hpp"

namespace bgsm {

enum class InitKind { zeros, wang, user };

struct SamplerConfig {
  Index iterations = 10000;
  Index burn_in = 5000;
  Index thin = 1;
  std::uint64_t seed = 1;
  InitKind init = InitKind::zeros;
  Matrix init_w;                 // used when init == user
  double numeric_floor = 1e-12;  // lower clamp for squared norms in the IG means

  void validate() const;
  /// floor((iterations - burn_in) / thin)
  Index num_stored() const { return (iterations - burn_in) / thin; }
};

/// Per-group precomputations that depend only on (X, Y, groups).
class GramCache {
 public:
  explicit GramCache(const Dataset& data);

  const Matrix& x_block(Index k) const { return x_blocks_[k]; }  // n x m_k
  const Matrix& gram(Index k) const { return grams_[k]; }        // X_k' X_k
  const Matrix& cross(Index k) const { return cross_[k]; }       // X_k' Y

 private:
  std::vector<Matrix> x_blocks_;
  std::vector<Matrix> grams_;
  std::vector<Matrix> cross_;
};

/// Full conditional of W^(k): vec(W^(k)') ~ MVN(vec(mean'), sigma2 * A^{-1} (x) I_c)
/// with A = X_k'X_k + Diag{1/tau2_k + 1/omega2_i}.
struct BlockConditional {
  Matrix mean;       // m_k x c
  Matrix precision;  // A, m_k x m_k
};

/// Mutable sampler state. `residual` is kept equal to Y - X W.
struct GibbsState {
  Matrix w;
  MixingState mix;
  Matrix residual;

  static GibbsState initial(const Dataset& data, Matrix w0);
  void refresh_residual(const Dataset& data);
};

struct InvGammaParams {
  double shape;
  double scale;
};

struct InvGaussianParams {
  double mean;
  double shape;
};

InvGammaParams sigma2_conditional(const GibbsState& state, const Dataset& data,
                                  const Hyperparams& hyper);
InvGaussianParams tau2_reciprocal_conditional(const GibbsState& state,
                                              const GroupStructure& groups, Index k,
                                              const Hyperparams& hyper, double numeric_floor);
InvGaussianParams omega2_reciprocal_conditional(const GibbsState& state, Index i,
                                                const Hyperparams& hyper, double numeric_floor);

double update_sigma2(GibbsState& state, const Dataset& data, const Hyperparams& hyper, Rng& rng);
double update_tau2(GibbsState& state, const GroupStructure& groups, Index k,
                   const Hyperparams& hyper, Rng& rng, double numeric_floor = 1e-12);
double update_omega2(GibbsState& state, Index i, const Hyperparams& hyper, Rng& rng,
                     double numeric_floor = 1e-12);

/// Conditional moments of block k computed from the partial residual.
BlockConditional block_conditional(const GibbsState& state, const Dataset& data,
                                   const GramCache& cache, Index k);

/// Draws W^(k) from its full conditional, writes it into the state and
/// updates the residual. Returns the number of jitter retries used.
int update_w_block(GibbsState& state, const Dataset& data, const GramCache& cache, Index k,
                   Rng& rng);

/// Draw mean + sqrt(sigma2) L^{-T} Z with A = L L' and Z standard normal (m_k x c).
/// `jitter_retries` receives how many times the diagonal was inflated.
Matrix draw_block(const BlockConditional& cond, double sigma2, Rng& rng,
                  int* jitter_retries = nullptr);

/// Runs the blocked sampler: per sweep sigma2, tau2 (k = 1..K), omega2
/// (i = 1..d), then the W blocks in group order.
ChainOutput run_gibbs(const Dataset& data, const Hyperparams& hyper,
                      const SamplerConfig& config);

}  // namespace bgsm
