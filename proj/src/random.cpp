#include "bgsm/random.hpp"

#include <cmath>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "bgsm/error.hpp"

namespace bgsm {

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  boost::random::uniform_01<double> dist;
  double u = dist(engine_);
  while (u <= 0.0) u = dist(engine_);
  return u;
}

double Rng::normal() {
  boost::random::normal_distribution<double> dist;
  return dist(engine_);
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma needs positive shape and rate");
  boost::random::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

double Rng::inverse_gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw DomainError("inverse gamma needs positive shape and scale");
  }
  return 1.0 / gamma(shape, scale);
}

double Rng::chi_squared(double df) { return gamma(0.5 * df, 0.5); }

// Michael, Schucany and Haas: the squared standard normal is chi^2_1 and
// the two roots of the resulting quadratic are picked with probabilities
// mean/(mean+x) and x/(mean+x). The smaller root is written as
// mean / (1 + t + sqrt(t(t+2))) with t = mean*y/(2 shape), which avoids the
// cancellation of the textbook form when t is large.
double Rng::inverse_gaussian(double mean, double shape) {
  if (!(mean > 0.0) || !(shape > 0.0) || !std::isfinite(mean) || !std::isfinite(shape)) {
    throw DomainError("inverse Gaussian needs positive finite mean and shape");
  }
  const double z = normal();
  const double t = mean * z * z / (2.0 * shape);
  const double x = mean / (1.0 + t + std::sqrt(t * (t + 2.0)));
  if (uniform() * (mean + x) <= mean) return x;
  return mean * mean / x;
}

Index Rng::uniform_index(Index n) {
  boost::random::uniform_int_distribution<Index> dist(0, n - 1);
  return dist(engine_);
}

void Rng::fill_normal(Matrix& m) {
  boost::random::normal_distribution<double> dist;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = dist(engine_);
  }
}

double sample_inverse_gaussian(double mean, double shape, Rng& rng) {
  return rng.inverse_gaussian(mean, shape);
}

}  // namespace bgsm
