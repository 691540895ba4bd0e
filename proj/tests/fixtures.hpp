#pragma once

#include <random>
#include <vector>

#include "bgsm/types.hpp"

namespace fixture {

using bgsm::Index;
using bgsm::Matrix;

inline Matrix random_genotypes(Index n, Index d, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> g(0, 2);
  Matrix x(n, d);
  for (Index l = 0; l < n; ++l)
    for (Index i = 0; i < d; ++i) x(l, i) = g(gen);
  return x;
}

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& gen, double sd = 1.0) {
  std::normal_distribution<double> z(0.0, sd);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = z(gen);
  return m;
}

/// Y = X W + N(0, noise^2) with W ~ N(0, 1) on the rows listed in `active`
/// (all rows when empty).
inline bgsm::Dataset make_dataset(Index n, const std::vector<Index>& group_sizes, Index c,
                                  std::uint64_t seed, double noise = 1.0,
                                  std::vector<Index> active = {}) {
  std::mt19937_64 gen(seed);
  bgsm::Dataset data;
  data.groups = bgsm::GroupStructure::contiguous(group_sizes);
  const Index d = data.groups.num_snps();
  data.x = random_genotypes(n, d, gen);
  Matrix w = random_matrix(d, c, gen);
  if (!active.empty()) {
    Matrix kept = Matrix::Zero(d, c);
    for (Index i : active) kept.row(i) = w.row(i);
    w = kept;
  }
  data.y = data.x * w + random_matrix(n, c, gen, noise);
  data.ensure_names();
  return data;
}

}  // namespace fixture
