#ifndef CUSPLAB_TESTS_SUPPORT_HPP
#define CUSPLAB_TESTS_SUPPORT_HPP

#include <random>

#include "cusplab/group.hpp"

namespace cusplab::testing {

inline std::mt19937_64 rng(std::uint64_t seed = 20240611) { return std::mt19937_64(seed); }

inline Matrix random_algebra_element(const AdaptedBasis& B, std::mt19937_64& gen,
                                     double scale = 0.5) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Matrix X = Matrix::Zero(B.n + 2, B.n + 2);
  for (const Matrix& E : B.all) X += dist(gen) * E;
  return X;
}

// Random group element: exponential of a random algebra element.
inline Matrix random_group_element(int n, std::mt19937_64& gen, double scale = 0.5) {
  const AdaptedBasis B = adapted_basis(n);
  return exp_algebra(random_algebra_element(B, gen, scale));
}

}  // namespace cusplab::testing

#endif
