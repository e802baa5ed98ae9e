#ifndef CUSPLAB_COEFFICIENT_MODULE_HPP
#define CUSPLAB_COEFFICIENT_MODULE_HPP

#include <memory>
#include <optional>
#include <vector>

#include "cusplab/group.hpp"

namespace cusplab {

// Weight decomposition of so(n+1,1) under the adjoint action of the frame's
// dilation subgroup: Ad(exp rT) scales the three blocks by e^{2r}, 1, e^{-2r}.
// Coordinates are taken in the block order [minus2 | zero | plus2]; weight
// projection is then a coordinate mask.
struct WeightDecomposition {
  int n = 0;
  std::vector<Matrix> basis_minus2;
  std::vector<Matrix> basis_zero;   // T first, then the so(n) rotations
  std::vector<Matrix> basis_plus2;
  Matrix k_conj;                    // frame conjugator; coordinates pull back by it
  AdaptedBasis std_basis;           // cached standard basis for the coordinate maps

  int dim() const { return 2 * n + n * (n - 1) / 2 + 1; }
  int block_dim(int w) const;
  int block_offset(int w) const;

  Vector coordinates(const Matrix& X) const;
  Matrix from_coordinates(const Vector& c) const;
  Vector project(const Vector& coords, int w) const;
};

// Builds the decomposition from the frame and verifies the eigenvalue
// clustering of Ad(exp T): dimensions (n, n(n-1)/2 + 1, n) at e^2, 1, e^-2.
// Throws if the clustering check fails.
WeightDecomposition build_weight_decomposition(const ParabolicFrame& f,
                                               double cluster_tol = 1e-8);

// Coefficient module: either the trivial line or the adjoint module with
// vectors stored as weight coordinates relative to a frame.
struct CoefficientModule {
  enum class Kind { Trivial, Adjoint };

  Kind kind = Kind::Trivial;
  int n = 0;
  int dim = 1;
  std::optional<WeightDecomposition> weights;

  Vector act(const Matrix& g, const Vector& v) const;
  Vector act_derivative(const Matrix& X, const Vector& v) const;

  // Component of v in the weight-w block; throws on the trivial module.
  Vector weight_project(const Vector& v, int w) const;
};

CoefficientModule trivial_module(int n);
CoefficientModule adjoint_module(const ParabolicFrame& f);

}  // namespace cusplab

#endif
