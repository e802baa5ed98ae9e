#ifndef CUSPLAB_LIE_ALGEBRA_HPP
#define CUSPLAB_LIE_ALGEBRA_HPP

#include <Eigen/Dense>
#include <vector>

namespace cusplab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Boundary rank n means: hyperbolic space of dimension n+1, matrices of
// size (n+2)x(n+2), quadratic form diag(1,...,1,-1).
Matrix lorentz_form(int n);

// Base point of the upper hyperboloid sheet, (0,...,0,1).
Vector base_point(int n);

// <p,q>_J = p^T J q.
double minkowski_pairing(const Vector& p, const Vector& q);

// Residual ||X^T J + J X||_inf; zero iff X lies in so(n+1,1).
double algebra_residual(const Matrix& X);
bool in_algebra(const Matrix& X, double tol = 1e-12);

// [X,Y] = XY - YX. Throws on dimension mismatch.
Matrix bracket(const Matrix& X, const Matrix& Y);

// Cartan involution at the base point: X -> -X^T. Fixes so(n+1) pointwise
// and flips the weight of the horospherical generators.
Matrix cartan_involution(const Matrix& X);

// Basis of so(n+1,1) adapted to the standard cusp xi0 = e_n + e_{n+1}:
//
//   u[i]       unit horospherical translations, [T, u[i]] = 2 u[i]
//   T          dilation generator along the geodesic O-xi0  (= 2 x unit boost)
//   so_n       rotations among the first n coordinates (centralize T)
//   theta_u[i] = cartan_involution(u[i]), [T, theta_u[i]] = -2 theta_u[i]
//
// All entries are integers, so bracket relations evaluate exactly in
// floating point. `all` lists the basis in weight order
// [theta_u | T, so_n | u]; `coordinates` inverts it exactly (the inverse
// has dyadic entries only).
struct AdaptedBasis {
  int n = 0;
  std::vector<Matrix> u;
  Matrix T;
  std::vector<Matrix> so_n;
  std::vector<Matrix> theta_u;
  std::vector<Matrix> all;

  int dim() const { return static_cast<int>(all.size()); }
  Vector coordinates(const Matrix& X) const;
  Matrix from_coordinates(const Vector& c) const;
};

AdaptedBasis adapted_basis(int n);

}  // namespace cusplab

#endif
