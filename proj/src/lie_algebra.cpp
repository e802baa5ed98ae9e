#include "cusplab/lie_algebra.hpp"

#include <stdexcept>

namespace cusplab {

Matrix lorentz_form(int n) {
  Matrix J = Matrix::Identity(n + 2, n + 2);
  J(n + 1, n + 1) = -1.0;
  return J;
}

Vector base_point(int n) {
  Vector O = Vector::Zero(n + 2);
  O(n + 1) = 1.0;
  return O;
}

double minkowski_pairing(const Vector& p, const Vector& q) {
  const int m = static_cast<int>(p.size());
  double s = 0.0;
  for (int i = 0; i + 1 < m; ++i) s += p(i) * q(i);
  return s - p(m - 1) * q(m - 1);
}

double algebra_residual(const Matrix& X) {
  const int n = static_cast<int>(X.rows()) - 2;
  const Matrix J = lorentz_form(n);
  return (X.transpose() * J + J * X).cwiseAbs().maxCoeff();
}

bool in_algebra(const Matrix& X, double tol) { return algebra_residual(X) <= tol; }

Matrix bracket(const Matrix& X, const Matrix& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw std::invalid_argument("bracket: dimension mismatch");
  return X * Y - Y * X;
}

Matrix cartan_involution(const Matrix& X) { return -X.transpose(); }

AdaptedBasis adapted_basis(int n) {
  if (n < 1) throw std::invalid_argument("adapted_basis: rank must be >= 1");
  const int m = n + 2;
  AdaptedBasis B;
  B.n = n;

  // u_i = -E_{i,n} + E_{n,i} + E_{i,n+1} + E_{n+1,i}: annihilates
  // xi0 = e_n + e_{n+1} and exponentiates to the unit translation along x_i.
  for (int i = 0; i < n; ++i) {
    Matrix U = Matrix::Zero(m, m);
    U(i, n) = -1.0;
    U(n, i) = 1.0;
    U(i, n + 1) = 1.0;
    U(n + 1, i) = 1.0;
    B.u.push_back(U);
  }

  // T = 2 (E_{n,n+1} + E_{n+1,n}); then [T, u_i] = 2 u_i and the character
  // of exp(rT) equals e^r.
  B.T = Matrix::Zero(m, m);
  B.T(n, n + 1) = 2.0;
  B.T(n + 1, n) = 2.0;

  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Matrix R = Matrix::Zero(m, m);
      R(a, b) = 1.0;
      R(b, a) = -1.0;
      B.so_n.push_back(R);
    }

  for (int i = 0; i < n; ++i) B.theta_u.push_back(cartan_involution(B.u[i]));

  for (const Matrix& X : B.theta_u) B.all.push_back(X);
  B.all.push_back(B.T);
  for (const Matrix& X : B.so_n) B.all.push_back(X);
  for (const Matrix& X : B.u) B.all.push_back(X);
  return B;
}

Vector AdaptedBasis::coordinates(const Matrix& X) const {
  // Entry bookkeeping: X(i,n+1) = a_i - b_i and X(n,i) = a_i + b_i where
  // a_i, b_i are the u_i / theta_u_i coefficients; X(n,n+1) = 2c for the
  // T coefficient; the so(n) block is read off directly. All divisions
  // are by 2, hence exact on dyadic input.
  const int m = n + 2;
  if (X.rows() != m || X.cols() != m)
    throw std::invalid_argument("coordinates: wrong matrix size");
  Vector c(dim());
  int k = 0;
  for (int i = 0; i < n; ++i) c(k++) = 0.5 * (X(n, i) - X(i, n + 1));  // theta_u
  c(k++) = 0.5 * X(n, n + 1);                                         // T
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) c(k++) = X(a, b);                 // so(n)
  for (int i = 0; i < n; ++i) c(k++) = 0.5 * (X(n, i) + X(i, n + 1)); // u
  return c;
}

Matrix AdaptedBasis::from_coordinates(const Vector& c) const {
  if (c.size() != dim())
    throw std::invalid_argument("from_coordinates: wrong vector size");
  Matrix X = Matrix::Zero(n + 2, n + 2);
  for (int k = 0; k < dim(); ++k)
    if (c(k) != 0.0) X += c(k) * all[static_cast<std::size_t>(k)];
  return X;
}

}  // namespace cusplab
