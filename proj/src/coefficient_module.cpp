#include "cusplab/coefficient_module.hpp"

#include <cmath>
#include <stdexcept>

namespace cusplab {

int WeightDecomposition::block_dim(int w) const {
  switch (w) {
    case -2:
    case 2:
      return n;
    case 0:
      return n * (n - 1) / 2 + 1;
    default:
      throw std::invalid_argument("weight must be -2, 0 or 2");
  }
}

int WeightDecomposition::block_offset(int w) const {
  switch (w) {
    case -2:
      return 0;
    case 0:
      return n;
    case 2:
      return n + n * (n - 1) / 2 + 1;
    default:
      throw std::invalid_argument("weight must be -2, 0 or 2");
  }
}

Vector WeightDecomposition::coordinates(const Matrix& X) const {
  // Transport to the standard frame where the coordinate map is exact.
  return std_basis.coordinates(k_conj.transpose() * X * k_conj);
}

Matrix WeightDecomposition::from_coordinates(const Vector& c) const {
  return k_conj * std_basis.from_coordinates(c) * k_conj.transpose();
}

Vector WeightDecomposition::project(const Vector& coords, int w) const {
  Vector out = Vector::Zero(coords.size());
  const int off = block_offset(w);
  const int len = block_dim(w);
  out.segment(off, len) = coords.segment(off, len);
  return out;
}

WeightDecomposition build_weight_decomposition(const ParabolicFrame& f,
                                               double cluster_tol) {
  WeightDecomposition W;
  W.n = f.n;
  W.k_conj = f.k_conj;
  W.std_basis = adapted_basis(f.n);
  W.basis_minus2 = f.theta_u;
  W.basis_zero.push_back(f.T);
  for (const Matrix& R : W.std_basis.so_n)
    W.basis_zero.push_back(f.k_conj * R * f.k_conj.transpose());
  W.basis_plus2 = f.u;

  // Clustering check: the matrix of Ad(exp T) in these coordinates must have
  // eigenvalues e^{-2}, 1, e^{2} with multiplicities (n, n(n-1)/2+1, n).
  const int d = W.dim();
  const Matrix a = f.exp_dilation(1.0);
  const Matrix a_inv = f.exp_dilation(-1.0);
  Matrix ad = Matrix::Zero(d, d);
  std::vector<Matrix> basis;
  for (const Matrix& X : W.basis_minus2) basis.push_back(X);
  for (const Matrix& X : W.basis_zero) basis.push_back(X);
  for (const Matrix& X : W.basis_plus2) basis.push_back(X);
  for (int j = 0; j < d; ++j)
    ad.col(j) = W.coordinates(a * basis[static_cast<std::size_t>(j)] * a_inv);

  Eigen::EigenSolver<Matrix> es(ad);
  int n_lo = 0, n_mid = 0, n_hi = 0;
  for (int i = 0; i < d; ++i) {
    const std::complex<double> ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) > cluster_tol)
      throw std::runtime_error("weight decomposition: complex eigenvalue, bad frame");
    const double x = ev.real();
    if (std::abs(x - std::exp(-2.0)) <= cluster_tol * std::exp(2.0))
      ++n_lo;
    else if (std::abs(x - 1.0) <= cluster_tol * std::exp(2.0))
      ++n_mid;
    else if (std::abs(x - std::exp(2.0)) <= cluster_tol * std::exp(2.0))
      ++n_hi;
    else
      throw std::runtime_error("weight decomposition: eigenvalue clustering failed");
  }
  const int n = f.n;
  if (n_lo != n || n_hi != n || n_mid != n * (n - 1) / 2 + 1)
    throw std::runtime_error("weight decomposition: wrong cluster dimensions");
  return W;
}

Vector CoefficientModule::act(const Matrix& g, const Vector& v) const {
  if (kind == Kind::Trivial) return v;
  const Matrix X = weights->from_coordinates(v);
  // g^{-1} = J g^T J for Lorentz matrices.
  const Matrix J = lorentz_form(n);
  return weights->coordinates(g * X * (J * g.transpose() * J));
}

Vector CoefficientModule::act_derivative(const Matrix& X, const Vector& v) const {
  if (kind == Kind::Trivial) return Vector::Zero(1);
  const Matrix V = weights->from_coordinates(v);
  return weights->coordinates(bracket(X, V));
}

Vector CoefficientModule::weight_project(const Vector& v, int w) const {
  if (kind == Kind::Trivial)
    throw std::logic_error("weight_project: trivial module has no weights");
  return weights->project(v, w);
}

CoefficientModule trivial_module(int n) {
  CoefficientModule m;
  m.kind = CoefficientModule::Kind::Trivial;
  m.n = n;
  m.dim = 1;
  return m;
}

CoefficientModule adjoint_module(const ParabolicFrame& f) {
  CoefficientModule m;
  m.kind = CoefficientModule::Kind::Adjoint;
  m.n = f.n;
  m.weights = build_weight_decomposition(f);
  m.dim = m.weights->dim();
  return m;
}

}  // namespace cusplab
