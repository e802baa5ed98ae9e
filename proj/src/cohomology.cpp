#include "cusplab/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace cusplab {

namespace {

using BigInt = boost::multiprecision::cpp_int;

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> I(static_cast<std::size_t>(k));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      out.push_back(I);
      return;
    }
    for (int v = start; v < n; ++v) {
      I[static_cast<std::size_t>(depth)] = v;
      rec(v + 1, depth + 1);
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace

int CochainSpace::index_of(const std::vector<int>& I) const {
  for (std::size_t idx = 0; idx < multi_indices.size(); ++idx)
    if (multi_indices[idx] == I) return static_cast<int>(idx);
  throw std::invalid_argument("cochain space: unknown multi-index");
}

CeComplex build_complex(const ParabolicFrame& f, const CoefficientModule& module) {
  if (module.n != f.n)
    throw std::invalid_argument("build_complex: frame and module rank differ");
  const int n = f.n;
  const int dv = module.dim;

  CeComplex cx;
  cx.n = n;
  cx.module = module;
  for (int k = 0; k <= n; ++k) {
    CochainSpace S;
    S.degree = k;
    S.module_dim = dv;
    S.multi_indices = combinations(n, k);
    cx.spaces.push_back(std::move(S));
  }

  // rho(u_j) as a dv x dv matrix in module coordinates.
  std::vector<Matrix> rho_u;
  for (int j = 0; j < n; ++j) {
    Matrix R = Matrix::Zero(dv, dv);
    if (module.kind == CoefficientModule::Kind::Adjoint) {
      for (int c = 0; c < dv; ++c)
        R.col(c) = module.act_derivative(f.u[static_cast<std::size_t>(j)],
                                         Vector::Unit(dv, c));
    }
    rho_u.push_back(std::move(R));
  }

  // The algebra is abelian, so only the rho terms of the coboundary formula
  // survive: d(u_I^* (x) v)(u_L) = sum_m (-1)^{m+1} rho(u_{j_m}) v over the
  // positions m where removing j_m from L gives I.
  for (int k = 0; k < n; ++k) {
    const CochainSpace& src = cx.spaces[static_cast<std::size_t>(k)];
    const CochainSpace& dst = cx.spaces[static_cast<std::size_t>(k + 1)];
    Matrix D = Matrix::Zero(dst.dim(), src.dim());
    for (std::size_t li = 0; li < dst.multi_indices.size(); ++li) {
      const std::vector<int>& L = dst.multi_indices[li];
      for (int m = 0; m <= k; ++m) {
        const int j = L[static_cast<std::size_t>(m)];
        std::vector<int> I = L;
        I.erase(I.begin() + m);
        const int ii = src.index_of(I);
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        D.block(static_cast<int>(li) * dv, ii * dv, dv, dv) +=
            sign * rho_u[static_cast<std::size_t>(j)];
      }
    }
    cx.d.push_back({k, std::move(D)});
  }
  cx.d.push_back({n, Matrix::Zero(0, cx.spaces[static_cast<std::size_t>(n)].dim())});
  return cx;
}

long exact_rank(const Matrix& M) {
  // Scale to integers: entries here are integers or small dyadic rationals.
  double scale = 1.0;
  bool ok = false;
  for (; scale <= 16.0; scale *= 2.0) {
    ok = true;
    for (int i = 0; i < M.rows() && ok; ++i)
      for (int j = 0; j < M.cols() && ok; ++j)
        if (std::abs(M(i, j) * scale - std::round(M(i, j) * scale)) > 1e-9) ok = false;
    if (ok) break;
  }
  if (!ok) return -1;

  const int rows = static_cast<int>(M.rows());
  const int cols = static_cast<int>(M.cols());
  if (rows == 0 || cols == 0) return 0;
  std::vector<std::vector<BigInt>> a(static_cast<std::size_t>(rows),
                                     std::vector<BigInt>(static_cast<std::size_t>(cols)));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          BigInt(static_cast<long long>(std::llround(M(i, j) * scale)));

  // Bareiss fraction-free elimination.
  long rank = 0;
  BigInt prev = 1;
  int row = 0;
  for (int col = 0; col < cols && row < rows; ++col) {
    int pivot = -1;
    for (int i = row; i < rows; ++i)
      if (a[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)] != 0) {
        pivot = i;
        break;
      }
    if (pivot < 0) continue;
    std::swap(a[static_cast<std::size_t>(pivot)], a[static_cast<std::size_t>(row)]);
    const BigInt p = a[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    for (int i = row + 1; i < rows; ++i) {
      for (int j = col + 1; j < cols; ++j) {
        BigInt v = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * p -
                   a[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)] *
                       a[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)];
        a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v / prev;
      }
      a[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)] = 0;
    }
    prev = p;
    ++rank;
    ++row;
  }
  return rank;
}

long float_rank(const Matrix& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double thresh = 1e-8 * s(0);
  long r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > thresh) ++r;
  return r;
}

namespace {

long matrix_rank(const Matrix& M) {
  const long r = exact_rank(M);
  return r >= 0 ? r : float_rank(M);
}

}  // namespace

CohomologyReport cohomology_report(const CeComplex& cx, int degree) {
  if (degree < 0 || degree > cx.n)
    throw std::invalid_argument("cohomology_report: degree out of range");
  const CochainSpace& S = cx.spaces[static_cast<std::size_t>(degree)];
  const Matrix& d_out = cx.d[static_cast<std::size_t>(degree)].d;

  CohomologyReport rep;
  rep.degree = degree;
  const long rank_out = matrix_rank(d_out);
  rep.dim_kernel = S.dim() - static_cast<int>(rank_out);
  rep.dim_image =
      degree == 0 ? 0
                  : static_cast<int>(matrix_rank(cx.d[static_cast<std::size_t>(degree - 1)].d));
  rep.dim_H = rep.dim_kernel - rep.dim_image;

  if (degree == cx.n) {
    // Canonical class representatives: vol (x) v over the lowest weight block
    // (adjoint) or the volume cocycle (trivial), then projected onto the
    // orthogonal complement of the image for the minimal-norm representative.
    const Matrix& D = cx.d[static_cast<std::size_t>(degree - 1)].d;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(D);
    auto harmonic = [&](const Vector& z) -> Vector {
      if (D.cols() == 0) return z;
      return z - D * Vector(cod.solve(z));
    };
    const int dv = cx.module.dim;
    if (cx.module.kind == CoefficientModule::Kind::Adjoint) {
      for (int i = 0; i < cx.n; ++i) {
        Vector v = Vector::Zero(dv);
        v(cx.module.weights->block_offset(-2) + i) = 1.0;
        rep.harmonic_basis.push_back(harmonic(v));
        rep.weight_tags.push_back(-2);
      }
    } else {
      rep.harmonic_basis.push_back(harmonic(Vector::Ones(1)));
    }
  }
  return rep;
}

CohomologyReport top_cohomology(const CeComplex& cx) { return cohomology_report(cx, cx.n); }

Vector j_isomorphism(const CeComplex& cx, const Vector& v, double tol) {
  if (cx.module.kind != CoefficientModule::Kind::Adjoint)
    throw std::logic_error("j_isomorphism: adjoint module required");
  const Vector rest = v - cx.module.weight_project(v, -2);
  if (rest.cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("j_isomorphism: vector has components outside the lowest weight block");
  return v;  // top cochain space is one V-block, vol (x) v
}

PrimitiveFit coboundary_fit(const CeComplex& cx, const Vector& top_cochain) {
  const Matrix& D = cx.d[static_cast<std::size_t>(cx.n - 1)].d;
  PrimitiveFit fit;
  if (D.cols() == 0) {
    fit.primitive = Vector::Zero(0);
    fit.residual = top_cochain.norm();
    return fit;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(D);
  fit.primitive = cod.solve(top_cochain);
  fit.residual = (D * fit.primitive - top_cochain).norm();
  return fit;
}

Vector van_est_average(const std::function<Vector(const Vector&)>& sampler,
                       const Matrix& lattice, int module_dim,
                       int m_start, double target, int max_refinements) {
  const int n = static_cast<int>(lattice.rows());
  if (lattice.cols() != n || std::abs(lattice.determinant()) < 1e-12)
    throw std::invalid_argument("van_est_average: lattice must be full rank");

  auto grid_average = [&](int m) -> Vector {
    Vector acc = Vector::Zero(module_dim);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    long count = 0;
    for (;;) {
      Vector frac(n);
      for (int i = 0; i < n; ++i)
        frac(i) = static_cast<double>(idx[static_cast<std::size_t>(i)]) / m;
      acc += sampler(lattice * frac);
      ++count;
      int c = 0;
      while (c < n && ++idx[static_cast<std::size_t>(c)] == m) {
        idx[static_cast<std::size_t>(c)] = 0;
        ++c;
      }
      if (c == n) break;
    }
    return acc / static_cast<double>(count);
  };

  int m = m_start;
  Vector avg = grid_average(m);
  double drift = std::numeric_limits<double>::infinity();
  for (int r = 0; r < max_refinements; ++r) {
    m *= 2;
    const Vector next = grid_average(m);
    drift = (next - avg).cwiseAbs().maxCoeff();
    avg = next;
    if (drift < target) return avg;
  }
  if (drift > 1e-6)
    throw std::runtime_error("van_est_average: quadrature failed to converge");
  return avg;
}

TransferResult transfer_average(const Vector& top_cocycle,
                                const std::vector<Matrix>& finite_parts,
                                const ParabolicFrame& f,
                                const CoefficientModule& module,
                                double tol) {
  if (finite_parts.empty())
    throw std::invalid_argument("transfer_average: empty rotation set");
  // The rotation parts must be closed under composition.
  for (const Matrix& a : finite_parts)
    for (const Matrix& b : finite_parts) {
      const Matrix ab = a * b;
      bool found = false;
      for (const Matrix& c : finite_parts)
        if ((ab - c).cwiseAbs().maxCoeff() <= 1e-8) {
          found = true;
          break;
        }
      if (!found)
        throw std::invalid_argument("transfer_average: rotation parts do not form a group");
    }

  TransferResult out;
  const int dv = module.dim;
  Vector v = Vector::Zero(dv);
  for (const Matrix& mpart : finite_parts)
    v += module.act(Matrix(mpart.transpose()), top_cocycle);
  v /= static_cast<double>(finite_parts.size());
  out.v = v;
  out.cocycle = v;

  if (module.kind == CoefficientModule::Kind::Adjoint) {
    const Vector rest = v - module.weight_project(v, -2);
    if (rest.cwiseAbs().maxCoeff() > 1e-9)
      throw std::runtime_error("transfer_average: averaged vector left the lowest weight block");
    // theta(v) must be fixed by every rotation part.
    const Matrix V = module.weights->from_coordinates(v);
    const Matrix theta_v = cartan_involution(V);
    for (const Matrix& mpart : finite_parts) {
      const Matrix moved = mpart * theta_v * mpart.transpose();
      if ((moved - theta_v).cwiseAbs().maxCoeff() > tol * std::max(1.0, theta_v.norm()))
        throw std::runtime_error("transfer_average: theta(v) is not fixed by the rotation parts");
    }
  }
  return out;
}

}  // namespace cusplab
