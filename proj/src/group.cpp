#include "cusplab/group.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace cusplab {

namespace {

// Spatial part (first n+1 coordinates) of a canonically scaled boundary point.
Eigen::VectorXd sphere_part(const BoundaryPoint& b) {
  return b.xi.head(b.xi.size() - 1);
}

// Chart position of a boundary point relative to the standard frame,
// x_i = xi_i / (xi_{n+1} - xi_n). Defined away from the standard cusp.
Vector boundary_chart_std(const Vector& xi, int n) {
  const double denom = xi(n + 1) - xi(n);
  if (std::abs(denom) < 1e-14 * xi.cwiseAbs().maxCoeff())
    throw std::invalid_argument("boundary_chart_std: point is the cusp itself");
  return xi.head(n) / denom;
}

}  // namespace

double group_residual(const Matrix& g) {
  const int n = static_cast<int>(g.rows()) - 2;
  const Matrix J = lorentz_form(n);
  return (g.transpose() * J * g - J).cwiseAbs().maxCoeff();
}

bool in_group(const Matrix& g, double tol) {
  const int n = static_cast<int>(g.rows()) - 2;
  if (group_residual(g) > tol) return false;
  if (std::abs(g.determinant() - 1.0) > 1e-9) return false;
  return g(n + 1, n + 1) > 0.0;  // preserves the upper sheet
}

Matrix project_to_group(const Matrix& g) {
  const int n = static_cast<int>(g.rows()) - 2;
  const Matrix J = lorentz_form(n);
  const Matrix S = J * g.transpose() * J * g;
  // S is close to the identity; S^{-1/2} by a short Newton-Schulz series.
  const Matrix I = Matrix::Identity(g.rows(), g.cols());
  const Matrix E = S - I;
  const Matrix inv_sqrt = I - 0.5 * E + 0.375 * E * E;
  return g * inv_sqrt;
}

Matrix normalize_group_element(const Matrix& g, double tol) {
  if (g.rows() != g.cols() || g.rows() < 3)
    throw std::invalid_argument("group element: wrong matrix size");
  Matrix h = g;
  if (group_residual(h) > tol) {
    h = project_to_group(h);
    if (group_residual(h) > tol)
      throw std::invalid_argument("group element: not in SO+(n+1,1) even after reprojection");
  }
  if (!in_group(h, tol))
    throw std::invalid_argument("group element: fails determinant or sheet condition");
  return h;
}

Matrix exp_nilpotent(const Matrix& X) {
  const Matrix X2 = X * X;
  return Matrix::Identity(X.rows(), X.cols()) + X + 0.5 * X2;
}

Matrix exp_dilation(int n, double r) {
  // exp(r T) with T twice the unit boost: boost parameter 2r.
  Matrix g = Matrix::Identity(n + 2, n + 2);
  g(n, n) = std::cosh(2.0 * r);
  g(n, n + 1) = std::sinh(2.0 * r);
  g(n + 1, n) = std::sinh(2.0 * r);
  g(n + 1, n + 1) = std::cosh(2.0 * r);
  return g;
}

Matrix exp_algebra(const Matrix& X) { return X.exp(); }

BoundaryPoint boundary_point(const Vector& dir, double tol) {
  const int n = static_cast<int>(dir.size()) - 2;
  const double norm = dir.norm();
  if (norm == 0.0) throw std::invalid_argument("boundary point: zero vector");
  const double null_residual = std::abs(minkowski_pairing(dir, dir)) / (norm * norm);
  if (null_residual > tol)
    throw std::invalid_argument("boundary point: direction is not null");
  if (dir(n + 1) <= 0.0)
    throw std::invalid_argument("boundary point: needs positive last coordinate");
  BoundaryPoint b;
  b.xi = dir / dir(n + 1);
  // Renormalize the spatial part onto the unit sphere to kill drift.
  const double s = b.xi.head(n + 1).norm();
  b.xi.head(n + 1) /= s;
  return b;
}

double boundary_distance(const BoundaryPoint& a, const BoundaryPoint& b) {
  return (a.xi - b.xi).norm();
}

bool same_boundary_point(const BoundaryPoint& a, const BoundaryPoint& b,
                         double eq_tol, double band_tol) {
  const double d = boundary_distance(a, b);
  if (d < eq_tol) return true;
  if (d <= band_tol)
    throw IndeterminateBoundary("boundary comparison in ambiguous band, refine precision");
  return false;
}

Matrix ParabolicFrame::exp_translation(const Vector& x) const {
  Matrix X = Matrix::Zero(n + 2, n + 2);
  for (int i = 0; i < n; ++i) X += x(i) * u[static_cast<std::size_t>(i)];
  return exp_nilpotent(X);
}

Matrix ParabolicFrame::exp_dilation(double r) const {
  return k_conj * cusplab::exp_dilation(n, r) * k_conj.transpose();
}

Matrix ParabolicFrame::rotation_in_k_xi(const Matrix& so_n_block) const {
  Matrix k = Matrix::Identity(n + 2, n + 2);
  k.topLeftCorner(n, n) = so_n_block;
  return k_conj * k * k_conj.transpose();
}

ParabolicFrame standard_frame(int n) {
  ParabolicFrame f;
  f.n = n;
  Vector xi0 = Vector::Zero(n + 2);
  xi0(n) = 1.0;
  xi0(n + 1) = 1.0;
  f.xi = boundary_point(xi0);
  f.k_conj = Matrix::Identity(n + 2, n + 2);
  f.std_basis = adapted_basis(n);
  f.u = f.std_basis.u;
  f.T = f.std_basis.T;
  f.theta_u = f.std_basis.theta_u;
  // Reflection negating coordinates 0 and n: fixes O, sends xi0 to its
  // antipode, squares to the identity, determinant +1.
  f.weyl = Matrix::Identity(n + 2, n + 2);
  f.weyl(0, 0) = -1.0;
  f.weyl(n, n) = -1.0;
  return f;
}

namespace {

// Rotation of R^{n+1} taking unit vector v to unit vector w, acting in the
// plane they span.
Matrix sphere_rotation(const Vector& v, const Vector& w) {
  const int m = static_cast<int>(v.size());
  const double c = v.dot(w);
  const Matrix I = Matrix::Identity(m, m);
  if (c > 1.0 - 1e-14) return I;
  Vector axis2;
  if (c < -1.0 + 1e-14) {
    // Antipodal: pi-rotation in the plane of v and any orthogonal vector.
    int j = 0;
    for (int i = 1; i < m; ++i)
      if (std::abs(v(i)) < std::abs(v(j))) j = i;
    axis2 = Vector::Unit(m, j) - v(j) * v;
    axis2.normalize();
    return I - 2.0 * (v * v.transpose()) - 2.0 * (axis2 * axis2.transpose());
  }
  axis2 = w - c * v;
  axis2.normalize();
  const double s = axis2.dot(w);
  Matrix R = I;
  R += (c - 1.0) * (v * v.transpose() + axis2 * axis2.transpose());
  R += s * (axis2 * v.transpose() - v * axis2.transpose());
  return R;
}

}  // namespace

ParabolicFrame frame_at(const BoundaryPoint& xi, int n) {
  ParabolicFrame std_f = standard_frame(n);
  const Matrix k = rotation_to(std_f, xi);
  ParabolicFrame f;
  f.n = n;
  f.xi = xi;
  f.k_conj = k;
  f.std_basis = std_f.std_basis;
  const Matrix kt = k.transpose();
  for (const Matrix& U : std_f.u) f.u.push_back(k * U * kt);
  f.T = k * std_f.T * kt;
  for (const Matrix& U : std_f.theta_u) f.theta_u.push_back(k * U * kt);
  f.weyl = k * std_f.weyl * kt;
  return f;
}

ParabolicFrame rotated_frame(const ParabolicFrame& f, const Matrix& m) {
  ParabolicFrame g;
  g.n = f.n;
  g.xi = f.xi;
  g.k_conj = m * f.k_conj;
  g.std_basis = f.std_basis;
  // m fixes xi and O, so conjugating the frame data by m keeps the cusp.
  const Matrix mt = m.transpose();
  for (const Matrix& U : f.u) g.u.push_back(m * U * mt);
  g.T = m * f.T * mt;
  for (const Matrix& U : f.theta_u) g.theta_u.push_back(m * U * mt);
  g.weyl = m * f.weyl * mt;
  return g;
}

Matrix rotation_to(const ParabolicFrame& f, const BoundaryPoint& target) {
  const int n = f.n;
  const Matrix R = sphere_rotation(sphere_part(f.xi), sphere_part(target));
  Matrix k = Matrix::Identity(n + 2, n + 2);
  k.topLeftCorner(n + 1, n + 1) = R;
  return k;
}

namespace {

// Orientation-completing last row: the Hodge dual of the first n rows, so
// the (n+1) x (n+1) block has determinant +1.
Vector completion_row(const Matrix& rows) {
  const int m = static_cast<int>(rows.cols());  // n + 1
  const int n = m - 1;
  Vector v(m);
  for (int j = 0; j < m; ++j) {
    Matrix S(n, n);
    int cc = 0;
    for (int c = 0; c < m; ++c) {
      if (c == j) continue;
      S.col(cc++) = rows.col(c);
    }
    const double sign = ((n + j) % 2 == 0) ? 1.0 : -1.0;
    v(j) = sign * S.determinant();
  }
  return v;
}

}  // namespace

IwasawaFactors iwasawa(const Matrix& g, const ParabolicFrame& f, double tol) {
  const int n = f.n;
  // Work in the standard frame: h = k_conj^{-1} g has the same (t, x) data.
  const Matrix h = f.k_conj.transpose() * g;
  const Vector p = h * base_point(n);
  const double denom = p(n + 1) - p(n);
  if (!(denom > 0.0))
    throw std::runtime_error("iwasawa: image point escaped the chart");
  const double y = 1.0 / denom;
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = p(i) * y;

  IwasawaFactors F;
  F.t = std::sqrt(y);
  F.translation = x;
  F.n_part = f.exp_translation(x);
  F.a_part = f.exp_dilation(0.5 * std::log(y));

  // Rotation factor. The naive a^{-1} n^{-1} g amplifies roundoff by
  // max(y,1/y)^2 deep in the horoball. Instead: the first n rows of the
  // spatial block of n0^{-1} h are exactly rows of k0 (the dilation acts as
  // the identity there); the remaining row is the oriented completion.
  Matrix X0 = Matrix::Zero(n + 2, n + 2);
  for (int i = 0; i < n; ++i) X0 -= x(i) * f.std_basis.u[static_cast<std::size_t>(i)];
  const Matrix M0 = exp_nilpotent(X0) * h;
  Matrix block(n, n + 1);
  block = M0.block(0, 0, n, n + 1);
  // Light re-orthonormalization keeps the completion well-behaved.
  for (int i = 0; i < n; ++i) {
    Vector r = block.row(i).transpose();
    for (int j2 = 0; j2 < i; ++j2)
      r -= block.row(j2).transpose().dot(r) * block.row(j2).transpose();
    block.row(i) = r.transpose() / r.norm();
  }
  Matrix k0 = Matrix::Identity(n + 2, n + 2);
  k0.block(0, 0, n, n + 1) = block;
  k0.block(n, 0, 1, n + 1) = completion_row(block).transpose();
  F.k_part = f.k_conj * k0;

  const Matrix recon = F.n_part * F.a_part * F.k_part;
  // The reconstruction conditions like max(y, 1/y); scale the check by it.
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  const double cond = std::max(y, 1.0 / y);
  if ((recon - g).cwiseAbs().maxCoeff() > tol * scale * cond)
    throw std::runtime_error("iwasawa: reconstruction residual above tolerance");
  return F;
}

double hyperbolic_distance(const Vector& p, const Vector& q) {
  double c = -minkowski_pairing(p, q);
  if (c < 1.0 - 1e-12)
    throw std::invalid_argument("hyperbolic_distance: points not on the upper sheet");
  if (c < 1.0) c = 1.0;
  return std::acosh(c);
}

double character(const Matrix& a, const ParabolicFrame& f, double tol) {
  const int n = f.n;
  // t^2 is the eigenvalue of a on the ray xi.
  const Vector img = a * f.xi.xi;
  const double scale = img(n + 1);
  if (scale <= 0.0) throw std::invalid_argument("character: input not in A_xi");
  if ((img - scale * f.xi.xi).cwiseAbs().maxCoeff() > tol * std::max(1.0, scale))
    throw std::invalid_argument("character: input does not fix the cusp direction");
  const double t = std::sqrt(scale);
  // a must be exactly the dilation with this character.
  const Matrix expected = f.exp_dilation(std::log(t));
  if ((a - expected).cwiseAbs().maxCoeff() > std::max(1.0, scale) * 1e-9)
    throw std::invalid_argument("character: input not in A_xi");
  return t;
}

Vector chart_to_upper_half_space(const Vector& p, const ParabolicFrame& f) {
  const int n = f.n;
  const Vector q = f.k_conj.transpose() * p;
  const double denom = q(n + 1) - q(n);
  if (!(denom > 0.0))
    throw std::runtime_error("chart: point not inside the chart domain");
  Vector out(n + 1);
  out(0) = 1.0 / denom;
  for (int i = 0; i < n; ++i) out(i + 1) = q(i) / denom;
  return out;
}

IsometryClass classify_isometry(const Matrix& g, double tol) {
  const int m = static_cast<int>(g.rows());
  const int n = m - 2;
  IsometryClass out;
  if ((g - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-9) {
    out.type = IsometryType::Identity;
    return out;
  }

  Eigen::EigenSolver<Matrix> es(g);
  double radius = 0.0;
  for (int i = 0; i < m; ++i) radius = std::max(radius, std::abs(es.eigenvalues()(i)));

  // Defective unit eigenvalues of parabolic elements inflate numerically by
  // about (eps * scale)^(1/3); only call an element loxodromic when the
  // radius clears that fuzz. Genuine loxodromics in discrete groups sit far
  // above it.
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  const double jordan_fuzz = 200.0 * std::cbrt(2.2e-16 * scale);
  if (radius > 1.0 + std::max(1e-3, jordan_fuzz)) {
    // Loxodromic: attracting and repelling null eigendirections at the
    // extreme real eigenvalues.
    out.type = IsometryType::Loxodromic;
    for (double target : {radius, 1.0 / radius}) {
      for (int i = 0; i < m; ++i) {
        const auto ev = es.eigenvalues()(i);
        if (std::abs(ev.imag()) < tol && std::abs(ev.real() - target) < tol * radius) {
          Vector v = es.eigenvectors().col(i).real();
          if (v(m - 1) < 0.0) v = -v;
          if (std::abs(minkowski_pairing(v, v)) < tol * v.squaredNorm() && v(m - 1) > tol)
            out.fixed_points.push_back(boundary_point(v, 1e-5));
          break;
        }
      }
    }
    return out;
  }

  // Near-unit spectral radius: elliptic or parabolic. Inspect ker(g - I).
  const Matrix A = g - Matrix::Identity(m, m);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int kdim = 0;
  for (int i = 0; i < m; ++i)
    if (sv(i) <= tol * std::max(1.0, sv(0))) ++kdim;
  if (kdim == 0) {
    out.type = radius > 1.0 + tol ? IsometryType::Loxodromic : IsometryType::Elliptic;
    return out;
  }
  const Matrix K = svd.matrixV().rightCols(kdim);
  const Matrix J = lorentz_form(n);
  const Matrix Q = K.transpose() * J * K;
  Eigen::SelfAdjointEigenSolver<Matrix> qes(Q);
  int zero = 0, neg = 0;
  int radical_col = -1;
  for (int i = 0; i < kdim; ++i) {
    const double mu = qes.eigenvalues()(i);
    if (std::abs(mu) <= tol) {
      ++zero;
      radical_col = i;
    } else if (mu < 0.0) {
      ++neg;
    }
  }
  if (neg == 0 && zero == 1) {
    out.type = IsometryType::Parabolic;
    Vector xi = K * qes.eigenvectors().col(radical_col);
    if (xi(m - 1) < 0.0) xi = -xi;
    out.fixed_points.push_back(boundary_point(xi, 1e-5));
  } else {
    out.type = IsometryType::Elliptic;
  }
  return out;
}

BruhatFactors bruhat_classify(const Matrix& g, const ParabolicFrame& from,
                              const ParabolicFrame& to) {
  const int n = from.n;
  BruhatFactors F;
  const BoundaryPoint image = boundary_point(g * from.xi.xi);
  if (same_boundary_point(image, to.xi)) {
    F.cell = BruhatCell::Small;
    return F;
  }
  F.cell = BruhatCell::Big;
  const bool same_cusp = boundary_distance(from.xi, to.xi) < 1e-12;
  F.k_rot = same_cusp ? Matrix::Identity(n + 2, n + 2) : rotation_to(from, to.xi);
  F.weyl = from.weyl;

  // Need n' in N_to with n'^{-1} g xi_from = k w xi_from. Both sides are
  // boundary points distinct from xi_to, and N_to translates the boundary
  // chart of the target frame, so the translation is the chart difference.
  const BoundaryPoint anchor = boundary_point(F.k_rot * from.weyl * from.xi.xi);
  const Vector chart_img =
      boundary_chart_std(Vector(to.k_conj.transpose() * image.xi), n);
  const Vector chart_anchor =
      boundary_chart_std(Vector(to.k_conj.transpose() * anchor.xi), n);
  F.n_part = to.exp_translation(chart_img - chart_anchor);
  F.p_part = F.weyl.transpose() * F.k_rot.transpose() *
             to.exp_translation(-(chart_img - chart_anchor)) * g;
  // Witness check: p must stabilize the source cusp.
  const BoundaryPoint p_img = boundary_point(F.p_part * from.xi.xi);
  if (boundary_distance(p_img, from.xi) > 1e-7)
    throw std::runtime_error("bruhat_classify: big-cell factor failed to stabilize the cusp");
  return F;
}

}  // namespace cusplab
