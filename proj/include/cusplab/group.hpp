#ifndef CUSPLAB_GROUP_HPP
#define CUSPLAB_GROUP_HPP

#include <stdexcept>
#include <vector>

#include "cusplab/lie_algebra.hpp"

namespace cusplab {

// Thrown when a boundary comparison falls inside the ambiguous band
// between "equal" and "clearly distinct".
struct IndeterminateBoundary : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Group elements (plain matrices g with g^T J g = J, det g = 1, preserving
// the upper sheet).
// ---------------------------------------------------------------------------

double group_residual(const Matrix& g);
bool in_group(const Matrix& g, double tol = 1e-11);

// One step of J-polar reprojection: g <- g * S^{-1/2}, S = J g^T J g.
Matrix project_to_group(const Matrix& g);

// Validates g; if the residual exceeds `tol` it reprojects once and
// validates again, throwing if still off.
Matrix normalize_group_element(const Matrix& g, double tol = 1e-8);

// exp along the closed-form one-parameter subgroups.
Matrix exp_nilpotent(const Matrix& X);            // X^3 = 0 assumed
Matrix exp_dilation(int n, double r);             // exp(r T) for the standard frame
Matrix exp_algebra(const Matrix& X);              // general matrix exponential

// ---------------------------------------------------------------------------
// Boundary points: null rays stored with last coordinate scaled to 1, so the
// first n+1 coordinates form a unit vector.
// ---------------------------------------------------------------------------

struct BoundaryPoint {
  Vector xi;  // size n+2, xi(n+1) = 1, spatial part on the unit sphere
};

BoundaryPoint boundary_point(const Vector& null_direction, double tol = 1e-9);
double boundary_distance(const BoundaryPoint& a, const BoundaryPoint& b);

// Equality with an ambiguous band: distance < eq_tol is equal, distance in
// [eq_tol, band_tol] throws IndeterminateBoundary, beyond is distinct.
bool same_boundary_point(const BoundaryPoint& a, const BoundaryPoint& b,
                         double eq_tol = 1e-9, double band_tol = 1e-7);

// ---------------------------------------------------------------------------
// Parabolic frames. A frame packages a boundary point xi together with the
// adapted data transported from the standard cusp by a rotation k_conj in K:
// horospherical basis u (unit translations), dilation generator T, the
// opposite nilpotents theta_u, and a reflection of the geodesic O-xi.
// ---------------------------------------------------------------------------

struct ParabolicFrame {
  int n = 0;
  BoundaryPoint xi;
  Matrix k_conj;                 // k_conj * xi0 = xi, k_conj in K
  std::vector<Matrix> u;
  Matrix T;
  std::vector<Matrix> theta_u;
  Matrix weyl;                   // reflects the geodesic O-xi, in K, order 2
  AdaptedBasis std_basis;        // cached standard basis (coordinate maps)

  Matrix exp_translation(const Vector& x) const;  // exp(sum x_i u_i)
  Matrix exp_dilation(double r) const;            // exp(r T)
  Matrix rotation_in_k_xi(const Matrix& so_n_block) const;  // embed SO(n) rotation
};

ParabolicFrame standard_frame(int n);
ParabolicFrame frame_at(const BoundaryPoint& xi, int n);

// Frame obtained by composing the conjugator with a rotation m in K_xi
// (stabilizer of both O and xi). Same xi, rotated u-basis.
ParabolicFrame rotated_frame(const ParabolicFrame& f, const Matrix& m);

// Any k in K with k * (frame's xi) = target.
Matrix rotation_to(const ParabolicFrame& f, const BoundaryPoint& target);

// ---------------------------------------------------------------------------
// Iwasawa decomposition g = n a k relative to a frame.
// ---------------------------------------------------------------------------

struct IwasawaFactors {
  Matrix n_part;
  Matrix a_part;
  Matrix k_part;
  double t = 1.0;      // character of the a-part
  Vector translation;  // u-basis coordinates of the n-part
};

// Extracts (t, translation) from the Busemann-normalized pairing of gO with
// xi, then peels k = a^{-1} n^{-1} g. Throws if the reconstruction residual
// exceeds `tol`.
IwasawaFactors iwasawa(const Matrix& g, const ParabolicFrame& f, double tol = 1e-8);

// arccosh(-<p,q>_J) for points on the upper sheet.
double hyperbolic_distance(const Vector& p, const Vector& q);

// Character t_xi on A_xi; throws if `a` is not in A_xi.
double character(const Matrix& a, const ParabolicFrame& f, double tol = 1e-10);

// Upper-half-space chart adapted to the frame: returns (y, x_1..x_n) with
// O -> (1, 0,...,0) and xi at y = +infinity.
Vector chart_to_upper_half_space(const Vector& p, const ParabolicFrame& f);

// ---------------------------------------------------------------------------
// Geometric Bruhat classification. SmallCell means g maps the source cusp to
// the target cusp; otherwise g factors as n' * k * w * p with n' in N_{to},
// k the canonical rotation from-to (identity when the cusps agree), w the
// source frame's reflection, and p in P_{from}.
// ---------------------------------------------------------------------------

enum class BruhatCell { Small, Big };

struct BruhatFactors {
  BruhatCell cell = BruhatCell::Small;
  Matrix n_part;  // Big cell only
  Matrix k_rot;
  Matrix weyl;
  Matrix p_part;
};

BruhatFactors bruhat_classify(const Matrix& g, const ParabolicFrame& from,
                              const ParabolicFrame& to);

// ---------------------------------------------------------------------------
// Isometry classification. Parabolic means a single fixed boundary point:
// the quadratic form restricted to ker(g - I) is positive semidefinite with a
// one-dimensional radical. Loxodromics carry their two fixed points.
// ---------------------------------------------------------------------------

enum class IsometryType { Identity, Elliptic, Parabolic, Loxodromic };

struct IsometryClass {
  IsometryType type = IsometryType::Identity;
  std::vector<BoundaryPoint> fixed_points;  // 1 for parabolic, 2 for loxodromic
};

IsometryClass classify_isometry(const Matrix& g, double tol = 1e-7);

}  // namespace cusplab

#endif
