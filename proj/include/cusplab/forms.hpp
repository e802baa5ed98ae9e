#ifndef CUSPLAB_FORMS_HPP
#define CUSPLAB_FORMS_HPP

#include <functional>
#include <optional>

#include "cusplab/cohomology.hpp"
#include "cusplab/orbits.hpp"

namespace cusplab {

// ---------------------------------------------------------------------------
// Pointwise value of a V-valued n-form on the (dilation + horospherical)
// directions: one V-block for the pure horospherical top covector and one
// per (dt/t) ^ (top covector missing u_j). Layout of flat():
// [pure | dt_0 | ... | dt_{n-1}], each block of size dim V.
// ---------------------------------------------------------------------------

struct FormValue {
  Vector pure;
  std::vector<Vector> dt;

  static FormValue zero(int n, int module_dim);
  int n() const { return static_cast<int>(dt.size()); }
  int module_dim() const { return static_cast<int>(pure.size()); }

  Vector flat() const;
  static FormValue from_flat(const Vector& v, int n, int module_dim);

  double norm() const;  // Frobenius over all coefficient blocks
  FormValue& operator+=(const FormValue& o);
  FormValue& operator*=(double c);
};

FormValue operator+(FormValue a, const FormValue& b);
FormValue operator-(FormValue a, const FormValue& b);
FormValue operator*(double c, FormValue v);

// ---------------------------------------------------------------------------
// Horospherical cusp form: the N-invariant n-form on the unit horosphere
// with initial value vol (x) v. For the adjoint module v must lie in the
// lowest weight block; the trivial module takes a scalar.
// ---------------------------------------------------------------------------

struct CuspForm {
  ParabolicFrame frame;
  CoefficientModule module;
  FormValue initial;
  std::optional<int> weight_tag;
};

CuspForm phi(const ParabolicFrame& frame, const CoefficientModule& module,
             const Vector& v);
CuspForm phi_trivial(const ParabolicFrame& frame, double scale = 1.0);

// Extensions of general form values (used by constant-term analysis) go
// through make_extension below.

// ---------------------------------------------------------------------------
// Degree-s extension: the unique N-invariant function on the group with
//   value(n a k) = Ad*(k^{-1}) (x) rho(k^{-1}) (initial) * t_a^s.
// ---------------------------------------------------------------------------

struct ExtendedForm {
  ParabolicFrame frame;
  CoefficientModule module;
  FormValue initial;
  double s = 0.0;
  std::optional<int> weight_tag;

  FormValue value(const Matrix& g) const;
};

ExtendedForm extend(const CuspForm& form, double s);
ExtendedForm make_extension(const ParabolicFrame& frame,
                            const CoefficientModule& module,
                            const FormValue& initial, double s);

// Pullback twist used by the evaluation rule: Ad*(k^{-1}) (x) rho(k^{-1})
// applied to a form value (k in K).
FormValue twist_by_rotation(const FormValue& F, const Matrix& k,
                            const ParabolicFrame& frame,
                            const CoefficientModule& module);

// ---------------------------------------------------------------------------
// Differential. A pure-horospherical extension with a definite weight tag
// satisfies  d(form) = c * (dt/t) ^ form  with
//   c = s - 2n + l   (adjoint, initial of weight l)
//   c = s - 2n       (trivial).
// The three contributions are evaluated from the actual matrices.
// ---------------------------------------------------------------------------

struct DifferentialCoefficient {
  double c = 0.0;
  double dilation_term = 0.0;  // t-direction derivative: s
  double weight_term = 0.0;    // rho(T) eigenvalue on the initial vector
  double bracket_term = 0.0;   // alternating insertion of [T, u_i]: -2n
};

DifferentialCoefficient differential(const ExtendedForm& form, double tol = 1e-9);

// Finite-difference coboundary evaluated on the frame (T, u_1,...,u_n) at g;
// returns the V-coefficient of the unique top (n+1)-covector. The generic
// overload accepts any form-valued function on the group (used for
// translates and series).
Vector fd_differential(const std::function<FormValue(const Matrix&)>& form,
                       const ParabolicFrame& frame, const CoefficientModule& module,
                       const Matrix& g, double h = 1e-4);
Vector fd_differential(const ExtendedForm& form, const Matrix& g, double h = 1e-4);

// ---------------------------------------------------------------------------
// Truncated series over the cosets of the cusp group.
// ---------------------------------------------------------------------------

struct TruncationOptions {
  int max_word_length = 14;
  double epsilon = 1e-4;      // relative tail target
  double t_threshold = 0.0;   // drop summands with t_gamma below this value
  int min_length = 4;         // enumerate at least this word length
  std::size_t max_elements = 4000000;
};

struct TruncatedSeries {
  FormValue value;
  double s = 0.0;
  int max_word_length = 0;
  double t_threshold = 0.0;
  long coset_count = 0;
  long inside_horoball_count = 0;
  double tail_estimate = 0.0;
  bool tail_decreasing = true;            // divergence warning when false
  std::vector<double> shell_masses;       // per word-length shell, summand norms
  std::vector<double> refinement_deltas;  // ||E_L - E_{L-2}|| per refinement
};

// Sums the extension over one coset representative per class, refining the
// word length by +2 until the relative tail estimate drops below epsilon or
// the cap is reached. Summation order is deterministic.
TruncatedSeries eisenstein(const ExtendedForm& form, const KleinianGroup& group,
                           const CuspDatum& cusp, const Matrix& g,
                           const TruncationOptions& trunc = {});

// Series value at g reusing a fixed enumeration (no refinement logic).
FormValue eisenstein_value(const ExtendedForm& form, const CosetEnumeration& cosets,
                           const Matrix& g, double t_threshold = 0.0);

}  // namespace cusplab

#endif
