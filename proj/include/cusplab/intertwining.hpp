#ifndef CUSPLAB_INTERTWINING_HPP
#define CUSPLAB_INTERTWINING_HPP

#include "cusplab/forms.hpp"

namespace cusplab {

// Thrown when a convergence gate refuses a computation.
struct GateRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntertwineOptions {
  // Dilation samples exp(rT), r in [-r_max, r_max]. Negative r is the
  // expensive direction for truncated sums, so the window is kept narrow;
  // the two exponents stay well separated over it.
  double r_max = 0.6;
  int n_samples = 9;
  int quad_m = 16;               // quadrature points per torus dimension
  bool quad_refine_check = true; // compare against the half-resolution grid
  TruncationOptions trunc;
  double fit_residual_limit = 0.05;
  int max_retries = 1;
  bool enforce_gate = true;
  int gate_word_length = 0;  // adaptive
};

// Result of averaging the series over the target torus and fitting the
// two-exponential profile alpha t^s + beta t^{2n-s} on dilation samples.
struct IntertwiningResult {
  int n = 0;
  double s = 0.0;
  double delta_coefficient = 0.0;  // coefficient of the source profile
  FormValue alpha;                 // fitted t^s part
  FormValue c_term;                // fitted t^{2n-s} part (constant term value)
  double fit_residual = 0.0;       // relative, over all samples and components
  double quadrature_tol = 0.0;     // drift against the half-resolution grid
  int quad_m = 0;
  int max_word_length = 0;
  long coset_count = 0;
  double tail_estimate = 0.0;
  std::vector<double> sample_r;    // dilation sample grid
};

// Intertwining operator from the cusp carrying the form to `cusp_to`:
// integrates u -> E(phi, u g, s) over the target torus at dilation samples
// and fits the two exponents. For the adjoint module pass the initial vector
// in the source frame's weight coordinates; for the trivial module pass a
// 1-vector.
IntertwiningResult intertwine(const KleinianGroup& group, const CuspDatum& cusp_from,
                              const CuspDatum& cusp_to,
                              CoefficientModule::Kind kind, const Vector& v_source,
                              double s, const IntertwineOptions& opt = {});

// Componentwise weight split of the constant term at the target cusp.
// Adjoint: pure and dt blocks per weight; trivial: the two-component split.
struct ConstantTermSplit {
  bool adjoint = false;
  FormValue plus2, zero, minus2;  // adjoint components (same layout as c_term)
  FormValue trivial_part;         // trivial module: the whole split is c itself
};

ConstantTermSplit weight_split_cterm(const IntertwiningResult& result,
                                     const CoefficientModule& target_module);

// Restriction of the averaged series to the target horosphere in the strong
// sense (dt components discarded), expressed against the harmonic basis of
// the target complex. Carries the vanishing diagnostics of the constant
// term: the lowest-weight fraction, the coboundary residual of the
// (plus2 + zero) part, and the residuals of the differential identities
//   (2 - s) A_2 = d A'_0,   (-s) A_0 = d A'_{-2}.
struct RestrictedClass {
  Vector class_coords;
  double coboundary_residual = 0.0;
  double minus2_fraction = 0.0;
  double identity_residual_plus2 = 0.0;
  double identity_residual_zero = 0.0;
  double trivial_c1_fraction = 0.0;  // trivial module only
};

RestrictedClass restricted_class(const IntertwiningResult& result,
                                 const CeComplex& target_complex);

// ---------------------------------------------------------------------------
// Restriction matrix over all (class, cusp) pairs.
// ---------------------------------------------------------------------------

struct RestrictionReport {
  int n = 0;
  CoefficientModule::Kind kind = CoefficientModule::Kind::Adjoint;
  int classes_per_cusp = 0;
  int cusp_count = 0;
  Matrix restriction_matrix;  // (cusps x classes) square block matrix
  long rank = 0;
  double cusp_bound = 0.0;    // rank / classes_per_cusp
  bool independent = false;
  bool partial = false;       // some sub-run failed; see messages
  std::vector<std::string> messages;
  std::vector<IntertwiningResult> runs;  // row-major over (target, source, class)
};

RestrictionReport independence_report(const KleinianGroup& group,
                                      const std::vector<CuspDatum>& cusps,
                                      CoefficientModule::Kind kind,
                                      const IntertwineOptions& opt = {});

}  // namespace cusplab

#endif
