#ifndef CUSPLAB_COHOMOLOGY_HPP
#define CUSPLAB_COHOMOLOGY_HPP

#include <functional>
#include <vector>

#include "cusplab/coefficient_module.hpp"

namespace cusplab {

// Cochains in degree k live in Hom(Lambda^k n_xi, V): one V-block per
// k-multi-index, multi-indices in lexicographic order, flattened as
// coeff(index_of(I) * dimV + v_component).
struct CochainSpace {
  int degree = 0;
  int module_dim = 1;
  std::vector<std::vector<int>> multi_indices;

  int dim() const { return static_cast<int>(multi_indices.size()) * module_dim; }
  int index_of(const std::vector<int>& I) const;
};

struct CoboundaryMatrix {
  int degree = 0;  // maps degree -> degree + 1
  Matrix d;
};

// The full complex of the abelian horospherical algebra with coefficients in
// the module. With integer basis matrices every entry of d is an integer and
// d(k+1) * d(k) vanishes exactly.
struct CeComplex {
  int n = 0;
  CoefficientModule module;
  std::vector<CochainSpace> spaces;   // degrees 0..n
  std::vector<CoboundaryMatrix> d;    // d[k]: degree k -> k+1; d[n] is empty (0 x dim)
};

CeComplex build_complex(const ParabolicFrame& f, const CoefficientModule& module);

struct CohomologyReport {
  int degree = 0;
  int dim_kernel = 0;
  int dim_image = 0;
  int dim_H = 0;
  std::vector<Vector> harmonic_basis;
  std::vector<int> weight_tags;  // adjoint only: V-weight of each class rep
};

// Rank over the rationals via fraction-free elimination; input entries must
// be (dyadic) rationals with small denominator. Returns -1 if the matrix is
// not recognizably rational at tolerance 1e-9.
long exact_rank(const Matrix& M);

// Rank with an SVD threshold of 1e-8 * sigma_max, used when exact
// arithmetic does not apply.
long float_rank(const Matrix& M);

CohomologyReport cohomology_report(const CeComplex& cx, int degree);
CohomologyReport top_cohomology(const CeComplex& cx);

// Degree-n cocycle (u_1^* ^ ... ^ u_n^*) (x) v for v in the lowest weight
// block. Throws if v has components outside that block.
Vector j_isomorphism(const CeComplex& cx, const Vector& v, double tol = 1e-12);

// Least-squares distance from a top-degree cochain to the image of d,
// together with the minimizing primitive.
struct PrimitiveFit {
  Vector primitive;
  double residual = 0.0;
};
PrimitiveFit coboundary_fit(const CeComplex& cx, const Vector& top_cochain);

// Averages a lattice-periodic top-degree form over the torus (Haar measure
// normalized to total mass one). The sampler receives horospherical
// coordinates in the u-basis and returns the V-coefficient of the top
// cochain at that point. The grid is refined x2 until the drift falls below
// `target`; throws if the drift is still above 1e-6 when refinement stops.
Vector van_est_average(const std::function<Vector(const Vector&)>& sampler,
                       const Matrix& lattice, int module_dim,
                       int m_start = 8, double target = 1e-8,
                       int max_refinements = 6);

// Transfer averaging over the finite rotation parts of a crystallographic
// cusp group. Input: top cocycle vol (x) v_alpha; output the averaged
// cocycle and its distinguished vector v = (1/N) sum rho(m_i^{-1}) v_alpha.
// Verifies that the parts form a group and that theta(v) is fixed by all of
// them.
struct TransferResult {
  Vector cocycle;
  Vector v;
};
TransferResult transfer_average(const Vector& top_cocycle,
                                const std::vector<Matrix>& finite_parts,
                                const ParabolicFrame& f,
                                const CoefficientModule& module,
                                double tol = 1e-9);

}  // namespace cusplab

#endif
