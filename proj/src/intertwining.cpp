#include "cusplab/intertwining.hpp"

#include <array>
#include <cmath>

#include "cusplab/parallel.hpp"

namespace cusplab {

namespace {

struct SampleGrid {
  std::vector<double> r;
  std::vector<Matrix> g;  // exp(r T) at the target cusp
};

SampleGrid dilation_samples(const ParabolicFrame& f, double r_max, int count) {
  SampleGrid grid;
  for (int i = 0; i < count; ++i) {
    const double r = -r_max + 2.0 * r_max * i / (count - 1);
    grid.r.push_back(r);
    grid.g.push_back(f.exp_dilation(r));
  }
  return grid;
}

std::vector<Matrix> torus_nodes(const CuspDatum& cusp, int m) {
  const int n = cusp.frame.n;
  std::vector<Matrix> nodes;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    Vector frac(n);
    for (int i = 0; i < n; ++i)
      frac(i) = static_cast<double>(idx[static_cast<std::size_t>(i)]) / m;
    nodes.push_back(cusp.frame.exp_translation(cusp.lattice * frac));
    int c = 0;
    while (c < n && ++idx[static_cast<std::size_t>(c)] == m) {
      idx[static_cast<std::size_t>(c)] = 0;
      ++c;
    }
    if (c == n) break;
  }
  return nodes;
}

// Least-squares fit of y_j ~ alpha e^{s r_j} + beta e^{(2n-s) r_j} for every
// component, with rows weighted by the sample magnitude so that the fit
// controls the relative error per dilation sample rather than letting the
// largest samples dominate. Returns the (2 x dim) coefficient matrix and the
// weighted relative residual.
struct TwoExpFit {
  Matrix coefs;
  double residual = 0.0;
};

TwoExpFit fit_two_exponentials(const std::vector<double>& r, const Matrix& samples,
                               double s, int n) {
  const int rows = static_cast<int>(r.size());
  Matrix A(rows, 2);
  for (int j = 0; j < rows; ++j) {
    A(j, 0) = std::exp(s * r[static_cast<std::size_t>(j)]);
    A(j, 1) = std::exp((2.0 * n - s) * r[static_cast<std::size_t>(j)]);
  }
  // First pass sets the magnitude envelope of the model per sample; the
  // second pass weights rows by it, so the fit controls relative errors
  // without over-weighting samples where the two profiles cancel.
  const Matrix coarse = A.colPivHouseholderQr().solve(samples);
  Matrix Aw = A;
  Matrix Sw = samples;
  for (int j = 0; j < rows; ++j) {
    const double mu =
        A(j, 0) * coarse.row(0).norm() + A(j, 1) * coarse.row(1).norm();
    const double w = 1.0 / std::max(mu, 1e-30);
    Aw.row(j) *= w;
    Sw.row(j) *= w;
  }
  TwoExpFit fit;
  fit.coefs = Aw.colPivHouseholderQr().solve(Sw);
  const double denom = Sw.norm();
  fit.residual = denom > 0.0 ? (Aw * fit.coefs - Sw).norm() / denom : 0.0;
  return fit;
}

}  // namespace

IntertwiningResult intertwine(const KleinianGroup& group, const CuspDatum& cusp_from,
                              const CuspDatum& cusp_to,
                              CoefficientModule::Kind kind, const Vector& v_source,
                              double s, const IntertwineOptions& opt) {
  const int n = group.n;
  if (std::abs(2.0 * s - 2.0 * n) < 0.1)
    throw std::invalid_argument(
        "intertwine: exponents s and 2n-s are numerically indistinguishable");
  if (!cusp_from.full_rank || !cusp_to.full_rank)
    throw std::invalid_argument("intertwine: both cusps must be full rank");

  if (opt.enforce_gate) {
    const ConvergenceGate gate = convergence_gate(group, cusp_from, s, opt.gate_word_length);
    if (gate.decision != ConvergenceDecision::Converges)
      throw GateRefused("intertwine: series gate refused at s/2 = " + std::to_string(0.5 * s) +
                        " (growth exponent " + std::to_string(gate.estimate.delta_hat) +
                        " +- " + std::to_string(gate.estimate.band) + ")");
  }

  const CoefficientModule module = (kind == CoefficientModule::Kind::Adjoint)
                                       ? adjoint_module(cusp_from.frame)
                                       : trivial_module(n);
  const ExtendedForm form = (kind == CoefficientModule::Kind::Adjoint)
                                ? extend(phi(cusp_from.frame, module, v_source), s)
                                : extend(phi_trivial(cusp_from.frame, v_source(0)), s);
  const int flat_dim = (1 + n) * module.dim;

  int L0 = std::min(opt.trunc.min_length, opt.trunc.max_word_length);
  int quad_m = opt.quad_m;

  for (int attempt = 0;; ++attempt) {
    const SampleGrid samples = dilation_samples(cusp_to.frame, opt.r_max, opt.n_samples);
    const std::vector<Matrix> nodes = torus_nodes(cusp_to, quad_m);
    const std::size_t n_nodes = nodes.size();
    const std::size_t n_points = samples.g.size() * n_nodes;

    // Evaluation points u * exp(rT), fixed for all refinements.
    std::vector<Matrix> points;
    points.reserve(n_points);
    for (std::size_t sj = 0; sj < samples.g.size(); ++sj)
      for (std::size_t nj = 0; nj < n_nodes; ++nj) points.push_back(nodes[nj] * samples.g[sj]);

    // Refine the truncation, accumulating only the freshly added coset
    // representatives at every point, and stop when the fitted profile
    // stabilizes.
    CosetEnumerator ce(group, cusp_from, 1e-7, opt.trunc.max_elements);
    std::vector<Vector> sums(n_points, Vector::Zero(flat_dim));
    std::size_t consumed = 0;

    Matrix avg_full(static_cast<int>(samples.g.size()), flat_dim);
    Matrix avg_half(static_cast<int>(samples.g.size()), flat_dim);
    std::vector<std::size_t> half_nodes;
    {
      std::vector<int> idx(static_cast<std::size_t>(n), 0);
      std::size_t flat = 0;
      for (;;) {
        bool even = true;
        for (int i = 0; i < n; ++i)
          if (idx[static_cast<std::size_t>(i)] % 2 != 0) even = false;
        if (even) half_nodes.push_back(flat);
        ++flat;
        int c = 0;
        while (c < n && ++idx[static_cast<std::size_t>(c)] == quad_m) {
          idx[static_cast<std::size_t>(c)] = 0;
          ++c;
        }
        if (c == n) break;
      }
    }

    TwoExpFit fit;
    double tail = 0.0;
    double prev_drift = -1.0;
    bool have_fit = false;
    Matrix prev_coefs;
    int L = L0;
    for (;;) {
      ce.extend_to(L);
      const CosetEnumeration& cs = ce.cosets();
      const std::size_t fresh_lo = consumed, fresh_hi = cs.reps.size();
      // Deterministic parallel accumulation over evaluation points.
      const std::vector<Vector> increments = parallel_map<Vector>(
          n_points, [&](std::size_t i) -> Vector {
            Vector acc = Vector::Zero(flat_dim);
            for (std::size_t rix = fresh_lo; rix < fresh_hi; ++rix) {
              if (opt.trunc.t_threshold > 0.0 && cs.t_values[rix] < opt.trunc.t_threshold)
                continue;
              acc += form.value(cs.reps[rix] * points[i]).flat();
            }
            return acc;
          });
      for (std::size_t i = 0; i < n_points; ++i) sums[i] += increments[i];
      consumed = fresh_hi;

      for (std::size_t sj = 0; sj < samples.g.size(); ++sj) {
        Vector acc = Vector::Zero(flat_dim);
        for (std::size_t nj = 0; nj < n_nodes; ++nj) acc += sums[sj * n_nodes + nj];
        avg_full.row(static_cast<int>(sj)) = acc / static_cast<double>(n_nodes);
        Vector acc2 = Vector::Zero(flat_dim);
        for (const std::size_t nj : half_nodes) acc2 += sums[sj * n_nodes + nj];
        avg_half.row(static_cast<int>(sj)) = acc2 / static_cast<double>(half_nodes.size());
      }

      fit = fit_two_exponentials(samples.r, avg_full, s, n);
      if (have_fit) {
        const double drift =
            (fit.coefs - prev_coefs).norm() / std::max(fit.coefs.norm(), 1e-30);
        double ratio = 0.5;
        if (prev_drift > 0.0 && drift > 0.0) ratio = std::min(drift / prev_drift, 0.95);
        tail = drift * ratio / (1.0 - ratio);
        if (tail < opt.trunc.epsilon || drift == 0.0) break;
        prev_drift = drift;
      }
      prev_coefs = fit.coefs;
      have_fit = true;
      if (cs.L >= opt.trunc.max_word_length) break;
      L = std::min(cs.L + 2, opt.trunc.max_word_length);
    }
    const CosetEnumeration& cosets = ce.cosets();

    const Vector init_flat = form.initial.flat();
    const double delta_hat = fit.coefs.row(0).dot(init_flat) / init_flat.squaredNorm();

    IntertwiningResult out;
    out.n = n;
    out.s = s;
    out.alpha = FormValue::from_flat(fit.coefs.row(0).transpose(), n, module.dim);
    out.c_term = FormValue::from_flat(fit.coefs.row(1).transpose(), n, module.dim);
    out.delta_coefficient = delta_hat;
    out.fit_residual = fit.residual;
    out.quad_m = quad_m;
    out.max_word_length = cosets.L;
    out.coset_count = static_cast<long>(cosets.reps.size());
    out.tail_estimate = tail;
    out.sample_r = samples.r;

    if (opt.quad_refine_check) {
      const TwoExpFit coarse = fit_two_exponentials(samples.r, avg_half, s, n);
      const double delta_coarse = coarse.coefs.row(0).dot(init_flat) / init_flat.squaredNorm();
      const double c_drift = (coarse.coefs.row(1) - fit.coefs.row(1)).norm() /
                             std::max(1e-30, fit.coefs.row(1).norm() + std::abs(delta_hat));
      out.quadrature_tol = std::max(std::abs(delta_hat - delta_coarse), c_drift);
    }

    if (fit.residual <= opt.fit_residual_limit) return out;
    if (attempt >= opt.max_retries)
      throw std::runtime_error(
          "intertwine: two-exponential fit residual " + std::to_string(fit.residual) +
          " above limit; truncation or quadrature insufficient");
    L0 = std::min(L0 + 2, opt.trunc.max_word_length);
    quad_m *= 2;
  }
}

ConstantTermSplit weight_split_cterm(const IntertwiningResult& result,
                                     const CoefficientModule& target_module) {
  ConstantTermSplit split;
  const int n = result.n;
  if (target_module.kind == CoefficientModule::Kind::Trivial) {
    split.adjoint = false;
    split.trivial_part = result.c_term;
    return split;
  }
  split.adjoint = true;
  auto project = [&](int w) {
    FormValue F = FormValue::zero(n, target_module.dim);
    F.pure = target_module.weight_project(result.c_term.pure, w);
    for (int j = 0; j < n; ++j)
      F.dt[static_cast<std::size_t>(j)] =
          target_module.weight_project(result.c_term.dt[static_cast<std::size_t>(j)], w);
    return F;
  };
  split.plus2 = project(2);
  split.zero = project(0);
  split.minus2 = project(-2);
  return split;
}

namespace {

// Assemble the dt blocks of a form value into CE (n-1)-cochain coordinates:
// dt[j] is the coefficient of the multi-index {0..n-1} \ {j}.
Vector dt_as_cochain(const FormValue& F, const CeComplex& cx) {
  const int n = cx.n;
  const int dv = cx.module.dim;
  const CochainSpace& S = cx.spaces[static_cast<std::size_t>(n - 1)];
  Vector psi = Vector::Zero(S.dim());
  for (int j = 0; j < n; ++j) {
    std::vector<int> I;
    for (int r = 0; r < n; ++r)
      if (r != j) I.push_back(r);
    psi.segment(S.index_of(I) * dv, dv) = F.dt[static_cast<std::size_t>(j)];
  }
  return psi;
}

}  // namespace

RestrictedClass restricted_class(const IntertwiningResult& result,
                                 const CeComplex& target_complex) {
  const CeComplex& cx = target_complex;
  const int n = cx.n;
  const int dv = cx.module.dim;
  RestrictedClass out;

  // Strong restriction at t = 1: the pure parts of both fitted profiles.
  const Vector restricted = result.alpha.pure + result.c_term.pure;

  // Class coordinates against [harmonic basis | coboundaries].
  const CohomologyReport top = top_cohomology(cx);
  const Matrix& D = cx.d[static_cast<std::size_t>(n - 1)].d;
  const int hdim = static_cast<int>(top.harmonic_basis.size());
  // The harmonic representatives are orthogonal to the image of d, so the
  // class block of any least-squares solution is unique.
  Matrix design(dv, hdim + static_cast<int>(D.cols()));
  for (int i = 0; i < hdim; ++i) design.col(i) = top.harmonic_basis[static_cast<std::size_t>(i)];
  design.rightCols(D.cols()) = D;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  const Vector sol = cod.solve(restricted);
  out.class_coords = sol.head(hdim);

  const double c_norm = std::max(result.c_term.norm(), 1e-30);
  if (cx.module.kind == CoefficientModule::Kind::Adjoint) {
    const Vector a_plus2 = cx.module.weight_project(result.c_term.pure, 2);
    const Vector a_zero = cx.module.weight_project(result.c_term.pure, 0);
    const Vector a_minus2 = cx.module.weight_project(result.c_term.pure, -2);
    out.minus2_fraction = a_minus2.norm() / c_norm;

    // The restricted constant-term class must die: its plus2+zero part is a
    // coboundary.
    const PrimitiveFit fit = coboundary_fit(cx, Vector(a_plus2 + a_zero));
    out.coboundary_residual = fit.residual;

    // Differential identities tying the pure components to the dt parts.
    FormValue dt_zero = FormValue::zero(n, dv);
    FormValue dt_minus2 = FormValue::zero(n, dv);
    for (int j = 0; j < n; ++j) {
      dt_zero.dt[static_cast<std::size_t>(j)] =
          cx.module.weight_project(result.c_term.dt[static_cast<std::size_t>(j)], 0);
      dt_minus2.dt[static_cast<std::size_t>(j)] =
          cx.module.weight_project(result.c_term.dt[static_cast<std::size_t>(j)], -2);
    }
    const Vector d_dt_zero = D * dt_as_cochain(dt_zero, cx);
    const Vector d_dt_minus2 = D * dt_as_cochain(dt_minus2, cx);
    out.identity_residual_plus2 = ((2.0 - result.s) * a_plus2 - d_dt_zero).norm() / c_norm;
    out.identity_residual_zero = ((-result.s) * a_zero - d_dt_minus2).norm() / c_norm;
  } else {
    // At the closed trivial degree the constant-term profile e^{(2n-s)r} is
    // flat, so the fitted c-term competes with the truncation deficit and
    // its own norm can be pure noise. Resolve the fraction against the
    // constant-term norm or, when that is negligible, the scale of the
    // whole restricted object.
    const double object_scale = result.alpha.norm() + result.c_term.norm();
    const double denom = std::max(c_norm, 0.05 * object_scale);
    out.trivial_c1_fraction = result.c_term.pure.norm() / std::max(denom, 1e-30);
  }
  return out;
}

RestrictionReport independence_report(const KleinianGroup& group,
                                      const std::vector<CuspDatum>& cusps,
                                      CoefficientModule::Kind kind,
                                      const IntertwineOptions& opt) {
  RestrictionReport rep;
  rep.n = group.n;
  rep.kind = kind;
  rep.cusp_count = static_cast<int>(cusps.size());
  rep.classes_per_cusp = (kind == CoefficientModule::Kind::Adjoint) ? group.n : 1;
  if (cusps.empty())
    throw std::invalid_argument("independence_report: need at least one cusp");
  for (const CuspDatum& c : cusps)
    if (!c.full_rank || !c.is_toric)
      throw std::invalid_argument("independence_report: cusps must be full-rank and toric");

  const int block = rep.classes_per_cusp;
  const int size = block * rep.cusp_count;
  rep.restriction_matrix = Matrix::Zero(size, size);

  std::vector<CeComplex> complexes;
  for (const CuspDatum& c : cusps) {
    const CoefficientModule m = (kind == CoefficientModule::Kind::Adjoint)
                                    ? adjoint_module(c.frame)
                                    : trivial_module(group.n);
    complexes.push_back(build_complex(c.frame, m));
  }

  for (int src = 0; src < rep.cusp_count; ++src) {
    const CoefficientModule m_src = (kind == CoefficientModule::Kind::Adjoint)
                                        ? adjoint_module(cusps[static_cast<std::size_t>(src)].frame)
                                        : trivial_module(group.n);
    for (int k = 0; k < block; ++k) {
      Vector v;
      if (kind == CoefficientModule::Kind::Adjoint) {
        v = Vector::Zero(m_src.dim);
        v(m_src.weights->block_offset(-2) + k) = 1.0;
      } else {
        v = Vector::Ones(1);
      }
      const double s = (kind == CoefficientModule::Kind::Adjoint) ? 2.0 * group.n + 2.0
                                                                  : 2.0 * group.n;
      for (int dst = 0; dst < rep.cusp_count; ++dst) {
        try {
          IntertwiningResult run =
              intertwine(group, cusps[static_cast<std::size_t>(src)],
                         cusps[static_cast<std::size_t>(dst)], kind, v, s, opt);
          const RestrictedClass cls =
              restricted_class(run, complexes[static_cast<std::size_t>(dst)]);
          rep.restriction_matrix.block(dst * block, src * block + k, block, 1) =
              cls.class_coords;
          rep.runs.push_back(std::move(run));
        } catch (const GateRefused&) {
          throw;  // a refused gate refuses the whole report
        } catch (const std::exception& e) {
          rep.partial = true;
          rep.messages.push_back(e.what());
        }
      }
    }
  }

  Eigen::JacobiSVD<Matrix> svd(rep.restriction_matrix);
  const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 0.1 * smax) ++rep.rank;
  rep.cusp_bound = static_cast<double>(rep.rank) / block;
  rep.independent = (rep.rank == size) && !rep.partial;
  return rep;
}

}  // namespace cusplab
