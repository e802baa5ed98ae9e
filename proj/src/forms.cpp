#include "cusplab/forms.hpp"

#include <cmath>

#include "cusplab/parallel.hpp"

namespace cusplab {

FormValue FormValue::zero(int n, int module_dim) {
  FormValue F;
  F.pure = Vector::Zero(module_dim);
  F.dt.assign(static_cast<std::size_t>(n), Vector::Zero(module_dim));
  return F;
}

Vector FormValue::flat() const {
  const int dv = module_dim();
  Vector v((1 + n()) * dv);
  v.head(dv) = pure;
  for (int j = 0; j < n(); ++j) v.segment((1 + j) * dv, dv) = dt[static_cast<std::size_t>(j)];
  return v;
}

FormValue FormValue::from_flat(const Vector& v, int n, int module_dim) {
  FormValue F = zero(n, module_dim);
  F.pure = v.head(module_dim);
  for (int j = 0; j < n; ++j)
    F.dt[static_cast<std::size_t>(j)] = v.segment((1 + j) * module_dim, module_dim);
  return F;
}

double FormValue::norm() const { return flat().norm(); }

FormValue& FormValue::operator+=(const FormValue& o) {
  pure += o.pure;
  for (std::size_t j = 0; j < dt.size(); ++j) dt[j] += o.dt[j];
  return *this;
}

FormValue& FormValue::operator*=(double c) {
  pure *= c;
  for (auto& block : dt) block *= c;
  return *this;
}

FormValue operator+(FormValue a, const FormValue& b) { return a += b; }
FormValue operator-(FormValue a, const FormValue& b) {
  FormValue mb = b;
  mb *= -1.0;
  return a += mb;
}
FormValue operator*(double c, FormValue v) { return v *= c; }

CuspForm phi(const ParabolicFrame& frame, const CoefficientModule& module,
             const Vector& v) {
  if (module.kind != CoefficientModule::Kind::Adjoint)
    throw std::invalid_argument("phi: adjoint module expected, use phi_trivial otherwise");
  const Vector rest = v - module.weight_project(v, -2);
  if (rest.cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("phi: initial vector must lie in the lowest weight block");
  if (v.norm() == 0.0) throw std::invalid_argument("phi: initial vector must be nonzero");
  CuspForm f{frame, module, FormValue::zero(frame.n, module.dim), -2};
  f.initial.pure = v;
  return f;
}

CuspForm phi_trivial(const ParabolicFrame& frame, double scale) {
  CuspForm f{frame, trivial_module(frame.n), FormValue::zero(frame.n, 1), std::nullopt};
  f.initial.pure(0) = scale;
  return f;
}

ExtendedForm extend(const CuspForm& form, double s) {
  return ExtendedForm{form.frame, form.module, form.initial, s, form.weight_tag};
}

ExtendedForm make_extension(const ParabolicFrame& frame,
                            const CoefficientModule& module,
                            const FormValue& initial, double s) {
  return ExtendedForm{frame, module, initial, s, std::nullopt};
}

namespace {

// W-coordinates (T first, then u_1..u_n) of the projection onto the
// dilation + horospherical block along the compact algebra. Writing
// X = m + c T + sum a_i u_i + sum b_i theta(u_i) with m in so(n), the
// identity u_i + theta(u_i) in so(n+1) gives P(X) = c T + sum (a_i - b_i) u_i.
Vector project_W(const AdaptedBasis& B, const Vector& coords) {
  const int n = B.n;
  Vector w(n + 1);
  w(0) = coords(n);  // T coefficient
  const int off_u = n + 1 + n * (n - 1) / 2;
  for (int i = 0; i < n; ++i) w(1 + i) = coords(off_u + i) - coords(i);
  return w;
}

Vector w_coords_of(const ParabolicFrame& frame, const Matrix& X) {
  const Vector c =
      frame.std_basis.coordinates(frame.k_conj.transpose() * X * frame.k_conj);
  return project_W(frame.std_basis, c);
}

// Evaluate a form value on n algebra arguments given by W-coordinate columns.
Vector evaluate_on_arguments(const FormValue& F, const std::vector<Vector>& w_args) {
  const int n = F.n();
  const int dv = F.module_dim();
  Matrix M(n + 1, n);
  for (int j = 0; j < n; ++j) M.col(j) = w_args[static_cast<std::size_t>(j)];
  Vector acc = Vector::Zero(dv);
  {
    const Matrix minor = M.bottomRows(n);  // pure block: u-rows only
    acc += minor.determinant() * F.pure;
  }
  for (int j = 0; j < n; ++j) {
    Matrix minor(n, n);
    int rr = 0;
    for (int r = 0; r <= n; ++r) {
      if (r == 1 + j) continue;
      minor.row(rr++) = M.row(r);
    }
    acc += minor.determinant() * F.dt[static_cast<std::size_t>(j)];
  }
  return acc;
}

}  // namespace

FormValue twist_by_rotation(const FormValue& F, const Matrix& k,
                            const ParabolicFrame& frame,
                            const CoefficientModule& module) {
  const int n = frame.n;
  const int dv = module.dim;
  const AdaptedBasis& B = frame.std_basis;

  // Column j of A: W-coordinates of P(Ad(k) e_j) for e_j in (T, u_1..u_n),
  // computed in the standard frame where the coordinate map is exact.
  const Matrix k_std = frame.k_conj.transpose() * k * frame.k_conj;
  Matrix A(n + 1, n + 1);
  A.col(0) = project_W(B, B.coordinates(k_std * B.T * k_std.transpose()));
  for (int j = 0; j < n; ++j)
    A.col(1 + j) = project_W(
        B, B.coordinates(k_std * B.u[static_cast<std::size_t>(j)] * k_std.transpose()));

  // Basis n-subsets of W-indices: 0 <-> pure (all u-rows), 1+j <-> dt_j.
  auto subset = [&](int which) {
    std::vector<int> rows;
    for (int r = 0; r <= n; ++r)
      if ((which == 0 && r != 0) || (which > 0 && r != which)) rows.push_back(r);
    return rows;
  };
  auto block_of = [&](const FormValue& G, int which) -> const Vector& {
    return which == 0 ? G.pure : G.dt[static_cast<std::size_t>(which - 1)];
  };

  const Matrix k_inv = k.transpose();
  FormValue out = FormValue::zero(n, dv);
  for (int dst = 0; dst <= n; ++dst) {
    const auto dst_cols = subset(dst);
    Vector acc = Vector::Zero(dv);
    for (int src = 0; src <= n; ++src) {
      const auto src_rows = subset(src);
      Matrix minor(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          minor(r, c) = A(src_rows[static_cast<std::size_t>(r)],
                          dst_cols[static_cast<std::size_t>(c)]);
      const double det = minor.determinant();
      if (det != 0.0) acc += det * block_of(F, src);
    }
    const Vector twisted = module.act(k_inv, acc);
    if (dst == 0)
      out.pure = twisted;
    else
      out.dt[static_cast<std::size_t>(dst - 1)] = twisted;
  }
  return out;
}

FormValue ExtendedForm::value(const Matrix& g) const {
  const IwasawaFactors F = iwasawa(g, frame);
  FormValue out = twist_by_rotation(initial, F.k_part, frame, module);
  out *= std::pow(F.t, s);
  return out;
}

DifferentialCoefficient differential(const ExtendedForm& form, double tol) {
  const int n = form.frame.n;
  DifferentialCoefficient out;
  out.dilation_term = form.s;

  for (const auto& blk : form.initial.dt)
    if (blk.cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument("differential: expected a pure horospherical extension");

  if (form.module.kind == CoefficientModule::Kind::Adjoint) {
    const Vector v = form.initial.pure;
    if (v.norm() == 0.0) throw std::invalid_argument("differential: zero initial value");
    const Vector tv = form.module.act_derivative(form.frame.T, v);
    const double ell = tv.dot(v) / v.squaredNorm();
    if ((tv - ell * v).norm() > 1e-8 * std::max(1.0, v.norm()))
      throw std::invalid_argument("differential: mixed-weight initial value, decompose first");
    out.weight_term = ell;
  }

  // Alternating insertion of [T, u_i] into the i-th horospherical slot;
  // moving the bracket argument back to the front costs the sign that
  // cancels against the coboundary's, leaving a minus per slot.
  std::vector<Vector> args(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    args[static_cast<std::size_t>(i)] =
        w_coords_of(form.frame, form.frame.u[static_cast<std::size_t>(i)]);
  const Vector base = evaluate_on_arguments(form.initial, args);
  double bracket_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    auto inserted = args;
    inserted[static_cast<std::size_t>(i)] = w_coords_of(
        form.frame, bracket(form.frame.T, form.frame.u[static_cast<std::size_t>(i)]));
    const Vector term = evaluate_on_arguments(form.initial, inserted);
    bracket_sum -= term.dot(base) / base.squaredNorm();
  }
  out.bracket_term = bracket_sum;
  out.c = out.dilation_term + out.weight_term + out.bracket_term;
  return out;
}

Vector fd_differential(const std::function<FormValue(const Matrix&)>& form,
                       const ParabolicFrame& frame, const CoefficientModule& module,
                       const Matrix& g, double h) {
  const int n = frame.n;
  const int dv = module.dim;
  std::vector<Matrix> X;
  X.push_back(frame.T);
  for (int i = 0; i < n; ++i) X.push_back(frame.u[static_cast<std::size_t>(i)]);

  std::vector<Vector> w_all(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i)
    w_all[static_cast<std::size_t>(i)] = w_coords_of(frame, X[static_cast<std::size_t>(i)]);

  Vector acc = Vector::Zero(dv);
  const FormValue Fg = form(g);

  // (-1)^i (X_i + rho(X_i)) phi(...hat X_i...), derivatives by central
  // differences along g exp(+- h X_i).
  for (int i = 0; i <= n; ++i) {
    std::vector<Vector> rest;
    for (int j = 0; j <= n; ++j)
      if (j != i) rest.push_back(w_all[static_cast<std::size_t>(j)]);
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;

    const Matrix step = exp_algebra(Matrix(h * X[static_cast<std::size_t>(i)]));
    const Matrix step_inv = exp_algebra(Matrix(-h * X[static_cast<std::size_t>(i)]));
    const Vector plus = evaluate_on_arguments(form(g * step), rest);
    const Vector minus = evaluate_on_arguments(form(g * step_inv), rest);
    acc += sign * (plus - minus) / (2.0 * h);

    if (module.kind == CoefficientModule::Kind::Adjoint)
      acc += sign * module.act_derivative(X[static_cast<std::size_t>(i)],
                                          evaluate_on_arguments(Fg, rest));
  }

  // (-1)^{i+j} phi([X_i, X_j], ...hat X_i ... hat X_j ...).
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      const Matrix Xij =
          bracket(X[static_cast<std::size_t>(i)], X[static_cast<std::size_t>(j)]);
      std::vector<Vector> args;
      args.push_back(w_coords_of(frame, Xij));
      for (int r = 0; r <= n; ++r)
        if (r != i && r != j) args.push_back(w_all[static_cast<std::size_t>(r)]);
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      acc += sign * evaluate_on_arguments(Fg, args);
    }
  return acc;
}

Vector fd_differential(const ExtendedForm& form, const Matrix& g, double h) {
  return fd_differential([&form](const Matrix& x) { return form.value(x); },
                         form.frame, form.module, g, h);
}

FormValue eisenstein_value(const ExtendedForm& form, const CosetEnumeration& cosets,
                           const Matrix& g, double t_threshold) {
  const int n = form.frame.n;
  const int dv = form.module.dim;
  const Vector zero = Vector::Zero((1 + n) * dv);
  const Vector sum = parallel_reduce<Vector>(
      cosets.reps.size(), zero,
      [&](std::size_t i) -> Vector {
        if (t_threshold > 0.0 && cosets.t_values[i] < t_threshold) return zero;
        return form.value(cosets.reps[i] * g).flat();
      },
      [](Vector a, const Vector& b) -> Vector { return a + b; });
  return FormValue::from_flat(sum, n, dv);
}

TruncatedSeries eisenstein(const ExtendedForm& form, const KleinianGroup& group,
                           const CuspDatum& cusp, const Matrix& g,
                           const TruncationOptions& trunc) {
  const int n = form.frame.n;
  const int dv = form.module.dim;
  const int flat_dim = (1 + n) * dv;

  TruncatedSeries out;
  out.s = form.s;
  out.t_threshold = trunc.t_threshold;

  CosetEnumerator ce(group, cusp, 1e-7, trunc.max_elements);
  Vector running = Vector::Zero(flat_dim);
  std::vector<double> shells;
  std::size_t consumed = 0;
  FormValue prev;
  bool have_prev = false;
  double prev_delta = -1.0;

  int L = std::min(trunc.min_length, trunc.max_word_length);
  for (;;) {
    ce.extend_to(L);
    const CosetEnumeration& cs = ce.cosets();
    shells.resize(static_cast<std::size_t>(cs.L) + 1, 0.0);

    // Accumulate only the representatives added by this refinement:
    // flat summand values and per-shell norms in one deterministic pass.
    const std::size_t fresh = cs.reps.size() - consumed;
    const int n_shells = static_cast<int>(shells.size());
    const Vector zero = Vector::Zero(flat_dim + n_shells);
    const Vector delta_sum = parallel_reduce<Vector>(
        fresh, zero,
        [&](std::size_t i) -> Vector {
          const std::size_t r = consumed + i;
          Vector item = Vector::Zero(flat_dim + n_shells);
          if (trunc.t_threshold > 0.0 && cs.t_values[r] < trunc.t_threshold) return item;
          const Vector val = form.value(cs.reps[r] * g).flat();
          item.head(flat_dim) = val;
          item(flat_dim + cs.word_length[r]) = val.norm();
          return item;
        },
        [](Vector a, const Vector& b) -> Vector { return a + b; });
    running += delta_sum.head(flat_dim);
    for (int k = 0; k < n_shells; ++k) shells[static_cast<std::size_t>(k)] += delta_sum(flat_dim + k);
    consumed = cs.reps.size();

    out.value = FormValue::from_flat(running, n, dv);
    out.max_word_length = cs.L;
    out.coset_count = static_cast<long>(cs.reps.size());
    out.inside_horoball_count = cs.inside_horoball_count;
    out.shell_masses = shells;

    if (have_prev) {
      const double delta = (out.value - prev).norm();
      out.refinement_deltas.push_back(delta);
      if (prev_delta >= 0.0 && delta >= prev_delta && delta > 0.0)
        out.tail_decreasing = false;
      double ratio = 0.5;
      if (prev_delta > 0.0 && delta > 0.0) ratio = std::min(delta / prev_delta, 0.95);
      out.tail_estimate = delta * ratio / (1.0 - ratio);
      const double scale = std::max(out.value.norm(), 1e-30);
      if (out.tail_estimate / scale < trunc.epsilon || delta == 0.0) break;
      prev_delta = delta;
    }
    prev = out.value;
    have_prev = true;
    if (L >= trunc.max_word_length) break;
    L = std::min(L + 2, trunc.max_word_length);
  }
  return out;
}

}  // namespace cusplab
