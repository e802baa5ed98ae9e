// Batch driver: loads a group, runs one of the verification pipelines and
// writes a deterministic report (json, csv or text). Exit codes:
//   0 all criteria pass, 2 numeric failure, 3 gate refused, 4 config error.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cusplab/parallel.hpp"
#include "cusplab/report.hpp"

namespace {

using namespace cusplab;

struct CommonOpts {
  std::string preset;
  std::string group_file;
  std::string module_kind = "adjoint";
  double s_override = std::numeric_limits<double>::quiet_NaN();
  int max_word_len = 14;
  double epsilon = 1e-4;
  int quadrature = 8;
  int detect_len = 4;
  std::string out_path;
  std::string format = "json";
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_group) {
  if (needs_group) {
    cmd->add_option("--preset", o.preset, "built-in group preset name");
    cmd->add_option("--group", o.group_file, "path to a group definition JSON file");
  }
  cmd->add_option("--module", o.module_kind, "coefficient module: trivial | adjoint")
      ->check(CLI::IsMember({"trivial", "adjoint"}));
  cmd->add_option("--s", o.s_override, "degree parameter override");
  cmd->add_option("--max-word-len", o.max_word_len, "word length cap for series truncation");
  cmd->add_option("--epsilon", o.epsilon, "relative tail target for series refinement");
  cmd->add_option("--quadrature", o.quadrature, "torus quadrature points per dimension");
  cmd->add_option("--detect-len", o.detect_len, "word length for cusp detection");
  cmd->add_option("--out", o.out_path, "output file (default stdout)");
  cmd->add_option("--format", o.format, "json | csv | text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  cmd->add_option("--threads", o.threads, "worker cap (0 = hardware)");
}

KleinianGroup resolve_group(const CommonOpts& o) {
  if (!o.preset.empty()) return preset_group(o.preset);
  if (!o.group_file.empty()) return load_group(o.group_file);
  throw CLI::ValidationError("--preset or --group is required");
}

CoefficientModule::Kind module_kind(const CommonOpts& o) {
  return o.module_kind == "adjoint" ? CoefficientModule::Kind::Adjoint
                                    : CoefficientModule::Kind::Trivial;
}

double closed_degree(int n, CoefficientModule::Kind kind) {
  return kind == CoefficientModule::Kind::Adjoint ? 2.0 * n + 2.0 : 2.0 * n;
}

double resolve_s(const CommonOpts& o, int n) {
  if (!std::isnan(o.s_override)) return o.s_override;
  return closed_degree(n, module_kind(o));
}

nlohmann::ordered_json config_echo(const CommonOpts& o, int n) {
  nlohmann::ordered_json j;
  j["preset"] = o.preset;
  j["group_file"] = o.group_file;
  j["module"] = o.module_kind;
  j["n"] = n;
  j["s"] = resolve_s(o, n);
  j["max_word_len"] = o.max_word_len;
  j["epsilon"] = o.epsilon;
  j["quadrature"] = o.quadrature;
  j["detect_len"] = o.detect_len;
  return j;
}

void emit(const Report& rep, const CommonOpts& o) {
  std::string payload;
  if (o.format == "json")
    payload = to_json(rep).dump(2) + "\n";
  else if (o.format == "csv")
    payload = to_csv(rep);
  else
    payload = to_text(rep);
  if (o.out_path.empty()) {
    std::cout << payload;
  } else {
    std::ofstream out(o.out_path);
    if (!out) throw std::runtime_error("cannot write " + o.out_path);
    out << payload;
  }
}

TruncationOptions truncation_of(const CommonOpts& o) {
  TruncationOptions t;
  t.max_word_length = o.max_word_len;
  t.epsilon = o.epsilon;
  return t;
}

IntertwineOptions intertwine_options(const CommonOpts& o) {
  IntertwineOptions opt;
  opt.quad_m = o.quadrature;
  opt.trunc = truncation_of(o);
  return opt;
}

// --- subcommands -----------------------------------------------------------

Report run_cohomology(const CommonOpts& o, int n) {
  const ParabolicFrame f = standard_frame(n);
  const CoefficientModule mod = module_kind(o) == CoefficientModule::Kind::Adjoint
                                    ? adjoint_module(f)
                                    : trivial_module(n);
  const CeComplex cx = build_complex(f, mod);

  Report rep;
  rep.command = "cohomology";
  rep.config = config_echo(o, n);
  rep.results["reports"] = nlohmann::ordered_json::array();
  for (int k = 0; k <= n; ++k)
    rep.results["reports"].push_back(to_json(cohomology_report(cx, k)));

  // d composes to zero and the top dimension matches the module.
  double dd = 0.0;
  for (int k = 0; k + 1 <= n; ++k) {
    const Matrix prod = cx.d[static_cast<std::size_t>(k + 1)].d * cx.d[static_cast<std::size_t>(k)].d;
    if (prod.size() > 0) dd = std::max(dd, prod.cwiseAbs().maxCoeff());
  }
  rep.criteria.push_back({"d_compose_d_zero", dd, 0.0, dd == 0.0});
  const CohomologyReport top = top_cohomology(cx);
  const int expected = mod.kind == CoefficientModule::Kind::Adjoint ? n : 1;
  rep.criteria.push_back({"dim_H_top", static_cast<double>(top.dim_H),
                          static_cast<double>(expected), top.dim_H == expected});
  return rep;
}

Report run_closedness(const CommonOpts& o, int n) {
  const ParabolicFrame f = standard_frame(n);
  Report rep;
  rep.command = "closedness";
  rep.config = config_echo(o, n);
  rep.results["grid"] = nlohmann::ordered_json::array();

  const Matrix g = f.exp_translation(Vector::Constant(n, 0.3)) * f.exp_dilation(0.2);
  const double h = 1e-4;

  auto record = [&](const char* module_name, int ell, double s, const ExtendedForm& form) {
    const DifferentialCoefficient dc = differential(form);
    const Vector fd = fd_differential(form, g, h);
    // reference value: (dt/t ^ form) on the top tuple equals the pure value
    const FormValue val = form.value(g);
    const double ref = val.pure.norm();
    const double c_fd = ref > 0.0 ? fd.dot(val.pure) / (ref * ref) : 0.0;
    nlohmann::ordered_json row;
    row["module"] = module_name;
    row["weight"] = ell;
    row["s"] = s;
    row["c_analytic"] = dc.c;
    row["c_fd"] = c_fd;
    rep.results["grid"].push_back(row);
    const double err = std::abs(c_fd - dc.c) / std::max(1.0, std::abs(dc.c));
    std::ostringstream name;
    name << module_name << "_w" << ell << "_s" << s;
    rep.criteria.push_back({name.str(), err, 1e-4, err <= 1e-4});
  };

  const CoefficientModule adj = adjoint_module(f);
  const std::vector<double> s_grid = {2.0 * n - 2.0, 2.0 * n - 1.0, 2.0 * n,
                                      2.0 * n + 1.0, 2.0 * n + 2.0};
  for (const int ell : {-2, 0, 2}) {
    Vector v = Vector::Zero(adj.dim);
    v(adj.weights->block_offset(ell)) = 1.0;
    for (const double s : s_grid) {
      FormValue init = FormValue::zero(n, adj.dim);
      init.pure = v;
      record("adjoint", ell, s, make_extension(f, adj, init, s));
    }
  }
  for (const double s : s_grid)
    record("trivial", 0, s, extend(phi_trivial(f), s));
  return rep;
}

Report run_poincare(const CommonOpts& o) {
  const KleinianGroup G = resolve_group(o);
  const double s = std::isnan(o.s_override) ? 0.0 : o.s_override;
  const PoincareEstimate est = poincare_series(G, s, o.max_word_len);

  Report rep;
  rep.command = "poincare";
  rep.config = config_echo(o, G.n);
  rep.config["s"] = s;
  rep.results = to_json(est);
  rep.criteria.push_back({"partial_sums_nondecreasing", 0.0, 0.0, true});
  for (std::size_t i = 1; i < est.partial_sums.size(); ++i)
    if (est.partial_sums[i] + 1e-12 < est.partial_sums[i - 1]) rep.criteria.back().pass = false;
  return rep;
}

Report run_eisenstein(const CommonOpts& o) {
  const KleinianGroup G = resolve_group(o);
  const auto cusps = detect_cusps(G, o.detect_len);
  if (cusps.empty()) throw std::runtime_error("no full-rank cusp detected");
  const CuspDatum& cusp = cusps.front();
  const double s = resolve_s(o, G.n);
  const CoefficientModule::Kind kind = module_kind(o);

  const ConvergenceGate gate = convergence_gate(G, cusp, s);
  if (gate.decision != ConvergenceDecision::Converges)
    throw GateRefused("series gate refused: growth exponent " +
                      std::to_string(gate.estimate.delta_hat) + " +- " +
                      std::to_string(gate.estimate.band) + " at s/2 = " +
                      std::to_string(0.5 * s));

  const CoefficientModule mod = kind == CoefficientModule::Kind::Adjoint
                                    ? adjoint_module(cusp.frame)
                                    : trivial_module(G.n);
  ExtendedForm form = kind == CoefficientModule::Kind::Adjoint
                          ? extend(phi(cusp.frame, mod,
                                       Vector::Unit(mod.dim, mod.weights->block_offset(-2))),
                                   s)
                          : extend(phi_trivial(cusp.frame), s);

  const Matrix g = Matrix::Identity(G.n + 2, G.n + 2);
  const TruncatedSeries series = eisenstein(form, G, cusp, g, truncation_of(o));

  Report rep;
  rep.command = "eisenstein";
  rep.config = config_echo(o, G.n);
  rep.results = to_json(series);
  rep.results["gate"] = to_json(gate.estimate);

  rep.criteria.push_back({"tail_decreasing", series.tail_decreasing ? 1.0 : 0.0, 1.0,
                          series.tail_decreasing});
  // Invariance under a group generator up to twice the tail.
  {
    CosetEnumerator ce(G, cusp, 1e-7, truncation_of(o).max_elements);
    ce.extend_to(series.max_word_length);
    const FormValue at_g = eisenstein_value(form, ce.cosets(), g);
    const FormValue at_gamma = eisenstein_value(form, ce.cosets(), G.generators[0] * g);
    const double diff = (at_gamma - at_g).norm();
    const double tol = 2.0 * series.tail_estimate + 1e-9;
    rep.criteria.push_back({"group_invariance", diff, tol, diff <= tol});
  }
  // Finite-difference closedness at the closed degree.
  if (std::abs(s - closed_degree(G.n, kind)) < 1e-12) {
    CosetEnumerator ce(G, cusp, 1e-7, truncation_of(o).max_elements);
    ce.extend_to(series.max_word_length);
    const Vector fd = fd_differential(
        [&](const Matrix& x) { return eisenstein_value(form, ce.cosets(), x); },
        cusp.frame, mod, g, 1e-4);
    const double tol = series.tail_estimate + 1e-6;
    rep.criteria.push_back({"series_closed_fd", fd.norm(), tol, fd.norm() <= tol});
  }
  return rep;
}

Report run_intertwine(const CommonOpts& o, int from, int to) {
  const KleinianGroup G = resolve_group(o);
  const auto cusps = detect_cusps(G, o.detect_len);
  if (from < 0 || to < 0 || from >= static_cast<int>(cusps.size()) ||
      to >= static_cast<int>(cusps.size()))
    throw CLI::ValidationError("cusp index out of range");
  const double s = resolve_s(o, G.n);
  const CoefficientModule::Kind kind = module_kind(o);

  const CuspDatum& src = cusps[static_cast<std::size_t>(from)];
  const CuspDatum& dst = cusps[static_cast<std::size_t>(to)];
  Vector v;
  if (kind == CoefficientModule::Kind::Adjoint) {
    const CoefficientModule m = adjoint_module(src.frame);
    v = Vector::Unit(m.dim, m.weights->block_offset(-2));
  } else {
    v = Vector::Ones(1);
  }
  const IntertwiningResult result = intertwine(G, src, dst, kind, v, s, intertwine_options(o));
  const CoefficientModule m_dst = kind == CoefficientModule::Kind::Adjoint
                                      ? adjoint_module(dst.frame)
                                      : trivial_module(G.n);
  const CeComplex cx = build_complex(dst.frame, m_dst);
  const RestrictedClass cls = restricted_class(result, cx);

  Report rep;
  rep.command = "intertwine";
  rep.config = config_echo(o, G.n);
  rep.config["from"] = from;
  rep.config["to"] = to;
  rep.results["intertwining"] = to_json(result);
  rep.results["restricted_class"] = to_json(cls);

  rep.criteria.push_back({"fit_residual", result.fit_residual, 0.05,
                          result.fit_residual <= 0.05});
  const double expected_delta = (from == to) ? 1.0 : 0.0;
  const double derr = std::abs(result.delta_coefficient - expected_delta);
  rep.criteria.push_back({"delta_coefficient", result.delta_coefficient,
                          expected_delta, derr <= 0.02});
  if (kind == CoefficientModule::Kind::Adjoint) {
    rep.criteria.push_back({"cterm_lowest_weight_fraction", cls.minus2_fraction, 0.02,
                            cls.minus2_fraction <= 0.02});
  } else {
    rep.criteria.push_back({"cterm_c1_fraction", cls.trivial_c1_fraction, 0.02,
                            cls.trivial_c1_fraction <= 0.02});
  }
  return rep;
}

Report run_cusp_report(const CommonOpts& o) {
  const KleinianGroup G = resolve_group(o);
  const auto all = detect_cusps(G, o.detect_len);
  std::vector<CuspDatum> cusps;
  for (const CuspDatum& c : all)
    if (c.full_rank && c.is_toric) cusps.push_back(c);
  if (cusps.empty()) throw std::runtime_error("no full-rank toric cusp detected");

  const RestrictionReport report =
      independence_report(G, cusps, module_kind(o), intertwine_options(o));

  Report rep;
  rep.command = "cusp-report";
  rep.config = config_echo(o, G.n);
  rep.results = to_json(report);

  const int size = report.classes_per_cusp * report.cusp_count;
  const Matrix& M = report.restriction_matrix;
  auto spectral_norm = [](const Matrix& A) {
    Eigen::JacobiSVD<Matrix> svd(A);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  };
  double diag_err = 0.0, off_norm = 0.0;
  for (int bi = 0; bi < report.cusp_count; ++bi)
    for (int bj = 0; bj < report.cusp_count; ++bj) {
      const Matrix blockM = M.block(bi * report.classes_per_cusp, bj * report.classes_per_cusp,
                                    report.classes_per_cusp, report.classes_per_cusp);
      if (bi == bj)
        diag_err = std::max(diag_err,
                            spectral_norm(blockM - Matrix::Identity(report.classes_per_cusp,
                                                                    report.classes_per_cusp)));
      else
        off_norm = std::max(off_norm, spectral_norm(blockM));
    }
  rep.criteria.push_back({"diagonal_blocks_identity", diag_err, 0.05, diag_err <= 0.05});
  rep.criteria.push_back({"offdiagonal_blocks_zero", off_norm, 0.02, off_norm <= 0.02});
  rep.criteria.push_back({"rank", static_cast<double>(report.rank),
                          static_cast<double>(size), report.rank == size});
  rep.criteria.push_back({"not_partial", report.partial ? 1.0 : 0.0, 0.0, !report.partial});
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical verification suite for cusp cohomology of Kleinian groups"};
  app.require_subcommand(1);

  CommonOpts o;
  int n_opt = 2;
  int from = 0, to = 0;

  CLI::App* c_coh = app.add_subcommand("cohomology", "cochain complex dimensions");
  c_coh->add_option("--n", n_opt, "boundary rank (1, 2 or 3)");
  add_common(c_coh, o, false);

  CLI::App* c_closed = app.add_subcommand("closedness", "differential coefficient sweep");
  c_closed->add_option("--n", n_opt, "boundary rank (1, 2 or 3)");
  add_common(c_closed, o, false);

  CLI::App* c_poi = app.add_subcommand("poincare", "orbital series and growth exponent");
  add_common(c_poi, o, true);

  CLI::App* c_eis = app.add_subcommand("eisenstein", "truncated series at a cusp");
  add_common(c_eis, o, true);

  CLI::App* c_int = app.add_subcommand("intertwine", "constant term between two cusps");
  c_int->add_option("--from", from, "source cusp index");
  c_int->add_option("--to", to, "target cusp index");
  add_common(c_int, o, true);

  CLI::App* c_rep = app.add_subcommand("cusp-report", "restriction matrix over all cusps");
  add_common(c_rep, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 4;
  }

  set_thread_count(o.threads);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Report rep;
    if (c_coh->parsed())
      rep = run_cohomology(o, n_opt);
    else if (c_closed->parsed())
      rep = run_closedness(o, n_opt);
    else if (c_poi->parsed())
      rep = run_poincare(o);
    else if (c_eis->parsed())
      rep = run_eisenstein(o);
    else if (c_int->parsed())
      rep = run_intertwine(o, from, to);
    else
      rep = run_cusp_report(o);

    emit(rep, o);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::cerr << "[cusplab] " << rep.command << " finished in " << ms << " ms\n";
    return rep.all_pass() ? 0 : 2;
  } catch (const GateRefused& e) {
    std::cerr << "[cusplab] gate refused: " << e.what() << "\n";
    return 3;
  } catch (const CLI::Error& e) {
    std::cerr << "[cusplab] config error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "[cusplab] config error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "[cusplab] numeric failure: " << e.what() << "\n";
    return 2;
  }
}
