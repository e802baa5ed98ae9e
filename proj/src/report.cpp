#include "cusplab/report.hpp"

#include <sstream>

namespace cusplab {

bool Report::all_pass() const {
  for (const Criterion& c : criteria)
    if (!c.pass) return false;
  return true;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

nlohmann::ordered_json to_json(const Report& rep) {
  nlohmann::ordered_json j;
  j["command"] = rep.command;
  j["version"] = kVersion;
  j["config"] = rep.config;
  j["config_hash"] = fnv1a_hex(rep.config.dump());
  j["results"] = rep.results;
  j["criteria"] = nlohmann::ordered_json::array();
  for (const Criterion& c : rep.criteria) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["value"] = c.value;
    cj["tolerance"] = c.tolerance;
    cj["pass"] = c.pass;
    j["criteria"].push_back(cj);
  }
  j["all_pass"] = rep.all_pass();
  return j;
}

std::string to_csv(const Report& rep) {
  std::ostringstream os;
  os << "criterion,value,tolerance,pass\n";
  for (const Criterion& c : rep.criteria)
    os << c.name << "," << c.value << "," << c.tolerance << ","
       << (c.pass ? "true" : "false") << "\n";
  return os.str();
}

std::string to_text(const Report& rep) {
  std::ostringstream os;
  os << "# " << rep.command << " (version " << kVersion << ", config "
     << fnv1a_hex(rep.config.dump()) << ")\n";
  os << rep.results.dump(2) << "\n";
  for (const Criterion& c : rep.criteria)
    os << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": " << c.value
       << " (tolerance " << c.tolerance << ")\n";
  return os.str();
}

namespace {

nlohmann::ordered_json vector_to_json(const Vector& v) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

nlohmann::ordered_json matrix_to_json(const Matrix& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  j["data_row_major"] = arr;
  return j;
}

}  // namespace

nlohmann::ordered_json form_value_to_json(const FormValue& v) {
  nlohmann::ordered_json j;
  j["basis"] = "flat layout [pure | dt_0 .. dt_{n-1}], module coordinates per block";
  j["pure"] = vector_to_json(v.pure);
  nlohmann::ordered_json dt = nlohmann::ordered_json::array();
  for (const Vector& block : v.dt) dt.push_back(vector_to_json(block));
  j["dt"] = dt;
  return j;
}

nlohmann::ordered_json to_json(const IntertwiningResult& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["s"] = r.s;
  j["delta_coefficient"] = r.delta_coefficient;
  j["alpha"] = form_value_to_json(r.alpha);
  j["c_term"] = form_value_to_json(r.c_term);
  j["fit_residual"] = r.fit_residual;
  j["quadrature_tol"] = r.quadrature_tol;
  j["quad_m"] = r.quad_m;
  j["max_word_length"] = r.max_word_length;
  j["coset_count"] = r.coset_count;
  j["tail_estimate"] = r.tail_estimate;
  j["sample_r"] = r.sample_r;
  return j;
}

nlohmann::ordered_json to_json(const RestrictedClass& r) {
  nlohmann::ordered_json j;
  j["class_coords"] = vector_to_json(r.class_coords);
  j["coboundary_residual"] = r.coboundary_residual;
  j["minus2_fraction"] = r.minus2_fraction;
  j["identity_residual_plus2"] = r.identity_residual_plus2;
  j["identity_residual_zero"] = r.identity_residual_zero;
  j["trivial_c1_fraction"] = r.trivial_c1_fraction;
  return j;
}

nlohmann::ordered_json to_json(const RestrictionReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["module"] = r.kind == CoefficientModule::Kind::Adjoint ? "adjoint" : "trivial";
  j["classes_per_cusp"] = r.classes_per_cusp;
  j["cusp_count"] = r.cusp_count;
  j["restriction_matrix"] = matrix_to_json(r.restriction_matrix);
  j["rank"] = r.rank;
  j["cusp_bound"] = r.cusp_bound;
  j["independent"] = r.independent;
  j["partial"] = r.partial;
  j["messages"] = r.messages;
  return j;
}

nlohmann::ordered_json to_json(const PoincareEstimate& e) {
  nlohmann::ordered_json j;
  j["s"] = e.s;
  j["shell_masses"] = e.shell_masses;
  j["partial_sums"] = e.partial_sums;
  j["delta_hat"] = e.delta_hat;
  j["band"] = e.band;
  j["convergent"] = e.convergent;
  j["orbit_points"] = e.distances.size();
  return j;
}

nlohmann::ordered_json to_json(const TruncatedSeries& s) {
  nlohmann::ordered_json j;
  j["value"] = form_value_to_json(s.value);
  j["s"] = s.s;
  j["max_word_length"] = s.max_word_length;
  j["t_threshold"] = s.t_threshold;
  j["coset_count"] = s.coset_count;
  j["inside_horoball_count"] = s.inside_horoball_count;
  j["tail_estimate"] = s.tail_estimate;
  j["tail_decreasing"] = s.tail_decreasing;
  j["shell_masses"] = s.shell_masses;
  j["refinement_deltas"] = s.refinement_deltas;
  return j;
}

nlohmann::ordered_json to_json(const CohomologyReport& r) {
  nlohmann::ordered_json j;
  j["degree"] = r.degree;
  j["dim_kernel"] = r.dim_kernel;
  j["dim_image"] = r.dim_image;
  j["dim_H"] = r.dim_H;
  nlohmann::ordered_json basis = nlohmann::ordered_json::array();
  for (const Vector& v : r.harmonic_basis) basis.push_back(vector_to_json(v));
  j["harmonic_basis"] = basis;
  j["weight_tags"] = r.weight_tags;
  return j;
}

}  // namespace cusplab
