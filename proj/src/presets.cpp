#include <cstdlib>

#include "cusplab/orbits.hpp"

namespace cusplab {

namespace {

KleinianGroup cyclic_parabolic_h2() {
  ParabolicFrame f = standard_frame(1);
  return make_group(1, {f.exp_translation(Vector::Ones(1))}, {"p"});
}

// <z -> z + lambda, z -> -1/z>. The inversion has order two, so the torsion
// scan is disabled for these groups.
KleinianGroup hecke_like(double lambda) {
  ParabolicFrame f = standard_frame(1);
  Vector step(1);
  step(0) = lambda;
  const Matrix t = f.exp_translation(step);
  Matrix s = Matrix::Identity(3, 3);
  s(0, 0) = -1.0;
  s(1, 1) = -1.0;
  return make_group(1, {t, s}, {"t", "s"}, /*torsion_check=*/false);
}

KleinianGroup rank2_parabolic_h3() {
  ParabolicFrame f = standard_frame(2);
  const Matrix p1 = f.exp_translation(Vector::Unit(2, 0));
  const Matrix p2 = f.exp_translation(Vector::Unit(2, 1));
  return make_group(2, {p1, p2}, {"p1", "p2"});
}

// Free product of the lattice 4Z^2 at infinity with its conjugate under the
// sphere inversion: horoball at infinity tangent to the inverted horoballs
// sitting on the lattice, a ping-pong configuration with two non-conjugate
// full-rank cusps (at infinity and at the origin).
KleinianGroup two_cusps_h3() {
  const double lambda = 4.0;
  ParabolicFrame f = standard_frame(2);
  const Matrix p1 = f.exp_translation(lambda * Vector::Unit(2, 0));
  const Matrix p2 = f.exp_translation(lambda * Vector::Unit(2, 1));
  const Matrix w = f.weyl;
  const Matrix q1 = w * p1 * w;
  const Matrix q2 = w * p2 * w;
  return make_group(2, {p1, p2, q1, q2}, {"p1", "p2", "q1", "q2"});
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"z-parabolic", "hecke-2.5", "hecke-3", "z2-parabolic", "two-cusps-h3"};
}

KleinianGroup preset_group(const std::string& name) {
  if (name == "z-parabolic") return cyclic_parabolic_h2();
  if (name == "hecke-2.5") return hecke_like(2.5);
  if (name == "hecke-3") return hecke_like(3.0);
  if (name == "z2-parabolic") return rank2_parabolic_h3();
  if (name == "two-cusps-h3") return two_cusps_h3();
  if (const char* dir = std::getenv("CUSPLAB_PRESET_DIR"))
    return load_group(std::string(dir) + "/" + name + ".json");
  throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace cusplab
