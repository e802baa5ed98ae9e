#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cusplab/orbits.hpp"
#include "support.hpp"

using namespace cusplab;

TEST_CASE("group membership and polar reprojection") {
  auto gen = testing::rng(3);
  for (int n : {1, 2, 3}) {
    const Matrix g = testing::random_group_element(n, gen);
    CHECK(group_residual(g) <= 1e-11);
    CHECK(in_group(g));

    // perturb and reproject once
    Matrix noisy = g;
    noisy(0, 0) += 3e-8;
    const Matrix fixed = normalize_group_element(noisy);
    CHECK(group_residual(fixed) <= 1e-10);

    // far off the group: rejected
    Matrix bad = g;
    bad(0, 0) += 0.5;
    CHECK_THROWS_AS(normalize_group_element(bad), std::invalid_argument);
  }
}

TEST_CASE("hyperbolic distance basics") {
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    const Vector O = base_point(n);
    CHECK(hyperbolic_distance(O, O) == doctest::Approx(0.0));

    // dilation by r moves the base point 2r along the axis
    for (double r : {0.25, 1.0, -0.7})
      CHECK(hyperbolic_distance(O, f.exp_dilation(r) * O) ==
            doctest::Approx(2.0 * std::abs(r)).epsilon(1e-12));

    // unit horospherical translation: arccosh(3/2), the half-space formula
    const Vector p = f.exp_translation(Vector::Unit(n, 0)) * O;
    CHECK(hyperbolic_distance(O, p) == doctest::Approx(std::acosh(1.5)).epsilon(1e-12));

    // symmetry
    auto gen = testing::rng(41);
    const Vector q = testing::random_group_element(n, gen) * O;
    CHECK(hyperbolic_distance(p, q) == doctest::Approx(hyperbolic_distance(q, p)));
  }
  // invalid input: a lower-sheet point
  Vector bad1 = base_point(1), bad2 = base_point(1);
  bad2(2) = -1.0;
  CHECK_THROWS_AS(hyperbolic_distance(bad1, bad2), std::invalid_argument);
}

TEST_CASE("upper half space chart") {
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    const Vector O = base_point(n);
    const Vector cO = chart_to_upper_half_space(O, f);
    CHECK(cO(0) == doctest::Approx(1.0));
    CHECK(cO.tail(n).norm() == doctest::Approx(0.0));

    const Vector ca = chart_to_upper_half_space(f.exp_dilation(0.4) * O, f);
    CHECK(ca(0) == doctest::Approx(std::exp(0.8)).epsilon(1e-12));
    CHECK(ca.tail(n).norm() <= 1e-12);

    const Vector cu = chart_to_upper_half_space(f.exp_translation(Vector::Unit(n, 0)) * O, f);
    CHECK(cu(0) == doctest::Approx(1.0));
    CHECK(cu(1) == doctest::Approx(1.0));
    if (n > 1) CHECK(cu.tail(n - 1).norm() <= 1e-12);
  }
}

TEST_CASE("frame invariants: unit translations and the reflection") {
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    const Vector O = base_point(n);
    // exp(u_i) moves O by unit euclidean length on the horosphere:
    // hyperbolic distance 2 asinh(1/2)
    for (int i = 0; i < n; ++i) {
      const double d = hyperbolic_distance(O, f.exp_translation(Vector::Unit(n, i)) * O);
      CHECK(d == doctest::Approx(2.0 * std::asinh(0.5)).epsilon(1e-9));
    }
    // reflection: in K, squares to the identity, sends the cusp to its antipode
    CHECK((f.weyl * O - O).norm() <= 1e-12);
    CHECK((f.weyl * f.weyl - Matrix::Identity(n + 2, n + 2)).cwiseAbs().maxCoeff() == 0.0);
    const BoundaryPoint anti = boundary_point(f.weyl * f.xi.xi);
    CHECK((anti.xi.head(n + 1) + f.xi.xi.head(n + 1)).norm() <= 1e-12);
    CHECK(in_group(f.weyl));
  }
}

TEST_CASE("iwasawa factorization on closed-form cases") {
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    const Matrix I = Matrix::Identity(n + 2, n + 2);

    const IwasawaFactors Fi = iwasawa(I, f);
    CHECK(Fi.t == doctest::Approx(1.0));
    CHECK((Fi.n_part - I).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((Fi.a_part - I).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((Fi.k_part - I).cwiseAbs().maxCoeff() <= 1e-12);

    const double r = 0.63;
    const IwasawaFactors Fa = iwasawa(f.exp_dilation(r), f);
    CHECK(Fa.t == doctest::Approx(std::exp(r)).epsilon(1e-12));
    CHECK(Fa.translation.norm() <= 1e-12);
    CHECK((Fa.k_part - I).cwiseAbs().maxCoeff() <= 1e-10);

    // conjugation by the reflection inverts the dilation
    const Matrix waw = f.weyl * f.exp_dilation(r) * f.weyl;
    const IwasawaFactors Fw = iwasawa(waw, f);
    CHECK(Fw.t == doctest::Approx(std::exp(-r)).epsilon(1e-11));
    CHECK((Fw.a_part - f.exp_dilation(-r)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("iwasawa reconstruction on random words") {
  auto gen = testing::rng(17);
  const KleinianGroup hecke = preset_group("hecke-3");
  const auto words = enumerate_words(hecke, 6);
  const ParabolicFrame f = standard_frame(1);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  const Vector O = base_point(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix& g = words[pick(gen)];
    const IwasawaFactors F = iwasawa(g, f);
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    CHECK((F.n_part * F.a_part * F.k_part - g).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    // |log t| = half the distance the a-part moves the base point
    CHECK(std::abs(std::abs(std::log(F.t)) -
                   0.5 * hyperbolic_distance(O, F.a_part * O)) <= 1e-10);
  }
}

TEST_CASE("dilation multiplies the iwasawa character") {
  auto gen = testing::rng(19);
  for (int n : {1, 2}) {
    const ParabolicFrame f = standard_frame(n);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix g = testing::random_group_element(n, gen);
      const double r = dist(gen);
      const Matrix a = f.exp_dilation(r);
      const double t_g = iwasawa(g, f).t;
      const double t_ag = iwasawa(a * g, f).t;
      CHECK(t_ag == doctest::Approx(std::exp(r) * t_g).epsilon(1e-10));
    }
  }
}

TEST_CASE("character on the dilation subgroup") {
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    CHECK(character(Matrix(Matrix::Identity(n + 2, n + 2)), f) == doctest::Approx(1.0));
    CHECK(character(f.exp_dilation(0.8), f) == doctest::Approx(std::exp(0.8)).epsilon(1e-12));
    const double t1 = character(f.exp_dilation(0.3), f);
    const double t2 = character(f.exp_dilation(0.45), f);
    CHECK(character(Matrix(f.exp_dilation(0.3) * f.exp_dilation(0.45)), f) ==
          doctest::Approx(t1 * t2).epsilon(1e-12));
    CHECK_THROWS_AS(character(f.exp_translation(Vector::Unit(n, 0)), f),
                    std::invalid_argument);
  }
}

TEST_CASE("boundary points and rotations between cusps") {
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    CHECK(std::abs(minkowski_pairing(f.xi.xi, f.xi.xi)) <= 1e-12);
    CHECK(f.xi.xi(n + 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(boundary_point(base_point(n)), std::invalid_argument);

    Vector dir = Vector::Zero(n + 2);
    dir(0) = 1.0;
    dir(n + 1) = 1.0;
    const BoundaryPoint target = boundary_point(dir);
    const Matrix k = rotation_to(f, target);
    CHECK(in_group(k));
    CHECK((k * base_point(n) - base_point(n)).norm() <= 1e-12);
    CHECK(boundary_distance(boundary_point(k * f.xi.xi), target) <= 1e-12);

    // the rotation conjugates horospherical translations into the target frame
    const ParabolicFrame f2 = frame_at(target, n);
    for (int i = 0; i < n; ++i) {
      const Matrix moved = k * f.exp_translation(Vector::Unit(n, i)) * k.transpose();
      const IwasawaFactors F = iwasawa(moved, f2);
      CHECK(std::abs(F.t - 1.0) <= 1e-9);
      CHECK((F.k_part - Matrix::Identity(n + 2, n + 2)).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("bruhat classification at one cusp") {
  for (int n : {1, 2}) {
    const ParabolicFrame f = standard_frame(n);

    const BruhatFactors small =
        bruhat_classify(f.exp_translation(Vector::Unit(n, 0)), f, f);
    CHECK(small.cell == BruhatCell::Small);

    // the reflection lands in the big cell with trivial unipotent part
    const BruhatFactors big = bruhat_classify(f.weyl, f, f);
    CHECK(big.cell == BruhatCell::Big);
    CHECK((big.n_part - Matrix::Identity(n + 2, n + 2)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((big.k_rot - Matrix::Identity(n + 2, n + 2)).cwiseAbs().maxCoeff() <= 1e-12);
    const Matrix recon = big.n_part * big.k_rot * big.weyl * big.p_part;
    CHECK((recon - f.weyl).cwiseAbs().maxCoeff() <= 1e-9);

    // a loxodromic with fixed points away from the cusp
    auto gen = testing::rng(53);
    const Matrix h = testing::random_group_element(n, gen, 0.4);
    const Matrix lox =
        h * f.exp_dilation(0.9) * (lorentz_form(n) * h.transpose() * lorentz_form(n));
    const BoundaryPoint image = boundary_point(lox * f.xi.xi, 1e-6);
    if (boundary_distance(image, f.xi) > 1e-6) {
      const BruhatFactors bf = bruhat_classify(lox, f, f);
      CHECK(bf.cell == BruhatCell::Big);
      const Matrix r2 = bf.n_part * bf.k_rot * bf.weyl * bf.p_part;
      CHECK((r2 - lox).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("bruhat classification between distinct cusps") {
  const int n = 2;
  const ParabolicFrame f = standard_frame(n);
  Vector dir = Vector::Zero(n + 2);
  dir(0) = 1.0;
  dir(n + 1) = 1.0;
  const ParabolicFrame f2 = frame_at(boundary_point(dir), n);

  const Matrix k = rotation_to(f, f2.xi);
  CHECK(bruhat_classify(k, f, f2).cell == BruhatCell::Small);

  const Matrix I = Matrix::Identity(n + 2, n + 2);
  const BruhatFactors bf = bruhat_classify(I, f, f2);
  CHECK(bf.cell == BruhatCell::Big);
  CHECK((bf.n_part * bf.k_rot * bf.weyl * bf.p_part - I).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(boundary_distance(boundary_point(bf.p_part * f.xi.xi), f.xi) <= 1e-7);

  // exhaustive and exclusive over a word sample: exactly one cell each
  const KleinianGroup G = preset_group("two-cusps-h3");
  const ParabolicFrame fh = standard_frame(2);
  for (const Matrix& g : enumerate_words(G, 3)) {
    const BruhatFactors c1 = bruhat_classify(g, fh, fh);
    const bool is_small = c1.cell == BruhatCell::Small;
    const bool is_big = c1.cell == BruhatCell::Big;
    CHECK(is_small != is_big);
  }
}

TEST_CASE("ambiguous boundary comparisons raise") {
  const int n = 1;
  const ParabolicFrame f = standard_frame(n);
  // nudge the cusp direction slightly: image lands inside the ambiguity band
  const Matrix g = exp_nilpotent(Matrix(1e-8 * f.theta_u[0]));
  CHECK_THROWS_AS(bruhat_classify(g, f, f), IndeterminateBoundary);
}

TEST_CASE("isometry classification") {
  const int n = 2;
  const ParabolicFrame f = standard_frame(n);
  const Matrix I = Matrix::Identity(n + 2, n + 2);

  CHECK(classify_isometry(I).type == IsometryType::Identity);

  const IsometryClass par = classify_isometry(f.exp_translation(Vector::Unit(n, 0)));
  CHECK(par.type == IsometryType::Parabolic);
  CHECK(boundary_distance(par.fixed_points.at(0), f.xi) <= 1e-6);

  const IsometryClass lox = classify_isometry(f.exp_dilation(0.7));
  CHECK(lox.type == IsometryType::Loxodromic);
  CHECK(lox.fixed_points.size() == 2);

  Matrix rot = I;
  rot(0, 0) = std::cos(0.5);
  rot(0, 1) = -std::sin(0.5);
  rot(1, 0) = std::sin(0.5);
  rot(1, 1) = std::cos(0.5);
  CHECK(classify_isometry(rot).type == IsometryType::Elliptic);

  // screw parabolic in H^4: translation composed with a rotation of the
  // orthogonal horospherical directions
  const ParabolicFrame f3 = standard_frame(3);
  Matrix block = Matrix::Identity(3, 3);
  block(1, 1) = std::cos(1.0);
  block(1, 2) = -std::sin(1.0);
  block(2, 1) = std::sin(1.0);
  block(2, 2) = std::cos(1.0);
  const Matrix screw =
      f3.exp_translation(Vector::Unit(3, 0)) * f3.rotation_in_k_xi(block);
  CHECK(classify_isometry(screw).type == IsometryType::Parabolic);
}
