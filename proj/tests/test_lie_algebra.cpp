#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cusplab/coefficient_module.hpp"
#include "support.hpp"

using namespace cusplab;

TEST_CASE("basis matrices lie in the algebra exactly") {
  for (int n : {1, 2, 3}) {
    const AdaptedBasis B = adapted_basis(n);
    CHECK(B.dim() == (n + 2) * (n + 1) / 2);
    for (const Matrix& X : B.all) CHECK(algebra_residual(X) == 0.0);
  }
}

TEST_CASE("bracket relations of the adapted basis") {
  for (int n : {1, 2, 3}) {
    const AdaptedBasis B = adapted_basis(n);
    // [X, X] = 0 exactly
    CHECK(bracket(B.T, B.T).cwiseAbs().maxCoeff() == 0.0);
    // [T, u_i] = 2 u_i
    for (int i = 0; i < n; ++i)
      CHECK((bracket(B.T, B.u[i]) - 2.0 * B.u[i]).cwiseAbs().maxCoeff() == 0.0);
    // horospherical generators commute
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(bracket(B.u[i], B.u[j]).cwiseAbs().maxCoeff() == 0.0);
    // [T, theta(u_i)] = -2 theta(u_i)
    for (int i = 0; i < n; ++i)
      CHECK((bracket(B.T, B.theta_u[i]) + 2.0 * B.theta_u[i]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("bracket rejects mismatched dimensions") {
  const AdaptedBasis B1 = adapted_basis(1);
  const AdaptedBasis B2 = adapted_basis(2);
  CHECK_THROWS_AS(bracket(B1.T, B2.T), std::invalid_argument);
}

TEST_CASE("jacobi identity on random triples") {
  auto gen = testing::rng();
  for (int n : {1, 2, 3}) {
    const AdaptedBasis B = adapted_basis(n);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix X = testing::random_algebra_element(B, gen);
      const Matrix Y = testing::random_algebra_element(B, gen);
      const Matrix Z = testing::random_algebra_element(B, gen);
      const Matrix J = bracket(bracket(X, Y), Z) + bracket(bracket(Y, Z), X) +
                       bracket(bracket(Z, X), Y);
      CHECK(J.cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("adjoint action respects the bracket") {
  auto gen = testing::rng(7);
  for (int n : {1, 2}) {
    const AdaptedBasis B = adapted_basis(n);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix g = testing::random_group_element(n, gen);
      const Matrix gi = lorentz_form(n) * g.transpose() * lorentz_form(n);
      const Matrix X = testing::random_algebra_element(B, gen);
      const Matrix Y = testing::random_algebra_element(B, gen);
      const Matrix lhs = g * bracket(X, Y) * gi;
      const Matrix rhs = bracket(Matrix(g * X * gi), Matrix(g * Y * gi));
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, rhs.norm()));
    }
  }
}

TEST_CASE("cartan involution fixes the compact algebra and flips T") {
  for (int n : {1, 2, 3}) {
    const AdaptedBasis B = adapted_basis(n);
    for (const Matrix& R : B.so_n)
      CHECK((cartan_involution(R) - R).cwiseAbs().maxCoeff() == 0.0);
    // oracle: direct transpose of the adapted matrix
    CHECK((cartan_involution(B.T) + B.T.transpose().transpose()).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((cartan_involution(B.T) + B.T).cwiseAbs().maxCoeff() == 0.0);
    // involution squares to the identity
    for (const Matrix& X : B.all)
      CHECK((cartan_involution(cartan_involution(X)) - X).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("exact coordinates invert the basis expansion") {
  auto gen = testing::rng(11);
  for (int n : {1, 2, 3}) {
    const AdaptedBasis B = adapted_basis(n);
    for (int trial = 0; trial < 5; ++trial) {
      Vector c(B.dim());
      std::uniform_int_distribution<int> dist(-3, 3);
      for (int i = 0; i < B.dim(); ++i) c(i) = dist(gen);
      const Matrix X = B.from_coordinates(c);
      CHECK((B.coordinates(X) - c).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("weight decomposition dimensions and scaling") {
  // oracle: numeric eigensolve of Ad(exp T) happens inside the builder; here
  // the dimensions per rank and the scaling law are checked directly.
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    const WeightDecomposition W = build_weight_decomposition(f);
    CHECK(static_cast<int>(W.basis_minus2.size()) == n);
    CHECK(static_cast<int>(W.basis_zero.size()) == n * (n - 1) / 2 + 1);
    CHECK(static_cast<int>(W.basis_plus2.size()) == n);
    CHECK(W.dim() == (n + 2) * (n + 1) / 2);

    const double r = 0.37;
    const Matrix a = f.exp_dilation(r);
    const Matrix ai = f.exp_dilation(-r);
    auto scale_check = [&](const Matrix& v, double expected) {
      const Matrix moved = a * v * ai;
      CHECK((moved - expected * v).cwiseAbs().maxCoeff() <= 1e-10 * std::exp(2.0 * r));
    };
    for (const Matrix& v : W.basis_plus2) scale_check(v, std::exp(2.0 * r));
    for (const Matrix& v : W.basis_zero) scale_check(v, 1.0);
    for (const Matrix& v : W.basis_minus2) scale_check(v, std::exp(-2.0 * r));
  }
}

TEST_CASE("weight projection splits and reconstructs") {
  auto gen = testing::rng(23);
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    const CoefficientModule mod = adjoint_module(f);
    const WeightDecomposition& W = *mod.weights;

    // u_1 lies in the +2 block
    const Vector u1 = W.coordinates(f.u[0]);
    CHECK((mod.weight_project(u1, 2) - u1).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(mod.weight_project(u1, -2).cwiseAbs().maxCoeff() <= 1e-12);

    // theta(u_1) + u_1 splits into the -2 and +2 components
    const Vector mixed = W.coordinates(f.theta_u[0] + f.u[0]);
    const Vector lower = mod.weight_project(mixed, -2);
    CHECK((W.from_coordinates(lower) - f.theta_u[0]).cwiseAbs().maxCoeff() <= 1e-12);

    // oracle: diagonalize Ad(exp rT) numerically and project onto the
    // e^{-2r} eigenspace
    const double r = 1.0;
    const int d = mod.dim;
    Matrix ad(d, d);
    const Matrix a = f.exp_dilation(r);
    const Matrix ai = f.exp_dilation(-r);
    for (int j = 0; j < d; ++j) {
      const Matrix Bj = W.from_coordinates(Vector::Unit(d, j));
      ad.col(j) = W.coordinates(a * Bj * ai);
    }
    Eigen::EigenSolver<Matrix> es(ad);
    Matrix low_basis = Matrix::Zero(d, 0);
    for (int i = 0; i < d; ++i) {
      if (std::abs(es.eigenvalues()(i).real() - std::exp(-2.0)) < 1e-8 &&
          std::abs(es.eigenvalues()(i).imag()) < 1e-10) {
        low_basis.conservativeResize(d, low_basis.cols() + 1);
        low_basis.col(low_basis.cols() - 1) = es.eigenvectors().col(i).real();
      }
    }
    // least-squares projection of `mixed` onto the eigenspace agrees
    const Vector proj =
        low_basis * (low_basis.transpose() * low_basis).ldlt().solve(low_basis.transpose() * mixed);
    CHECK((proj - lower).cwiseAbs().maxCoeff() <= 1e-9);

    // full reconstruction
    for (int trial = 0; trial < 5; ++trial) {
      Vector v(d);
      std::uniform_real_distribution<double> dist(-1, 1);
      for (int i = 0; i < d; ++i) v(i) = dist(gen);
      const Vector sum = mod.weight_project(v, -2) + mod.weight_project(v, 0) +
                         mod.weight_project(v, 2);
      CHECK((sum - v).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("weight projection rejects the trivial module") {
  const CoefficientModule mod = trivial_module(2);
  CHECK_THROWS_AS(mod.weight_project(Vector::Ones(1), 2), std::logic_error);
}

TEST_CASE("cartan involution swaps the extreme weight blocks") {
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    const CoefficientModule mod = adjoint_module(f);
    for (int i = 0; i < n; ++i) {
      const Vector c = mod.weights->coordinates(cartan_involution(f.u[i]));
      const Vector upper_part = mod.weight_project(c, 2) + mod.weight_project(c, 0);
      CHECK(upper_part.cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("bracketing against the top block fills the upper half") {
  // span{[v, u] : v in basis, u horospherical} has dimension
  // dim V_0 + dim V_2 and no component in the lowest block.
  for (int n : {1, 2, 3}) {
    const ParabolicFrame f = standard_frame(n);
    const CoefficientModule mod = adjoint_module(f);
    const int d = mod.dim;
    std::vector<Vector> span;
    for (int j = 0; j < d; ++j) {
      const Matrix V = mod.weights->from_coordinates(Vector::Unit(d, j));
      for (int i = 0; i < n; ++i) {
        const Vector c = mod.weights->coordinates(bracket(V, f.u[i]));
        CHECK(mod.weight_project(c, -2).cwiseAbs().maxCoeff() <= 1e-10);
        span.push_back(c);
      }
    }
    Matrix S(d, static_cast<int>(span.size()));
    for (std::size_t j = 0; j < span.size(); ++j) S.col(static_cast<int>(j)) = span[j];
    Eigen::ColPivHouseholderQR<Matrix> qr(S);
    qr.setThreshold(1e-10);
    const int expected = n * (n - 1) / 2 + 1 + n;  // dim V_0 + dim V_2
    CHECK(qr.rank() == expected);
  }
}

TEST_CASE("coefficient module actions") {
  auto gen = testing::rng(31);
  const ParabolicFrame f = standard_frame(2);
  const CoefficientModule adj = adjoint_module(f);
  const CoefficientModule triv = trivial_module(2);

  const Matrix g = testing::random_group_element(2, gen);
  Vector v(adj.dim);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int i = 0; i < adj.dim; ++i) v(i) = dist(gen);

  // trivial: identity action, zero derivative
  CHECK((triv.act(g, Vector::Ones(1)) - Vector::Ones(1)).norm() == 0.0);
  CHECK(triv.act_derivative(f.T, Vector::Ones(1)).norm() == 0.0);

  // adjoint: conjugation, and the derivative matches the bracket
  const Matrix V = adj.weights->from_coordinates(v);
  const Matrix J = lorentz_form(2);
  const Matrix expected = g * V * (J * g.transpose() * J);
  CHECK((adj.weights->from_coordinates(adj.act(g, v)) - expected).cwiseAbs().maxCoeff() <=
        1e-9 * std::max(1.0, expected.norm()));

  const Matrix X = testing::random_algebra_element(adapted_basis(2), gen, 0.3);
  const Vector dv = adj.act_derivative(X, v);
  // finite difference of Ad(exp(tX)) v at t = 0
  const double h = 1e-6;
  const Matrix gp = exp_algebra(Matrix(h * X));
  const Matrix gm = exp_algebra(Matrix(-h * X));
  const Vector fd = (adj.act(gp, v) - adj.act(gm, v)) / (2.0 * h);
  CHECK((dv - fd).cwiseAbs().maxCoeff() <= 1e-6);
}
