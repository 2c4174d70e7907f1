#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rmiga/quadrature_mesh.hpp"

using namespace rmiga;

TEST(Mesh, UniformExamples) {
  const Mesh m5 = build_mesh(5);
  EXPECT_EQ(m5.element_count(), 25);
  EXPECT_DOUBLE_EQ(m5.h(), 0.2);
  const Mesh m1 = build_mesh(1);
  EXPECT_EQ(m1.element_count(), 1);
  EXPECT_DOUBLE_EQ(m1.h(), 1.0);
  const Mesh m40 = build_mesh(40);
  EXPECT_EQ(m40.element_count(), 1600);
  EXPECT_NEAR(m40.h(), 0.025, 1e-15);
}

TEST(Mesh, MeasuresAndValidation) {
  const Mesh m = build_mesh(5);
  double total = 0.0;
  for (int e = 0; e < m.element_count(); ++e) {
    EXPECT_GT(m.element_measure(e), 0.0);
    total += m.element_measure(e);
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_THROW(build_mesh(0), ConfigError);
  EXPECT_THROW(Mesh({{0.0, 0.5, 0.5, 1.0}}), ConfigError);
}

TEST(Mesh, LongestSideOnBoxes) {
  const int n[2] = {4, 2};
  const Interval box[2] = {{0.0, 2.0}, {0.0, 1.0}};
  const Mesh m = build_mesh(n, box);
  EXPECT_DOUBLE_EQ(m.element_size(0), 0.5);
  EXPECT_DOUBLE_EQ(m.element_measure(0), 0.25);
}

TEST(Mesh, MatchesSpaces) {
  EXPECT_TRUE(build_mesh(5).matches(make_scalar_space(5, 2, 1, Boundary::none)));
  EXPECT_TRUE(build_mesh(5).matches(make_vector_space(5, 1, -1)));
  EXPECT_FALSE(build_mesh(4).matches(make_scalar_space(5, 2, 1, Boundary::none)));
}

TEST(Quadrature, SquareWithTwoPoints) {
  const GaussRule r = gauss_legendre(2);
  double s = 0.0;
  for (std::size_t i = 0; i < r.points.size(); ++i) s += r.weights[i] * r.points[i] * r.points[i];
  EXPECT_NEAR(s, 1.0 / 3.0, 1e-15);
}

TEST(Quadrature, SineProduct) {
  const QuadratureRule rule(build_mesh(20), 3);
  double s = 0.0;
  for (int e = 0; e < rule.mesh().element_count(); ++e) {
    const auto w = rule.weights(e);
    const auto x = rule.points(e);
    for (int q = 0; q < w.size(); ++q)
      s += w[q] * std::sin(std::numbers::pi * x(q, 0)) * std::sin(std::numbers::pi * x(q, 1));
  }
  EXPECT_NEAR(s, 4.0 / (std::numbers::pi * std::numbers::pi), 1e-10);
}

TEST(Quadrature, WeightsSumToElementMeasure) {
  const QuadratureRule rule = make_quadrature(build_mesh(5), 4);
  for (int e = 0; e < 25; ++e) EXPECT_NEAR(rule.weights(e).sum(), 0.04, 1e-16);
  for (int e = 0; e < 25; ++e)
    for (double w : rule.weights(e)) EXPECT_GT(w, 0.0);
}

TEST(Quadrature, RejectsEmptyRule) { EXPECT_THROW(gauss_legendre(0), ConfigError); }

TEST(QuadratureProperties, ExactOnRandomPolynomials) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int n = 1; n <= 10; ++n) {
    const GaussRule r = gauss_legendre(n);
    const int degree = 2 * n - 1;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> c(static_cast<std::size_t>(degree) + 1);
      for (double& v : c) v = coef(rng);
      double exact = 0.0;
      for (int j = 0; j <= degree; ++j) exact += c[static_cast<std::size_t>(j)] / (j + 1);
      double approx = 0.0;
      for (std::size_t i = 0; i < r.points.size(); ++i) {
        double v = 0.0;
        for (int j = degree; j >= 0; --j) v = v * r.points[i] + c[static_cast<std::size_t>(j)];
        approx += r.weights[i] * v;
      }
      EXPECT_NEAR(approx, exact, 1e-14) << "n=" << n;
    }
  }
}

TEST(QuadratureProperties, TensorExactnessOnElements) {
  // x^a y^b over [0,1]^2 on a 3x3 mesh with a, b <= 2n-1
  const int n = 3;
  const QuadratureRule rule(build_mesh(3), n);
  for (int a = 0; a <= 2 * n - 1; ++a)
    for (int b = 0; b <= 2 * n - 1; ++b) {
      double s = 0.0;
      for (int e = 0; e < 9; ++e) {
        const auto w = rule.weights(e);
        const auto x = rule.points(e);
        for (int q = 0; q < w.size(); ++q) s += w[q] * std::pow(x(q, 0), a) * std::pow(x(q, 1), b);
      }
      EXPECT_NEAR(s, 1.0 / ((a + 1) * (b + 1)), 1e-14);
    }
}

TEST(EvalCacheProperties, AgreesWithDirectEvaluation) {
  std::mt19937 rng(5);
  for (int p = 0; p <= 4; ++p)
    for (int k : {-1, p - 1}) {
      if (k < -1) continue;
      const DiscreteSpace s = make_scalar_space(4, p, k, Boundary::none);
      const QuadratureRule rule(build_mesh(4), p + 1);
      const EvalCache cache(s, rule, 2);
      std::uniform_int_distribution<int> pick(0, 15);
      for (int trial = 0; trial < 6; ++trial) {
        const int e = pick(rng);
        const ElementTable t = cache.table(e);
        const auto x = rule.points(e);
        for (int q = 0; q < x.rows(); ++q) {
          const BasisEval bx = evaluate_basis(s.knots(0), x(q, 0), 2);
          const BasisEval by = evaluate_basis(s.knots(1), x(q, 1), 2);
          for (int b = 0; b <= p; ++b)
            for (int a = 0; a <= p; ++a) {
              const int l = a + (p + 1) * b;
              const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
              EXPECT_NEAR(t.val(q, l), bx.derivative(0)[ua] * by.derivative(0)[ub], 1e-14);
              EXPECT_NEAR(t.dx(q, l), bx.derivative(1)[ua] * by.derivative(0)[ub], 1e-14);
              EXPECT_NEAR(t.dy(q, l), bx.derivative(0)[ua] * by.derivative(1)[ub], 1e-14);
              EXPECT_NEAR(t.dxy(q, l), bx.derivative(1)[ua] * by.derivative(1)[ub], 1e-14);
              EXPECT_EQ(t.dofs[static_cast<std::size_t>(l)],
                        (bx.first_basis() + a) + s.basis_count(0) * (by.first_basis() + b));
            }
        }
      }
    }
}

TEST(EvalCache, RejectsMismatchedMesh) {
  const DiscreteSpace s = make_scalar_space(5, 2, 1, Boundary::none);
  EXPECT_THROW(EvalCache(s, QuadratureRule(build_mesh(4), 3)), ContractError);
}

TEST(EvalCache, DofsMatchSpaceDofMap) {
  const DiscreteSpace s = make_scalar_space(3, 2, 0, Boundary::none);
  const QuadratureRule rule(build_mesh(3), 3);
  const EvalCache cache(s, rule);
  const DofMap map = s.dof_map();
  for (int e = 0; e < 9; ++e) {
    const auto idx = map.element(e);
    const ElementTable t = cache.table(e);
    for (std::size_t l = 0; l < idx.size(); ++l) EXPECT_EQ(t.dofs[l], idx[l]);
  }
}
