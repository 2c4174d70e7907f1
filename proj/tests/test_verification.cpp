#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rmiga/experiment.hpp"

using namespace rmiga;

namespace {

constexpr double pi = std::numbers::pi;

// Hand-differentiated u = sin(pi x) sin(pi y) (2 - x + 3y).
struct HandCase {
  static double s(double t) { return std::sin(pi * t); }
  static double c(double t) { return std::cos(pi * t); }
  static double g(double x, double y) { return 2 - x + 3 * y; }
  static double u(double x, double y) { return s(x) * s(y) * g(x, y); }
  static double ux(double x, double y) { return pi * c(x) * s(y) * g(x, y) - s(x) * s(y); }
  static double uy(double x, double y) { return pi * s(x) * c(y) * g(x, y) + 3 * s(x) * s(y); }
  static double uxx(double x, double y) { return -pi * pi * s(x) * s(y) * g(x, y) - 2 * pi * c(x) * s(y); }
  static double uyy(double x, double y) { return -pi * pi * s(x) * s(y) * g(x, y) + 6 * pi * s(x) * c(y); }
};

// |grad u|^2 integrated on a fine independent rule.
double h1_seminorm_squared(const ManufacturedCase& exact) {
  const GaussRule r = gauss_legendre(8);
  const int n = 40;
  double sum = 0.0;
  for (int ey = 0; ey < n; ++ey)
    for (int ex = 0; ex < n; ++ex)
      for (std::size_t j = 0; j < r.points.size(); ++j)
        for (std::size_t i = 0; i < r.points.size(); ++i) {
          const double x = (ex + r.points[i]) / n, y = (ey + r.points[j]) / n;
          const auto gu = exact.grad_u(x, y);
          sum += r.weights[i] * r.weights[j] / (n * n) * (gu[0] * gu[0] + gu[1] * gu[1]);
        }
  return sum;
}

}  // namespace

TEST(ManufacturedCase, CentreValue) {
  const ManufacturedCase m = manufactured_case();
  EXPECT_NEAR(m.u(0.5, 0.5), 3.0, 1e-15);
  const auto g = m.grad_u(0.5, 0.5);
  EXPECT_NEAR(g[0], -1.0, 1e-14);
  EXPECT_NEAR(g[1], 3.0, 1e-14);
  const auto q = m.q(0.5, 0.5);
  EXPECT_NEAR(q[0], -4.0, 1e-14);
  EXPECT_NEAR(q[1], 0.0, 1e-14);
}

TEST(ManufacturedCase, FluxMatchesFiniteDifferences) {
  const ManufacturedCase m = manufactured_case();
  const double h = 1e-6;
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> t(0.05, 0.95);
  for (int i = 0; i < 50; ++i) {
    const double x = t(rng), y = t(rng);
    const double dx = (m.u(x + h, y) - m.u(x - h, y)) / (2 * h);
    const double dy = (m.u(x, y + h) - m.u(x, y - h)) / (2 * h);
    const auto q = m.q(x, y);
    EXPECT_NEAR(q[0], dx - m.u(x, y), 1e-7);
    EXPECT_NEAR(q[1], dy - m.u(x, y), 1e-7);
  }
}

TEST(ManufacturedCase, VanishesOnBoundary) {
  const ManufacturedCase m = manufactured_case();
  for (int i = 0; i <= 100; ++i) {
    const double s = i / 100.0;
    EXPECT_NEAR(m.u(s, 0.0), 0.0, 1e-15);
    EXPECT_NEAR(m.u(s, 1.0), 0.0, 1e-14);
    EXPECT_NEAR(m.u(0.0, s), 0.0, 1e-15);
    EXPECT_NEAR(m.u(1.0, s), 0.0, 1e-14);
  }
}

TEST(ManufacturedCase, PdeResidualAtRandomPoints) {
  const ManufacturedCase m = manufactured_case();
  std::mt19937 rng(1000);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = t(rng), y = t(rng);
    EXPECT_NEAR(m.u(x, y), HandCase::u(x, y), 1e-13);
    EXPECT_NEAR(m.grad_u(x, y)[0], HandCase::ux(x, y), 1e-12);
    EXPECT_NEAR(m.grad_u(x, y)[1], HandCase::uy(x, y), 1e-12);
    const double lap = HandCase::uxx(x, y) + HandCase::uyy(x, y);
    const double residual = -lap + HandCase::ux(x, y) + HandCase::uy(x, y) + HandCase::u(x, y) - m.f(x, y);
    EXPECT_LE(std::abs(residual), 1e-10);
    EXPECT_NEAR(m.data.f(x, y), m.f(x, y), 1e-15);
  }
}

TEST(ManufacturedCase, ForcingFollowsCoefficients) {
  ProblemData data;
  data.kappa = 2.0;
  data.gamma = 0.5;
  data.beta = {-1.0, 0.25};
  const ManufacturedCase m = manufactured_case(data);
  const double x = 0.3, y = 0.7;
  const double expected = -2.0 * (HandCase::uxx(x, y) + HandCase::uyy(x, y)) - HandCase::ux(x, y) +
                          0.25 * HandCase::uy(x, y) + 0.5 * HandCase::u(x, y);
  EXPECT_NEAR(m.f(x, y), expected, 1e-12);
  // grad f by central differences
  const double h = 1e-5;
  EXPECT_NEAR(m.grad_f(x, y)[0], (m.f(x + h, y) - m.f(x - h, y)) / (2 * h), 1e-5);
  EXPECT_NEAR(m.grad_f(x, y)[1], (m.f(x, y + h) - m.f(x, y - h)) / (2 * h), 1e-5);
}

TEST(ErrorNorms, ZeroFieldGivesSeminorm) {
  const ManufacturedCase m = manufactured_case();
  const double expected = std::sqrt(h1_seminorm_squared(m));
  for (int n : {4, 8, 16}) {
    const DiscreteSpace s = make_scalar_space(n, 2, 1, Boundary::homogeneous_dirichlet);
    const QuadratureRule rule(build_mesh(n), 4);
    EXPECT_NEAR(error_h1_seminorm(s, Eigen::VectorXd::Zero(s.dof_count()), m, rule), expected, 1e-6 * expected);
  }
}

TEST(ErrorNorms, ZeroFluxGivesL2Norm) {
  const ManufacturedCase m = manufactured_case();
  std::vector<double> values;
  for (int n : {4, 8, 16}) {
    const DiscreteSpace s = make_vector_space(n, 2, 1);
    const QuadratureRule rule(build_mesh(n), 6);
    values.push_back(error_flux_l2(s, Eigen::VectorXd::Zero(s.dof_count()), m, rule));
  }
  EXPECT_GT(values[0], 1.0);
  EXPECT_NEAR(values[1], values[0], 1e-8 * values[0]);
  EXPECT_NEAR(values[2], values[0], 1e-8 * values[0]);
}

TEST(ErrorNorms, FluxErrorNeedsFluxUnknown) {
  const ManufacturedCase m = manufactured_case();
  const DiscreteSpace scalar = make_scalar_space(4, 2, 1, Boundary::none);
  const QuadratureRule rule(build_mesh(4), 4);
  EXPECT_THROW(error_flux_l2(scalar, Eigen::VectorXd::Zero(scalar.dof_count()), m, rule), ContractError);
  const Discretization disc = make_discretization(2, default_choice(2, 2), 4, m.data);
  EXPECT_THROW(error_flux_l2(disc, FieldCoefficients{}, m, rule), ContractError);
}

TEST(ErrorNorms, ProjectionRates) {
  const ManufacturedCase m = manufactured_case();
  for (int p : {2, 3}) {
    std::vector<double> h, eu, eq;
    for (int n : {4, 8, 16}) {
      const DiscreteSpace su = make_scalar_space(n, p, p - 1, Boundary::homogeneous_dirichlet);
      const DiscreteSpace sq = make_vector_space(n, p, p - 1);
      const QuadratureRule rule(build_mesh(n), p + 2);
      const Eigen::VectorXd cu = project_l2(su, {[&](double x, double y) { return m.u(x, y); }}, rule);
      const Eigen::VectorXd cq = project_l2(sq, {[&](double x, double y) { return m.q(x, y)[0]; },
                                                 [&](double x, double y) { return m.q(x, y)[1]; }},
                                            rule);
      h.push_back(1.0 / n);
      eu.push_back(error_h1_seminorm(su, cu, m, rule));
      eq.push_back(error_flux_l2(sq, cq, m, rule));
    }
    EXPECT_GE(fit_rates(h, eu).finest(), p - 0.05) << "p=" << p;
    EXPECT_GE(fit_rates(h, eq).finest(), p + 1 - 0.05) << "p=" << p;
  }
}

TEST(ErrorNorms, VanishOnRepresentableFields) {
  const ManufacturedCase m = polynomial_case();
  for (int p : {2, 3}) {
    const DiscreteSpace su = make_scalar_space(3, p, p - 1, Boundary::homogeneous_dirichlet);
    const DiscreteSpace sq = make_vector_space(3, p, p - 1);
    const QuadratureRule rule(build_mesh(3), p + 2);
    const Eigen::VectorXd cu = project_l2(su, {[&](double x, double y) { return m.u(x, y); }}, rule);
    const Eigen::VectorXd cq = project_l2(sq, {[&](double x, double y) { return m.q(x, y)[0]; },
                                               [&](double x, double y) { return m.q(x, y)[1]; }},
                                          rule);
    const double eu = error_h1_seminorm(su, cu, m, rule), eq = error_flux_l2(sq, cq, m, rule);
    EXPECT_GE(eu, 0.0);
    EXPECT_LE(eu, 1e-12);
    EXPECT_LE(eq, 1e-12);
  }
}

TEST(ErrorNorms, EvaluateFieldMatchesCoefficients) {
  const ManufacturedCase m = polynomial_case();
  const DiscreteSpace s = make_scalar_space(4, 2, 1, Boundary::homogeneous_dirichlet);
  const QuadratureRule rule(build_mesh(4), 4);
  const Eigen::VectorXd c = project_l2(s, {[&](double x, double y) { return m.u(x, y); }}, rule);
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0})
    for (double y : {0.0, 0.31, 0.6, 1.0}) {
      const auto v = evaluate_field(s, c, x, y);
      EXPECT_NEAR(v[0], m.u(x, y), 1e-13);
      EXPECT_NEAR(v[1], m.grad_u(x, y)[0], 1e-12);
      EXPECT_NEAR(v[2], m.grad_u(x, y)[1], 1e-12);
    }
}

TEST(FitRates, GeometricSequence) {
  const RateFit fit = fit_rates({0.2, 0.1, 0.05}, {1.0, 0.25, 0.0625});
  ASSERT_EQ(fit.pairwise.size(), 2u);
  EXPECT_NEAR(fit.pairwise[0], 2.0, 1e-14);
  EXPECT_NEAR(fit.pairwise[1], 2.0, 1e-14);
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_NEAR(fit.constant, 25.0, 1e-10);
  EXPECT_NEAR(fit.finest(), 2.0, 1e-14);
}

TEST(FitRates, SinglePair) { EXPECT_NEAR(fit_rates({0.5, 0.25}, {0.8, 0.4}).finest(), 1.0, 1e-14); }

TEST(FitRates, RejectsBadInput) {
  EXPECT_THROW(fit_rates({0.2}, {1.0}), ContractError);
  EXPECT_THROW(fit_rates({0.2, 0.1}, {1.0, 0.0}), ContractError);
  EXPECT_THROW(fit_rates({0.2, 0.1}, {1.0, -1.0}), ContractError);
  EXPECT_THROW(fit_rates({0.1, 0.2}, {1.0, 0.5}), ContractError);
  EXPECT_THROW(fit_rates({0.2, 0.1}, {1.0}), ContractError);
}

TEST(Convergence, GalerkinQuadraticRate) {
  const ManufacturedCase m = manufactured_case();
  std::vector<double> h, e;
  for (int n : {10, 20}) {
    RunSpec spec;
    spec.formulation = 2;
    spec.choice = default_choice(2, 2);
    spec.n = n;
    const RunResult r = run_case(spec, m);
    h.push_back(r.h);
    e.push_back(r.err_h1);
  }
  EXPECT_NEAR(fit_rates(h, e).finest(), 2.0, 0.15);
}

TEST(Convergence, ErrorsDecreaseUnderRefinement) {
  const ManufacturedCase m = manufactured_case();
  for (int id = 1; id <= 7; ++id) {
    std::vector<double> eh1, eflux;
    for (int n : {4, 8, 16}) {
      RunSpec spec;
      spec.formulation = id;
      spec.choice = default_choice(id, 2);
      spec.n = n;
      const RunResult r = run_case(spec, m);
      eh1.push_back(r.err_h1);
      if (r.err_flux) eflux.push_back(*r.err_flux);
    }
    EXPECT_LT(eh1[1], eh1[0]) << "id=" << id;
    EXPECT_LT(eh1[2], eh1[1]) << "id=" << id;
    if (!eflux.empty()) {
      EXPECT_LT(eflux[1], eflux[0]) << "id=" << id;
      EXPECT_LT(eflux[2], eflux[1]) << "id=" << id;
    }
  }
}
