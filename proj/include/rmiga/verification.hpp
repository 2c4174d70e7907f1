#pragma once

/**
 * @file verification.hpp
 * @brief Manufactured solutions, error norms and convergence-rate fits.
 */

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "rmiga/assembly_solver.hpp"
#include "rmiga/errors.hpp"
#include "rmiga/forms.hpp"
#include "rmiga/quadrature_mesh.hpp"
#include "rmiga/tensor_space.hpp"

namespace rmiga {

/// Exact solution given by its partial derivatives d^(a+b) u / dx^a dy^b
/// (a + b <= 3), with forcing and flux derived for constant coefficients.
struct ManufacturedCase {
  std::string name;
  ProblemData data;
  std::function<double(int, int, double, double)> partial;

  [[nodiscard]] double u(double x, double y) const { return partial(0, 0, x, y); }
  [[nodiscard]] std::array<double, 2> grad_u(double x, double y) const {
    return {partial(1, 0, x, y), partial(0, 1, x, y)};
  }
  [[nodiscard]] double laplacian_u(double x, double y) const { return partial(2, 0, x, y) + partial(0, 2, x, y); }
  /// q = kappa grad u - beta u
  [[nodiscard]] std::array<double, 2> q(double x, double y) const {
    const auto g = grad_u(x, y);
    const double v = u(x, y);
    return {data.kappa * g[0] - data.beta[0] * v, data.kappa * g[1] - data.beta[1] * v};
  }
  /// f = -kappa lap u + beta . grad u + gamma u
  [[nodiscard]] double f(double x, double y) const {
    const auto g = grad_u(x, y);
    return -data.kappa * laplacian_u(x, y) + data.beta[0] * g[0] + data.beta[1] * g[1] + data.gamma * u(x, y);
  }
  [[nodiscard]] std::array<double, 2> grad_f(double x, double y) const {
    std::array<double, 2> out{};
    for (int d = 0; d < 2; ++d) {
      const int a = d == 0 ? 1 : 0, b = 1 - a;
      const double lap = partial(2 + a, b, x, y) + partial(a, 2 + b, x, y);
      out[static_cast<std::size_t>(d)] = -data.kappa * lap + data.beta[0] * partial(1 + a, b, x, y) +
                                         data.beta[1] * partial(a, 1 + b, x, y) + data.gamma * partial(a, b, x, y);
    }
    return out;
  }
};

namespace detail {

/// d^n/dt^n sin(pi t)
inline double sin_derivative(int n, double t) {
  return std::pow(std::numbers::pi, n) * std::sin(std::numbers::pi * t + n * std::numbers::pi / 2.0);
}

inline ManufacturedCase finish_case(std::string name, ProblemData data,
                                    std::function<double(int, int, double, double)> partial) {
  ManufacturedCase c{std::move(name), std::move(data), std::move(partial)};
  const ManufacturedCase copy = c;
  c.data.f = [copy](double x, double y) { return copy.f(x, y); };
  return c;
}

}  // namespace detail

/// u = sin(pi x) sin(pi y) (2 - x + 3y); the forcing follows the given coefficients.
inline ManufacturedCase manufactured_case(ProblemData data) {
  // Leibniz rule with the linear factor g = 2 - x + 3y
  auto partial = [](int a, int b, double x, double y) {
    using detail::sin_derivative;
    const double g = 2.0 - x + 3.0 * y;
    double v = g * sin_derivative(a, x) * sin_derivative(b, y);
    if (a > 0) v += a * (-1.0) * sin_derivative(a - 1, x) * sin_derivative(b, y);
    if (b > 0) v += b * 3.0 * sin_derivative(a, x) * sin_derivative(b - 1, y);
    return v;
  };
  return detail::finish_case("sin(pi x) sin(pi y) (2 - x + 3y)", std::move(data), partial);
}

/// The reference case: kappa = 1, gamma = 1, beta = (1, 1).
inline ManufacturedCase manufactured_case() {
  ProblemData data;
  data.kappa = 1.0;
  data.gamma = 1.0;
  data.beta = {1.0, 1.0};
  return manufactured_case(std::move(data));
}

/// u = sin(pi x) sin(pi y) with no advection; the data has the symmetry of the square.
inline ManufacturedCase symmetric_case(double kappa = 1.0, double gamma = 1.0) {
  ProblemData data;
  data.kappa = kappa;
  data.gamma = gamma;
  data.beta = {0.0, 0.0};
  auto partial = [](int a, int b, double x, double y) {
    return detail::sin_derivative(a, x) * detail::sin_derivative(b, y);
  };
  return detail::finish_case("sin(pi x) sin(pi y)", data, partial);
}

/// u = x(1-x) y(1-y), a biquadratic that vanishes on the boundary.
inline ManufacturedCase polynomial_case(ProblemData coefficients = {}) {
  auto factor = [](int n, double t) {
    switch (n) {
      case 0:
        return t * (1.0 - t);
      case 1:
        return 1.0 - 2.0 * t;
      case 2:
        return -2.0;
      default:
        return 0.0;
    }
  };
  auto partial = [factor](int a, int b, double x, double y) { return factor(a, x) * factor(b, y); };
  return detail::finish_case("x(1-x) y(1-y)", std::move(coefficients), partial);
}

/// Scalar spline field value and gradient at a point, by direct evaluation.
inline std::array<double, 3> evaluate_field(const DiscreteSpace& space, const Eigen::VectorXd& coeffs, double x,
                                            double y, int component = 0) {
  const auto bx = evaluate_basis(space.knots(0), x, 1);
  const auto by = evaluate_basis(space.knots(1), y, 1);
  const int n1 = space.degree() + 1, nx = space.basis_count(0);
  const int offset = component * space.scalar_dof_count();
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int b = 0; b < n1; ++b)
    for (int a = 0; a < n1; ++a) {
      const double c = coeffs[offset + (bx.first_basis() + a) + nx * (by.first_basis() + b)];
      const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
      out[0] += c * bx.values()[ua] * by.values()[ub];
      out[1] += c * bx.derivative(1)[ua] * by.values()[ub];
      out[2] += c * bx.values()[ua] * by.derivative(1)[ub];
    }
  return out;
}

namespace detail {

inline Eigen::VectorXd gather(const Eigen::VectorXd& coeffs, const std::vector<int>& dofs, int offset) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) c[static_cast<Eigen::Index>(i)] = coeffs[offset + dofs[i]];
  return c;
}

}  // namespace detail

/// |u - u_h|_{1,Omega} for a scalar field given by full coefficients.
inline double error_h1_seminorm(const DiscreteSpace& space, const Eigen::VectorXd& coeffs,
                                const ManufacturedCase& exact, const QuadratureRule& rule) {
  const EvalCache cache(space, rule, 1);
  ElementTable t;
  double sum = 0.0;
  for (int e = 0; e < rule.mesh().element_count(); ++e) {
    cache.fill(e, t);
    const Eigen::VectorXd c = detail::gather(coeffs, t.dofs, 0);
    const Eigen::VectorXd gx = t.dx * c, gy = t.dy * c;
    const Eigen::VectorXd w = rule.weights(e);
    const Eigen::MatrixXd x = rule.points(e);
    for (int i = 0; i < w.size(); ++i) {
      const auto g = exact.grad_u(x(i, 0), x(i, 1));
      sum += w[i] * (std::pow(gx[i] - g[0], 2) + std::pow(gy[i] - g[1], 2));
    }
  }
  return std::sqrt(sum);
}

/// ||q - q_h||_{0,Omega} for a two-component vector field.
inline double error_flux_l2(const DiscreteSpace& space, const Eigen::VectorXd& coeffs, const ManufacturedCase& exact,
                            const QuadratureRule& rule) {
  if (space.components() != 2) throw ContractError("error_flux_l2: expected a two-component vector space");
  const EvalCache cache(space, rule, 0);
  ElementTable t;
  double sum = 0.0;
  for (int e = 0; e < rule.mesh().element_count(); ++e) {
    cache.fill(e, t);
    const Eigen::VectorXd q0 = t.val * detail::gather(coeffs, t.dofs, 0);
    const Eigen::VectorXd q1 = t.val * detail::gather(coeffs, t.dofs, space.scalar_dof_count());
    const Eigen::VectorXd w = rule.weights(e);
    const Eigen::MatrixXd x = rule.points(e);
    for (int i = 0; i < w.size(); ++i) {
      const auto q = exact.q(x(i, 0), x(i, 1));
      sum += w[i] * (std::pow(q0[i] - q[0], 2) + std::pow(q1[i] - q[1], 2));
    }
  }
  return std::sqrt(sum);
}

/// H1 seminorm error of the scalar recovered from a flux by u_h = (f + div q_h) / gamma.
inline double error_h1_recovered(const DiscreteSpace& space, const Eigen::VectorXd& coeffs,
                                 const ManufacturedCase& exact, const QuadratureRule& rule) {
  if (!(exact.data.gamma > 0.0)) throw ConfigError("scalar recovery needs gamma > 0");
  const EvalCache cache(space, rule, 2);
  ElementTable t;
  double sum = 0.0;
  for (int e = 0; e < rule.mesh().element_count(); ++e) {
    cache.fill(e, t);
    const Eigen::VectorXd c0 = detail::gather(coeffs, t.dofs, 0);
    const Eigen::VectorXd c1 = detail::gather(coeffs, t.dofs, space.scalar_dof_count());
    // grad(div q) = (q0_xx + q1_xy, q0_xy + q1_yy)
    const Eigen::VectorXd gdx = t.dxx * c0 + t.dxy * c1;
    const Eigen::VectorXd gdy = t.dxy * c0 + t.dyy * c1;
    const Eigen::VectorXd w = rule.weights(e);
    const Eigen::MatrixXd x = rule.points(e);
    for (int i = 0; i < w.size(); ++i) {
      const auto gf = exact.grad_f(x(i, 0), x(i, 1));
      const auto gu = exact.grad_u(x(i, 0), x(i, 1));
      const double ex = (gf[0] + gdx[i]) / exact.data.gamma - gu[0];
      const double ey = (gf[1] + gdy[i]) / exact.data.gamma - gu[1];
      sum += w[i] * (ex * ex + ey * ey);
    }
  }
  return std::sqrt(sum);
}

/// L2 projection onto the free DOFs of a space; `components` callables, one per component.
inline Eigen::VectorXd project_l2(const DiscreteSpace& space,
                                  const std::vector<std::function<double(double, double)>>& components,
                                  const QuadratureRule& rule) {
  if (static_cast<int>(components.size()) != space.components())
    throw ContractError("project_l2: one function per component required");
  const EvalCache cache(space, rule, 0);
  const int n = space.free_dof_count();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  ElementTable t;
  const auto free = space.free_index();
  for (int e = 0; e < rule.mesh().element_count(); ++e) {
    cache.fill(e, t);
    const Eigen::VectorXd w = rule.weights(e);
    const Eigen::MatrixXd x = rule.points(e);
    const Eigen::MatrixXd m = t.val.transpose() * w.asDiagonal() * t.val;
    for (int c = 0; c < space.components(); ++c) {
      Eigen::VectorXd fv(w.size());
      for (int i = 0; i < w.size(); ++i) fv[i] = components[static_cast<std::size_t>(c)](x(i, 0), x(i, 1));
      const Eigen::VectorXd le = t.val.transpose() * w.cwiseProduct(fv);
      for (int a = 0; a < t.local_count(); ++a) {
        const int r = free[static_cast<std::size_t>(c * space.scalar_dof_count() + t.dofs[static_cast<std::size_t>(a)])];
        if (r < 0) continue;
        rhs[r] += le[a];
        for (int b = 0; b < t.local_count(); ++b) {
          const int s = free[static_cast<std::size_t>(c * space.scalar_dof_count() + t.dofs[static_cast<std::size_t>(b)])];
          if (s >= 0) trip.emplace_back(r, s, m(a, b));
        }
      }
    }
  }
  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(M);
  return expand_free(space, ldlt.solve(rhs));
}

/// Mesh sizes with per-level errors for one discretization family.
struct ConvergenceRecord {
  std::vector<double> h;
  std::vector<double> err_h1;
  std::vector<double> err_flux;  ///< empty when the formulation has no flux unknown
  std::vector<double> residual;
};

struct RateFit {
  std::vector<double> pairwise;  ///< log(e_i/e_{i+1}) / log(h_i/h_{i+1})
  double slope = 0.0;            ///< least-squares slope of log e against log h
  double constant = 0.0;         ///< C in e ~ C h^slope

  [[nodiscard]] double finest() const { return pairwise.empty() ? 0.0 : pairwise.back(); }
};

inline RateFit fit_rates(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size()) throw ContractError("fit_rates: h and error lists differ in length");
  if (h.size() < 2) throw ContractError("fit_rates: need at least two mesh levels");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(e[i] > 0.0)) throw ContractError("fit_rates: errors must be positive");
    if (!(h[i] > 0.0)) throw ContractError("fit_rates: mesh sizes must be positive");
    if (i > 0 && !(h[i] < h[i - 1])) throw ContractError("fit_rates: mesh sizes must strictly decrease");
  }
  RateFit fit;
  for (std::size_t i = 0; i + 1 < h.size(); ++i)
    fit.pairwise.push_back(std::log(e[i] / e[i + 1]) / std::log(h[i] / h[i + 1]));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double lx = std::log(h[i]), ly = std::log(e[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.constant = std::exp((sy - fit.slope * sx) / n);
  return fit;
}

}  // namespace rmiga
