#pragma once

/**
 * @file quadrature_mesh.hpp
 * @brief Uniform tensor-product meshes, Gauss-Legendre rules and basis caches.
 *
 * Quadrature points are always element interior, so broken (C^-1) spaces are
 * evaluated without any ambiguity at breakpoints.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmiga/bspline.hpp"
#include "rmiga/errors.hpp"
#include "rmiga/tensor_space.hpp"

namespace rmiga {

class Mesh {
 public:
  explicit Mesh(std::vector<std::vector<double>> breakpoints) : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.empty() || breakpoints_.size() > 3) throw ConfigError("mesh: dimension must be 1, 2 or 3");
    for (const auto& b : breakpoints_) {
      if (b.size() < 2) throw ConfigError("mesh: need at least one element per direction");
      for (std::size_t i = 0; i + 1 < b.size(); ++i)
        if (!(b[i] < b[i + 1])) throw ConfigError("mesh: breakpoints must be strictly increasing");
    }
  }

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(breakpoints_.size()); }
  [[nodiscard]] std::span<const double> breakpoints(int d) const {
    return breakpoints_[static_cast<std::size_t>(d)];
  }
  [[nodiscard]] int elements_along(int d) const {
    return static_cast<int>(breakpoints_[static_cast<std::size_t>(d)].size()) - 1;
  }
  [[nodiscard]] int element_count() const {
    int n = 1;
    for (int d = 0; d < dim(); ++d) n *= elements_along(d);
    return n;
  }
  /// Per-direction element indices of element e (x fastest).
  [[nodiscard]] std::array<int, 3> element_index(int e) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = 0; d < dim(); ++d) {
      idx[static_cast<std::size_t>(d)] = e % elements_along(d);
      e /= elements_along(d);
    }
    return idx;
  }
  [[nodiscard]] double side(int d, int ed) const {
    const auto& b = breakpoints_[static_cast<std::size_t>(d)];
    return b[static_cast<std::size_t>(ed) + 1] - b[static_cast<std::size_t>(ed)];
  }
  /// Element size h: the longest side of element e.
  [[nodiscard]] double element_size(int e) const {
    const auto idx = element_index(e);
    double h = 0.0;
    for (int d = 0; d < dim(); ++d) h = std::max(h, side(d, idx[static_cast<std::size_t>(d)]));
    return h;
  }
  [[nodiscard]] double element_measure(int e) const {
    const auto idx = element_index(e);
    double m = 1.0;
    for (int d = 0; d < dim(); ++d) m *= side(d, idx[static_cast<std::size_t>(d)]);
    return m;
  }
  /// Largest element size over the mesh.
  [[nodiscard]] double h() const {
    double h = 0.0;
    for (int d = 0; d < dim(); ++d)
      for (int e = 0; e < elements_along(d); ++e) h = std::max(h, side(d, e));
    return h;
  }

  /// True when every direction's breakpoints coincide with the space's.
  [[nodiscard]] bool matches(const DiscreteSpace& space) const {
    if (space.dim() != dim()) return false;
    for (int d = 0; d < dim(); ++d) {
      const auto bps = space.knots(d).breakpoints();
      const auto mine = breakpoints(d);
      if (bps.size() != mine.size()) return false;
      const double scale = std::abs(mine.back() - mine.front());
      for (std::size_t i = 0; i < bps.size(); ++i)
        if (std::abs(bps[i] - mine[i]) > 1e-14 * scale) return false;
    }
    return true;
  }

 private:
  std::vector<std::vector<double>> breakpoints_;
};

/// Uniform mesh with n[d] elements along each direction of the box.
inline Mesh build_mesh(std::span<const int> n, std::span<const Interval> box = {}) {
  std::vector<std::vector<double>> bps;
  for (std::size_t d = 0; d < n.size(); ++d) {
    if (n[d] < 1) throw ConfigError("mesh: need at least one element per direction");
    const Interval iv = box.empty() ? Interval{} : box[d];
    std::vector<double> b(static_cast<std::size_t>(n[d]) + 1);
    for (int i = 0; i <= n[d]; ++i)
      b[static_cast<std::size_t>(i)] = iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / static_cast<double>(n[d]);
    b.back() = iv.hi;
    bps.push_back(std::move(b));
  }
  return Mesh(std::move(bps));
}

/// n x n elements on the unit square.
inline Mesh build_mesh(int n) {
  const int ns[2] = {n, n};
  return build_mesh(ns);
}

struct GaussRule {
  std::vector<double> points;   ///< on [0, 1]
  std::vector<double> weights;  ///< sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact for degree 2n-1.
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one point");
  GaussRule rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.points[lo] = 0.5 * (1.0 - x);
    rule.points[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = 0.5 * w;
    rule.weights[hi] = 0.5 * w;
  }
  return rule;
}

/// Tensor Gauss-Legendre rule over every element of a mesh.
class QuadratureRule {
 public:
  QuadratureRule(Mesh mesh, int points_per_dir)
      : mesh_(std::move(mesh)), points_per_dir_(points_per_dir), ref_(gauss_legendre(points_per_dir)) {}

  [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
  [[nodiscard]] int points_per_dir() const noexcept { return points_per_dir_; }
  [[nodiscard]] int points_per_element() const {
    int n = 1;
    for (int d = 0; d < mesh_.dim(); ++d) n *= points_per_dir_;
    return n;
  }

  /// Quadrature abscissae along direction d inside element ed.
  [[nodiscard]] std::vector<double> points_1d(int d, int ed) const {
    const double lo = mesh_.breakpoints(d)[static_cast<std::size_t>(ed)];
    const double len = mesh_.side(d, ed);
    std::vector<double> x(ref_.points.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = lo + len * ref_.points[i];
    return x;
  }
  [[nodiscard]] std::vector<double> weights_1d(int d, int ed) const {
    const double len = mesh_.side(d, ed);
    std::vector<double> w(ref_.weights.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = len * ref_.weights[i];
    return w;
  }

  /// Tensor weights of element e, including the affine Jacobian (x fastest).
  [[nodiscard]] Eigen::VectorXd weights(int e) const {
    const auto idx = mesh_.element_index(e);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(points_per_element());
    int stride = 1;
    for (int d = 0; d < mesh_.dim(); ++d) {
      const auto w1 = weights_1d(d, idx[static_cast<std::size_t>(d)]);
      for (int q = 0; q < w.size(); ++q) w[q] *= w1[static_cast<std::size_t>((q / stride) % points_per_dir_)];
      stride *= points_per_dir_;
    }
    return w;
  }

  /// Physical coordinates of element e's points, one row per point.
  [[nodiscard]] Eigen::MatrixXd points(int e) const {
    const auto idx = mesh_.element_index(e);
    Eigen::MatrixXd x(points_per_element(), mesh_.dim());
    int stride = 1;
    for (int d = 0; d < mesh_.dim(); ++d) {
      const auto x1 = points_1d(d, idx[static_cast<std::size_t>(d)]);
      for (int q = 0; q < x.rows(); ++q) x(q, d) = x1[static_cast<std::size_t>((q / stride) % points_per_dir_)];
      stride *= points_per_dir_;
    }
    return x;
  }

 private:
  Mesh mesh_;
  int points_per_dir_;
  GaussRule ref_;
};

inline QuadratureRule make_quadrature(const Mesh& mesh, int points_per_dir) {
  return {mesh, points_per_dir};
}

/// Basis values and derivatives of one scalar factor space on one 2D element.
/// Matrices are (points x local functions); local index a = ix + (p+1)*iy.
struct ElementTable {
  Eigen::MatrixXd val, dx, dy, dxx, dxy, dyy;
  std::vector<int> dofs;  ///< scalar global indices of the local functions

  [[nodiscard]] int local_count() const { return static_cast<int>(val.cols()); }
  [[nodiscard]] Eigen::MatrixXd laplacian() const { return dxx + dyy; }
};

/// Per-direction basis evaluations at every quadrature abscissa of a 2D rule,
/// from which element tables are formed by tensor products.
class EvalCache {
 public:
  EvalCache(const DiscreteSpace& space, const QuadratureRule& rule, int max_deriv = 2)
      : degree_(space.degree()), max_deriv_(max_deriv) {
    if (space.dim() != 2 || rule.mesh().dim() != 2) throw ContractError("EvalCache: 2D spaces only");
    if (!rule.mesh().matches(space)) throw ContractError("EvalCache: mesh and space breakpoints differ");
    for (int d = 0; d < 2; ++d) {
      nbasis_[static_cast<std::size_t>(d)] = space.basis_count(d);
      auto& dir = tables_[static_cast<std::size_t>(d)];
      for (int e = 0; e < rule.mesh().elements_along(d); ++e) {
        std::vector<BasisEval> at_points;
        for (double x : rule.points_1d(d, e)) at_points.push_back(evaluate_basis(space.knots(d), x, max_deriv));
        dir.push_back(std::move(at_points));
      }
    }
    nx_elements_ = rule.mesh().elements_along(0);
    nq_ = rule.points_per_dir();
  }

  [[nodiscard]] int max_deriv() const noexcept { return max_deriv_; }

  [[nodiscard]] const BasisEval& eval_1d(int d, int ed, int point) const {
    return tables_[static_cast<std::size_t>(d)][static_cast<std::size_t>(ed)][static_cast<std::size_t>(point)];
  }

  void fill(int e, ElementTable& t) const {
    const int ex = e % nx_elements_, ey = e / nx_elements_;
    const int n1 = degree_ + 1;
    const int nloc = n1 * n1, npts = nq_ * nq_;
    for (auto* m : {&t.val, &t.dx, &t.dy, &t.dxx, &t.dxy, &t.dyy}) m->resize(npts, nloc);
    const bool second = max_deriv_ >= 2;
    for (int iy = 0; iy < nq_; ++iy) {
      const auto& by = eval_1d(1, ey, iy);
      const auto y0 = by.derivative(0);
      const auto y1 = max_deriv_ >= 1 ? by.derivative(1) : y0;
      for (int ix = 0; ix < nq_; ++ix) {
        const auto& bx = eval_1d(0, ex, ix);
        const auto x0 = bx.derivative(0);
        const auto x1 = max_deriv_ >= 1 ? bx.derivative(1) : x0;
        const int q = ix + nq_ * iy;
        for (int b = 0; b < n1; ++b)
          for (int a = 0; a < n1; ++a) {
            const int l = a + n1 * b;
            const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
            t.val(q, l) = x0[ua] * y0[ub];
            if (max_deriv_ >= 1) {
              t.dx(q, l) = x1[ua] * y0[ub];
              t.dy(q, l) = x0[ua] * y1[ub];
            }
            if (second) {
              t.dxx(q, l) = bx.derivative(2)[ua] * y0[ub];
              t.dxy(q, l) = x1[ua] * y1[ub];
              t.dyy(q, l) = x0[ua] * by.derivative(2)[ub];
            }
          }
      }
    }
    if (max_deriv_ < 1) {
      t.dx.setZero();
      t.dy.setZero();
    }
    if (!second) {
      t.dxx.setZero();
      t.dxy.setZero();
      t.dyy.setZero();
    }
    const int fx = eval_1d(0, ex, 0).first_basis(), fy = eval_1d(1, ey, 0).first_basis();
    t.dofs.resize(static_cast<std::size_t>(nloc));
    for (int b = 0; b < n1; ++b)
      for (int a = 0; a < n1; ++a)
        t.dofs[static_cast<std::size_t>(a + n1 * b)] = (fx + a) + nbasis_[0] * (fy + b);
  }

  [[nodiscard]] ElementTable table(int e) const {
    ElementTable t;
    fill(e, t);
    return t;
  }

 private:
  int degree_;
  int max_deriv_;
  int nx_elements_ = 0;
  int nq_ = 0;
  std::array<int, 2> nbasis_{0, 0};
  std::array<std::vector<std::vector<BasisEval>>, 2> tables_;
};

}  // namespace rmiga
