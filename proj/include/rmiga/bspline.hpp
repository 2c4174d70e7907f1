#pragma once

/**
 * @file bspline.hpp
 * @brief One-dimensional B-spline kernel.
 *
 * Knot vectors with multiplicity bookkeeping, span-local Cox-de Boor
 * evaluation with derivatives, and continuity control by knot repetition.
 * A knot vector with degree p and m+1 knots spans m-p basis functions; the
 * evaluation domain is [x_p, x_{m-p}].
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rmiga/errors.hpp"

namespace rmiga {

class KnotVector {
 public:
  KnotVector(std::vector<double> knots, int degree) : knots_(std::move(knots)), degree_(degree) {
    if (degree_ < 0) throw ConfigError("knot vector: negative degree");
    if (knots_.size() < static_cast<std::size_t>(degree_) + 2)
      throw ConfigError("knot vector: need at least degree+2 knots");
    for (std::size_t j = 0; j + 1 < knots_.size(); ++j)
      if (!(knots_[j] <= knots_[j + 1])) throw ConfigError("knot vector: knots must be nondecreasing");
    std::size_t run = 1;
    for (std::size_t j = 1; j <= knots_.size(); ++j) {
      if (j < knots_.size() && knots_[j] == knots_[j - 1]) {
        ++run;
        continue;
      }
      if (run > static_cast<std::size_t>(degree_) + 1)
        throw ConfigError("knot vector: multiplicity exceeds degree+1");
      run = 1;
    }
  }

  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
  [[nodiscard]] std::size_t size() const noexcept { return knots_.size(); }
  [[nodiscard]] double operator[](std::size_t j) const { return knots_[j]; }

  /// Dimension of the spanned space: knot count - p - 1.
  [[nodiscard]] int num_basis() const noexcept {
    return static_cast<int>(knots_.size()) - degree_ - 1;
  }

  /// Left end of the evaluation domain, x_p.
  [[nodiscard]] double front() const noexcept { return knots_[static_cast<std::size_t>(degree_)]; }
  /// Right end of the evaluation domain, x_{m-p}.
  [[nodiscard]] double back() const noexcept { return knots_[static_cast<std::size_t>(num_basis())]; }

  [[nodiscard]] int multiplicity(double x) const {
    auto [lo, hi] = std::equal_range(knots_.begin(), knots_.end(), x);
    return static_cast<int>(hi - lo);
  }

  /// Clamped form: first and last knots repeated exactly p+1 times.
  [[nodiscard]] bool is_open() const {
    return multiplicity(knots_.front()) == degree_ + 1 && multiplicity(knots_.back()) == degree_ + 1;
  }

  /// Distinct knot values inside [front(), back()], in increasing order.
  [[nodiscard]] std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (double x : knots_) {
      if (x < front() || x > back()) continue;
      if (out.empty() || out.back() != x) out.push_back(x);
    }
    return out;
  }

  /// Knot-span index i with x_i <= x < x_{i+1} (right limit), or the last
  /// nonempty span when x == back() (left limit).
  [[nodiscard]] int find_span(double x) const {
    if (!(front() < back())) throw DomainError("knot vector: empty evaluation domain");
    if (x < front() || x > back())
      throw DomainError("B-spline evaluation point " + std::to_string(x) + " outside [" +
                        std::to_string(front()) + ", " + std::to_string(back()) + "]");
    const auto end = knots_.begin() + num_basis() + 1;
    if (x == back()) {
      return static_cast<int>(std::lower_bound(knots_.begin(), end, x) - knots_.begin()) - 1;
    }
    return static_cast<int>(std::upper_bound(knots_.begin(), end, x) - knots_.begin()) - 1;
  }

 private:
  std::vector<double> knots_;
  int degree_;
};

/// The p+1 basis functions that are nonzero on one knot span, with derivatives.
struct BasisEval {
  int span = 0;       ///< knot-span index i, x_i <= x < x_{i+1}
  int degree = 0;
  int max_deriv = 0;
  std::vector<double> table;  ///< (max_deriv+1) x (p+1), row k holds the k-th derivatives

  /// Global index of the first nonzero basis function.
  [[nodiscard]] int first_basis() const noexcept { return span - degree; }

  [[nodiscard]] std::span<const double> derivative(int order) const {
    const auto n = static_cast<std::size_t>(degree + 1);
    return {table.data() + static_cast<std::size_t>(order) * n, n};
  }
  [[nodiscard]] std::span<const double> values() const { return derivative(0); }
};

/// Span-local Cox-de Boor triangle with the standard derivative recursion.
/// Derivative orders above p are returned as zeros.
inline BasisEval evaluate_basis(const KnotVector& kv, double x, int max_deriv) {
  if (max_deriv < 0) throw ConfigError("evaluate_basis: negative derivative order");
  const int p = kv.degree();
  const int span = kv.find_span(x);
  const auto U = kv.knots();
  const auto n = static_cast<std::size_t>(p + 1);

  // ndu: upper triangle holds basis values, lower triangle knot differences
  std::vector<double> ndu(n * n, 0.0);
  auto at = [n](std::vector<double>& m, int r, int c) -> double& {
    return m[static_cast<std::size_t>(r) * n + static_cast<std::size_t>(c)];
  };
  std::vector<double> left(n, 0.0), right(n, 0.0);
  at(ndu, 0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[static_cast<std::size_t>(j)] = x - U[static_cast<std::size_t>(span + 1 - j)];
    right[static_cast<std::size_t>(j)] = U[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      at(ndu, j, r) = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double temp = at(ndu, r, j - 1) / at(ndu, j, r);
      at(ndu, r, j) = saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    at(ndu, j, j) = saved;
  }

  BasisEval out;
  out.span = span;
  out.degree = p;
  out.max_deriv = max_deriv;
  out.table.assign(static_cast<std::size_t>(max_deriv + 1) * n, 0.0);
  auto ders = [&](int k, int j) -> double& {
    return out.table[static_cast<std::size_t>(k) * n + static_cast<std::size_t>(j)];
  };
  for (int j = 0; j <= p; ++j) ders(0, j) = at(ndu, j, p);

  const int top = std::min(max_deriv, p);
  std::vector<double> a(2 * n, 0.0);
  auto A = [&](int s, int j) -> double& {
    return a[static_cast<std::size_t>(s) * n + static_cast<std::size_t>(j)];
  };
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    A(0, 0) = 1.0;
    for (int k = 1; k <= top; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        A(s2, 0) = A(s1, 0) / at(ndu, pk + 1, rk);
        d = A(s2, 0) * at(ndu, rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        A(s2, j) = (A(s1, j) - A(s1, j - 1)) / at(ndu, pk + 1, rk + j);
        d += A(s2, j) * at(ndu, rk + j, pk);
      }
      if (r <= pk) {
        A(s2, k) = -A(s1, k - 1) / at(ndu, pk + 1, r);
        d += A(s2, k) * at(ndu, r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= top; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
    factor *= (p - k);
  }
  return out;
}

/// Value of the j-th basis function by the global recursion, any 0/0 term
/// taken as 0. Valid on [x_0, x_m]; the last nonempty span is closed on the
/// right so the function is defined at the domain end.
inline double basis_function(const KnotVector& kv, int j, int p, double x) {
  const auto U = kv.knots();
  const auto idx = [](int i) { return static_cast<std::size_t>(i); };
  if (p == 0) {
    const double a = U[idx(j)], b = U[idx(j + 1)];
    if (a <= x && x < b) return 1.0;
    return (x == b && a < b && b == U.back()) ? 1.0 : 0.0;
  }
  double value = 0.0;
  const double d1 = U[idx(j + p)] - U[idx(j)];
  const double d2 = U[idx(j + p + 1)] - U[idx(j + 1)];
  if (d1 > 0.0) value += (x - U[idx(j)]) / d1 * basis_function(kv, j, p - 1, x);
  if (d2 > 0.0) value += (U[idx(j + p + 1)] - x) / d2 * basis_function(kv, j + 1, p - 1, x);
  return value;
}

inline double basis_function(const KnotVector& kv, int j, double x) {
  if (j < 0 || j >= kv.num_basis()) throw ConfigError("basis_function: index out of range");
  return basis_function(kv, j, kv.degree(), x);
}

/// Open knot vector on uniform breakpoints of [a, b]. `continuity` is the
/// order k of the resulting C^k space across interior breakpoints; interior
/// knots are repeated p-k times.
inline KnotVector make_open_knot_vector(int n_elements, int degree, int continuity, double a = 0.0,
                                        double b = 1.0) {
  if (n_elements < 1) throw ConfigError("knot vector: need at least one element");
  if (degree < 0) throw ConfigError("knot vector: negative degree");
  if (continuity < -1 || continuity > degree - 1)
    throw ConfigError("knot vector: continuity " + std::to_string(continuity) +
                      " outside [-1, p-1] for p = " + std::to_string(degree));
  if (!(b > a)) throw ConfigError("knot vector: empty interval");
  const int interior = degree - continuity;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(2 * (degree + 1) + (n_elements - 1) * interior));
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), a);
  for (int e = 1; e < n_elements; ++e) {
    const double x = a + (b - a) * static_cast<double>(e) / static_cast<double>(n_elements);
    knots.insert(knots.end(), static_cast<std::size_t>(interior), x);
  }
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), b);
  return {std::move(knots), degree};
}

/// Continuity order p - multiplicity across an interior breakpoint
/// (-1 for a fully broken breakpoint). Breakpoints are indexed 0..n_elements.
inline int continuity_at_breakpoint(const KnotVector& kv, int breakpoint_index) {
  const auto bps = kv.breakpoints();
  if (breakpoint_index <= 0 || breakpoint_index >= static_cast<int>(bps.size()) - 1)
    throw ContractError("continuity_at_breakpoint: breakpoint " + std::to_string(breakpoint_index) +
                        " is not interior");
  return kv.degree() - kv.multiplicity(bps[static_cast<std::size_t>(breakpoint_index)]);
}

}  // namespace rmiga
