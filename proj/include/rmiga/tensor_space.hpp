#pragma once

/**
 * @file tensor_space.hpp
 * @brief Scalar and vector-valued tensor-product B-spline spaces.
 *
 * Scalar DOFs are numbered lexicographically with x fastest, then y, then z.
 * Vector spaces repeat the scalar space per component and number DOFs
 * component-major: global = component * scalar_dof_count + scalar index.
 */

#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rmiga/bspline.hpp"
#include "rmiga/errors.hpp"

namespace rmiga {

enum class Boundary { none, homogeneous_dirichlet };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Element-to-global DOF lists, element-major. Element e = ex + nx*(ey + ny*ez);
/// within an element, component-major, then local tensor index with x fastest.
struct DofMap {
  int element_count = 0;
  int local_count = 0;  ///< per element, all components
  std::vector<int> indices;

  [[nodiscard]] std::span<const int> element(int e) const {
    return {indices.data() + static_cast<std::size_t>(e) * static_cast<std::size_t>(local_count),
            static_cast<std::size_t>(local_count)};
  }
};

class DiscreteSpace {
 public:
  DiscreteSpace(std::span<const int> n_elements, int degree, int continuity, int components,
                Boundary boundary, std::span<const Interval> domain)
      : degree_(degree), continuity_(continuity), components_(components), boundary_(boundary) {
    const auto dim = n_elements.size();
    if (dim < 1 || dim > 3) throw ConfigError("discrete space: dimension must be 1, 2 or 3");
    if (components < 1) throw ConfigError("discrete space: need at least one component");
    if (!domain.empty() && domain.size() != dim)
      throw ConfigError("discrete space: domain dimension mismatch");
    if (boundary == Boundary::homogeneous_dirichlet && continuity < 0)
      throw ConfigError("discrete space: Dirichlet conditions need continuity k >= 0 (C^-1 spaces are L2)");
    for (std::size_t d = 0; d < dim; ++d) {
      const Interval iv = domain.empty() ? Interval{} : domain[d];
      knots_.push_back(make_open_knot_vector(n_elements[d], degree, continuity, iv.lo, iv.hi));
      elements_.push_back(n_elements[d]);
      std::vector<int> first;
      const auto bps = knots_.back().breakpoints();
      for (int e = 0; e < n_elements[d]; ++e) {
        const double mid = 0.5 * (bps[static_cast<std::size_t>(e)] + bps[static_cast<std::size_t>(e + 1)]);
        first.push_back(knots_.back().find_span(mid) - degree);
      }
      first_basis_.push_back(std::move(first));
    }
    scalar_dofs_ = 1;
    for (const auto& kv : knots_) scalar_dofs_ *= kv.num_basis();

    mask_.assign(static_cast<std::size_t>(dof_count()), false);
    if (boundary == Boundary::homogeneous_dirichlet) {
      for (int c = 0; c < components_; ++c)
        for (int s = 0; s < scalar_dofs_; ++s) {
          const auto idx = tensor_index(s);
          bool on_boundary = false;
          for (std::size_t d = 0; d < dim; ++d)
            on_boundary = on_boundary || idx[d] == 0 || idx[d] == knots_[d].num_basis() - 1;
          mask_[static_cast<std::size_t>(c * scalar_dofs_ + s)] = on_boundary;
        }
    }
    free_index_.assign(mask_.size(), -1);
    for (std::size_t i = 0; i < mask_.size(); ++i) {
      if (mask_[i]) continue;
      free_index_[i] = static_cast<int>(free_to_global_.size());
      free_to_global_.push_back(static_cast<int>(i));
    }
  }

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(knots_.size()); }
  [[nodiscard]] int components() const noexcept { return components_; }
  [[nodiscard]] bool is_vector() const noexcept { return components_ > 1; }
  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] int continuity() const noexcept { return continuity_; }
  [[nodiscard]] bool is_broken() const noexcept { return continuity_ < 0; }
  [[nodiscard]] Boundary boundary() const noexcept { return boundary_; }
  [[nodiscard]] const KnotVector& knots(int d) const { return knots_[static_cast<std::size_t>(d)]; }
  [[nodiscard]] int basis_count(int d) const { return knots(d).num_basis(); }
  [[nodiscard]] int elements_along(int d) const { return elements_[static_cast<std::size_t>(d)]; }
  [[nodiscard]] int element_count() const {
    return std::accumulate(elements_.begin(), elements_.end(), 1, std::multiplies<>());
  }
  /// Index of the first basis function that is nonzero on element e along direction d.
  [[nodiscard]] int first_basis(int d, int e) const {
    return first_basis_[static_cast<std::size_t>(d)][static_cast<std::size_t>(e)];
  }

  [[nodiscard]] int scalar_dof_count() const noexcept { return scalar_dofs_; }
  [[nodiscard]] int dof_count() const noexcept { return scalar_dofs_ * components_; }
  [[nodiscard]] int free_dof_count() const noexcept { return static_cast<int>(free_to_global_.size()); }
  /// true = constrained to zero.
  [[nodiscard]] const std::vector<bool>& dirichlet_mask() const noexcept { return mask_; }
  /// Global DOF -> free index, or -1 for constrained DOFs.
  [[nodiscard]] std::span<const int> free_index() const noexcept { return free_index_; }
  [[nodiscard]] std::span<const int> free_to_global() const noexcept { return free_to_global_; }

  /// Per-direction basis indices of a scalar DOF.
  [[nodiscard]] std::vector<int> tensor_index(int scalar_dof) const {
    std::vector<int> idx(knots_.size());
    for (std::size_t d = 0; d < knots_.size(); ++d) {
      idx[d] = scalar_dof % knots_[d].num_basis();
      scalar_dof /= knots_[d].num_basis();
    }
    return idx;
  }

  [[nodiscard]] DofMap dof_map() const {
    DofMap map;
    const int per_dir = degree_ + 1;
    int local_scalar = 1;
    for (int d = 0; d < dim(); ++d) local_scalar *= per_dir;
    map.element_count = element_count();
    map.local_count = local_scalar * components_;
    map.indices.reserve(static_cast<std::size_t>(map.element_count) * static_cast<std::size_t>(map.local_count));
    for (int e = 0; e < map.element_count; ++e) {
      int rest = e;
      std::vector<int> first(knots_.size());
      for (std::size_t d = 0; d < knots_.size(); ++d) {
        first[d] = first_basis(static_cast<int>(d), rest % elements_[d]);
        rest /= elements_[d];
      }
      for (int c = 0; c < components_; ++c)
        for (int a = 0; a < local_scalar; ++a) {
          int local = a, global = 0, stride = 1;
          for (std::size_t d = 0; d < knots_.size(); ++d) {
            global += (first[d] + local % per_dir) * stride;
            local /= per_dir;
            stride *= knots_[d].num_basis();
          }
          map.indices.push_back(c * scalar_dofs_ + global);
        }
    }
    return map;
  }

 private:
  std::vector<KnotVector> knots_;
  std::vector<int> elements_;
  std::vector<std::vector<int>> first_basis_;
  int degree_;
  int continuity_;
  int components_;
  Boundary boundary_;
  int scalar_dofs_ = 0;
  std::vector<bool> mask_;
  std::vector<int> free_index_;
  std::vector<int> free_to_global_;
};

inline DiscreteSpace make_scalar_space(std::span<const int> n_elements, int degree, int continuity,
                                       Boundary boundary, std::span<const Interval> domain = {}) {
  return {n_elements, degree, continuity, 1, boundary, domain};
}

/// Equal-order vector space with one component per spatial dimension.
inline DiscreteSpace make_vector_space(std::span<const int> n_elements, int degree, int continuity,
                                       std::span<const Interval> domain = {}) {
  return {n_elements, degree, continuity, static_cast<int>(n_elements.size()), Boundary::none, domain};
}

/// Convenience overloads for square 2D meshes on the unit square.
inline DiscreteSpace make_scalar_space(int n, int degree, int continuity, Boundary boundary) {
  const int ns[2] = {n, n};
  return make_scalar_space(ns, degree, continuity, boundary);
}
inline DiscreteSpace make_vector_space(int n, int degree, int continuity) {
  const int ns[2] = {n, n};
  return make_vector_space(ns, degree, continuity);
}

/// The test space must carry at least as many free DOFs as the trial space.
inline bool check_dimension_constraint(const DiscreteSpace& trial, const DiscreteSpace& test) {
  return test.free_dof_count() >= trial.free_dof_count();
}

}  // namespace rmiga
