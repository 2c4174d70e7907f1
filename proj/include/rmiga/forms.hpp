#pragma once

/**
 * @file forms.hpp
 * @brief Element-level bilinear forms, linear forms and Gramm products.
 *
 * Seven residual-minimization formulations of the advection-diffusion-reaction
 * problem  -div(kappa grad u - beta u) + gamma u = f,  u = 0 on the boundary,
 * and its first-order form  q = kappa grad u - beta u,  -div q + gamma u = f.
 *
 *   id  name                         trial          test
 *   1   primal trivial               u              w
 *   2   primal classical             u              w
 *   3   mixed trivial                (u, q)         (w, p)
 *   4   mixed classical I            (u, q)         (w, p)
 *   5   mixed classical II           (u, q)         (w, p)
 *   6   mixed ultraweak              (u, q)         (w, p)
 *   7   reduced flux                 q              p
 *
 * Local matrices are laid out field by field: the scalar field first, then the
 * first and second components of the vector field. Coefficients are constant.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmiga/errors.hpp"
#include "rmiga/quadrature_mesh.hpp"
#include "rmiga/tensor_space.hpp"

namespace rmiga {

struct ProblemData {
  double kappa = 1.0;
  std::array<double, 2> beta{1.0, 1.0};
  double gamma = 1.0;
  std::function<double(double, double)> f = [](double, double) { return 0.0; };
};

enum class Structure { primal, mixed };

enum class DirichletRule {
  never,
  always,           ///< the field lives in H^1_0
  when_conforming,  ///< imposed strongly whenever the chosen space is C^0 or smoother
};

struct FieldRule {
  bool present = false;
  int min_continuity = -1;
  DirichletRule dirichlet = DirichletRule::never;
};

struct FormulationSpec {
  int id = 0;
  std::string name;
  Structure structure = Structure::primal;
  FieldRule trial_u, trial_q, test_u, test_q;
  bool needs_positive_reaction = false;

  [[nodiscard]] bool has_flux() const noexcept { return trial_q.present; }
  [[nodiscard]] bool has_scalar() const noexcept { return trial_u.present; }
};

inline FormulationSpec formulation(int id) {
  using D = DirichletRule;
  const FieldRule absent{};
  auto field = [](int min_k, D bc = D::never) { return FieldRule{true, min_k, bc}; };
  switch (id) {
    case 1:
      return {1, "primal trivial", Structure::primal, field(1, D::always), absent, field(-1), absent, false};
    case 2:
      return {2, "primal classical", Structure::primal, field(0, D::always), absent, field(0, D::always), absent,
              false};
    case 3:
      return {3, "mixed trivial", Structure::mixed, field(0, D::always), field(0), field(-1), field(-1), false};
    case 4:
      return {4, "mixed classical I", Structure::mixed, field(-1, D::when_conforming), field(0), field(-1), field(0),
              false};
    case 5:
      return {5, "mixed classical II", Structure::mixed, field(0, D::always), field(-1), field(0, D::always),
              field(-1), false};
    case 6:
      return {6, "mixed ultraweak", Structure::mixed, field(-1, D::when_conforming), field(-1), field(0, D::always),
              field(0), false};
    case 7:
      return {7, "reduced flux", Structure::primal, absent, field(0), absent, field(0), true};
    default:
      throw ConfigError("unknown formulation id " + std::to_string(id) + " (expected 1..7)");
  }
}

/// Free parameters of the residual-minimization inner product.
/// Primal:  tau0 (v,w) + tau1 h^iota1 (grad v, grad w) + tau2 h^iota2 (lap v, lap w)
/// Mixed:   tau3 (v,w) + tau4 h^iota3 (grad v, grad w) + tau5 (r,p) + tau6 h^iota4 (div r, div p)
/// The reduced-flux formulation uses the flux terms tau5, tau6, iota4.
struct GrammSpec {
  double tau0 = 1.0, tau1 = 1.0, tau2 = 0.0;
  double iota1 = 2.0, iota2 = 0.0;
  double tau3 = 1.0, tau4 = 1.0, tau5 = 1.0, tau6 = 1.0;
  double iota3 = 2.0, iota4 = 2.0;
};

/// Spaces of the fields of one side (trial or test). Absent fields are null.
struct FieldSpaces {
  const DiscreteSpace* u = nullptr;
  const DiscreteSpace* q = nullptr;
};

namespace detail {

inline void check_field(std::vector<std::string>& out, const char* side, const char* field, const FieldRule& rule,
                        const DiscreteSpace* space, bool vector_field) {
  const std::string label = std::string(side) + " " + field;
  if (!rule.present) {
    if (space) out.push_back(label + ": field is not part of this formulation");
    return;
  }
  if (!space) {
    out.push_back(label + ": missing space");
    return;
  }
  if (space->is_vector() != vector_field)
    out.push_back(label + (vector_field ? ": expected a vector space" : ": expected a scalar space"));
  if (space->continuity() < rule.min_continuity)
    out.push_back(label + ": continuity C^" + std::to_string(space->continuity()) + " below required C^" +
                  std::to_string(rule.min_continuity));
  const bool has_bc = space->boundary() == Boundary::homogeneous_dirichlet;
  const bool want_bc = rule.dirichlet == DirichletRule::always ||
                       (rule.dirichlet == DirichletRule::when_conforming && space->continuity() >= 0);
  if (has_bc != want_bc)
    out.push_back(label + (want_bc ? ": homogeneous Dirichlet conditions required"
                                   : ": space must not carry Dirichlet conditions"));
}

inline void check_dims(std::vector<std::string>& out, const char* field, const DiscreteSpace* trial,
                       const DiscreteSpace* test) {
  if (!trial || !test) return;
  if (!check_dimension_constraint(*trial, *test))
    out.push_back(std::string("field ") + field + ": test space has " + std::to_string(test->free_dof_count()) +
                  " free DOFs, fewer than the trial space's " + std::to_string(trial->free_dof_count()));
}

}  // namespace detail

/// Regularity, boundary-condition and dimension checks; empty result means admissible.
inline std::vector<std::string> validate_formulation(const FormulationSpec& form, const FieldSpaces& trial,
                                                     const FieldSpaces& test) {
  std::vector<std::string> out;
  detail::check_field(out, "trial", "u", form.trial_u, trial.u, false);
  detail::check_field(out, "trial", "q", form.trial_q, trial.q, true);
  detail::check_field(out, "test", "w", form.test_u, test.u, false);
  detail::check_field(out, "test", "p", form.test_q, test.q, true);
  if (form.id == 1 && trial.u && trial.u->degree() < 2)
    out.push_back("trial u: second derivatives need degree p >= 2");
  detail::check_dims(out, "u", trial.u, test.u);
  detail::check_dims(out, "q", trial.q, test.q);

  std::vector<const DiscreteSpace*> all;
  for (const auto* s : {trial.u, trial.q, test.u, test.q})
    if (s) all.push_back(s);
  const auto same_mesh = [&](const DiscreteSpace* s) {
    if (s->dim() != all.front()->dim()) return false;
    for (int d = 0; d < s->dim(); ++d)
      if (s->elements_along(d) != all.front()->elements_along(d)) return false;
    return true;
  };
  if (!std::all_of(all.begin(), all.end(), same_mesh)) out.push_back("all spaces must share one mesh");
  return out;
}

inline std::vector<std::string> validate_formulation(const FormulationSpec& form, const FieldSpaces& trial,
                                                     const FieldSpaces& test, const ProblemData& data) {
  auto out = validate_formulation(form, trial, test);
  if (!(data.kappa > 0.0)) out.push_back("diffusion kappa must be positive");
  if (!(data.gamma >= 0.0)) out.push_back("reaction gamma must be nonnegative");
  if (form.needs_positive_reaction && !(data.gamma > 0.0))
    out.push_back("formulation " + std::to_string(form.id) + " divides by gamma: gamma must be positive");
  return out;
}

/// Element tables of the fields on one side; a vector field uses one scalar
/// table for both components.
struct ElementFields {
  const ElementTable* u = nullptr;
  const ElementTable* q = nullptr;

  [[nodiscard]] int u_count() const { return u ? u->local_count() : 0; }
  [[nodiscard]] int q_count() const { return q ? q->local_count() : 0; }
  [[nodiscard]] int size() const { return u_count() + 2 * q_count(); }
};

namespace detail {

/// A^T diag(w) B
inline Eigen::MatrixXd weighted(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, const Eigen::MatrixXd& b) {
  return a.transpose() * (w.asDiagonal() * b);
}

}  // namespace detail

/// Local matrix (test-local x trial-local) of the chosen bilinear form.
inline Eigen::MatrixXd element_b(const FormulationSpec& form, const ProblemData& data, const ElementFields& trial,
                                 const ElementFields& test, const Eigen::VectorXd& w) {
  using detail::weighted;
  const double k = data.kappa, g = data.gamma, bx = data.beta[0], by = data.beta[1];
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(test.size(), trial.size());

  if (form.id == 1 || form.id == 2) {
    const auto& W = *test.u;
    const auto& T = *trial.u;
    if (form.id == 1) {
      // (w, -kappa lap u + beta . grad u + gamma u)
      const Eigen::MatrixXd strong = -k * (T.dxx + T.dyy) + bx * T.dx + by * T.dy + g * T.val;
      out = weighted(W.val, w, strong);
    } else {
      // (grad w, kappa grad u - beta u) + (w, gamma u)
      out = weighted(W.dx, w, k * T.dx - bx * T.val) + weighted(W.dy, w, k * T.dy - by * T.val) +
            g * weighted(W.val, w, T.val);
    }
    return out;
  }

  if (form.id == 7) {
    // (p, q) + (div(kappa p), gamma^-1 div q) + (p, beta gamma^-1 div q)
    const auto& P = *test.q;
    const auto& Q = *trial.q;
    const int np = P.local_count(), nq = Q.local_count();
    const Eigen::MatrixXd mass = weighted(P.val, w, Q.val);
    const double kg = k / g;
    out.block(0, 0, np, nq) = mass + kg * weighted(P.dx, w, Q.dx) + (bx / g) * weighted(P.val, w, Q.dx);
    out.block(0, nq, np, nq) = kg * weighted(P.dx, w, Q.dy) + (bx / g) * weighted(P.val, w, Q.dy);
    out.block(np, 0, np, nq) = kg * weighted(P.dy, w, Q.dx) + (by / g) * weighted(P.val, w, Q.dx);
    out.block(np, nq, np, nq) = mass + kg * weighted(P.dy, w, Q.dy) + (by / g) * weighted(P.val, w, Q.dy);
    return out;
  }

  const auto& W = *test.u;
  const auto& P = *test.q;
  const auto& T = *trial.u;
  const auto& Q = *trial.q;
  const int nw = W.local_count(), np = P.local_count(), nu = T.local_count(), nq = Q.local_count();
  const int p0 = nw, p1 = nw + np, q0 = nu, q1 = nu + nq;

  // w rows
  out.block(0, 0, nw, nu) = g * weighted(W.val, w, T.val);
  if (form.id == 3 || form.id == 4) {
    // (w, -div q)
    out.block(0, q0, nw, nq) = -weighted(W.val, w, Q.dx);
    out.block(0, q1, nw, nq) = -weighted(W.val, w, Q.dy);
  } else {
    // (grad w, q)
    out.block(0, q0, nw, nq) = weighted(W.dx, w, Q.val);
    out.block(0, q1, nw, nq) = weighted(W.dy, w, Q.val);
  }

  // p rows
  const Eigen::MatrixXd mass = weighted(P.val, w, Q.val);
  out.block(p0, q0, np, nq) = mass;
  out.block(p1, q1, np, nq) = mass;
  if (form.id == 3 || form.id == 5) {
    // (p, -kappa grad u + beta u)
    out.block(p0, 0, np, nu) = weighted(P.val, w, -k * T.dx + bx * T.val);
    out.block(p1, 0, np, nu) = weighted(P.val, w, -k * T.dy + by * T.val);
  } else {
    // (p, beta u) + (div(kappa p), u)
    out.block(p0, 0, np, nu) = weighted(bx * P.val + k * P.dx, w, T.val);
    out.block(p1, 0, np, nu) = weighted(by * P.val + k * P.dy, w, T.val);
  }
  return out;
}

/// Local load vector; `f` holds the forcing at the element's quadrature points.
inline Eigen::VectorXd element_l(const FormulationSpec& form, const ProblemData& data, const ElementFields& test,
                                 const Eigen::VectorXd& w, const Eigen::VectorXd& f) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(test.size());
  const Eigen::VectorXd wf = w.cwiseProduct(f);
  if (form.id == 7) {
    if (!(data.gamma > 0.0)) throw ConfigError("reduced flux formulation needs gamma > 0");
    // -(div(kappa p), gamma^-1 f) - (p, beta gamma^-1 f)
    const auto& P = *test.q;
    const int np = P.local_count();
    const double kg = data.kappa / data.gamma;
    out.segment(0, np) = -(kg * P.dx + (data.beta[0] / data.gamma) * P.val).transpose() * wf;
    out.segment(np, np) = -(kg * P.dy + (data.beta[1] / data.gamma) * P.val).transpose() * wf;
    return out;
  }
  out.head(test.u_count()) = test.u->val.transpose() * wf;
  return out;
}

/// Local Gramm matrix on the test fields of an element of size h.
inline Eigen::MatrixXd element_g(Structure structure, const GrammSpec& gs, double h, const ElementFields& test,
                                 const Eigen::VectorXd& w) {
  using detail::weighted;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(test.size(), test.size());
  if (test.u) {
    const auto& W = *test.u;
    const int n = W.local_count();
    const bool primal = structure == Structure::primal;
    const double t_mass = primal ? gs.tau0 : gs.tau3;
    const double t_grad = (primal ? gs.tau1 : gs.tau4) * std::pow(h, primal ? gs.iota1 : gs.iota3);
    auto block = out.block(0, 0, n, n);
    if (t_mass != 0.0) block += t_mass * weighted(W.val, w, W.val);
    if (t_grad != 0.0) block += t_grad * (weighted(W.dx, w, W.dx) + weighted(W.dy, w, W.dy));
    if (primal && gs.tau2 != 0.0) {
      const Eigen::MatrixXd lap = W.dxx + W.dyy;
      block += gs.tau2 * std::pow(h, gs.iota2) * weighted(lap, w, lap);
    }
  }
  if (test.q) {
    const auto& P = *test.q;
    const int n = P.local_count();
    const int o = test.u_count();
    const double t_div = gs.tau6 * std::pow(h, gs.iota4);
    if (gs.tau5 != 0.0) {
      const Eigen::MatrixXd mass = gs.tau5 * weighted(P.val, w, P.val);
      out.block(o, o, n, n) += mass;
      out.block(o + n, o + n, n, n) += mass;
    }
    if (t_div != 0.0) {
      out.block(o, o, n, n) += t_div * weighted(P.dx, w, P.dx);
      out.block(o, o + n, n, n) += t_div * weighted(P.dx, w, P.dy);
      out.block(o + n, o, n, n) += t_div * weighted(P.dy, w, P.dx);
      out.block(o + n, o + n, n, n) += t_div * weighted(P.dy, w, P.dy);
    }
  }
  // exact symmetry; the products above agree only up to rounding
  return (0.5 * (out + out.transpose())).eval();
}

}  // namespace rmiga
