#pragma once

/**
 * @file experiment.hpp
 * @brief One manufactured-solution solve: discretize, assemble, solve, measure.
 */

#include <algorithm>
#include <optional>

#include <Eigen/Dense>

#include "rmiga/assembly_solver.hpp"
#include "rmiga/forms.hpp"
#include "rmiga/verification.hpp"

namespace rmiga {

struct RunSpec {
  int formulation = 1;
  DiscretizationChoice choice = default_choice(1, 2);
  int n = 5;
  GrammSpec gramm;
  SolverPath path = SolverPath::automatic;
  int quad_points = 0;   ///< <= 0: max(p, q) + 1
  int error_points = 0;  ///< <= 0: p + 2
};

struct RunResult {
  double h = 0.0;
  int trial_dofs = 0;
  int test_dofs = 0;
  double err_h1 = 0.0;
  std::optional<double> err_flux;
  double residual_gnorm = 0.0;
  double load_norm = 0.0;  ///< ||L||_2
  bool used_schur = false;
  MixedSolution solution;
  FieldCoefficients fields;
};

/// Flux error of a solved discretization; only formulations with a flux unknown have one.
inline double error_flux_l2(const Discretization& disc, const FieldCoefficients& fields, const ManufacturedCase& exact,
                            const QuadratureRule& rule) {
  if (!disc.trial_q) throw ContractError("formulation " + std::to_string(disc.form.id) + " has no flux unknown");
  return error_flux_l2(*disc.trial_q, fields.q, exact, rule);
}

inline double error_h1_seminorm(const Discretization& disc, const FieldCoefficients& fields,
                                const ManufacturedCase& exact, const QuadratureRule& rule) {
  if (disc.trial_u) return error_h1_seminorm(*disc.trial_u, fields.u, exact, rule);
  return error_h1_recovered(*disc.trial_q, fields.q, exact, rule);
}

inline RunResult run_case(const RunSpec& spec, const ManufacturedCase& exact, SaddleSystem* keep_system = nullptr) {
  const Discretization disc = make_discretization(spec.formulation, spec.choice, spec.n, exact.data, spec.quad_points);
  SaddleSystem sys = assemble(disc, spec.gramm);
  RunResult r;
  r.h = disc.mesh.h();
  r.trial_dofs = sys.trial_size();
  r.test_dofs = sys.test_size();
  r.load_norm = sys.L.norm();
  r.used_schur = spec.path == SolverPath::schur || (spec.path == SolverPath::automatic && sys.block_diagonal);
  r.solution = solve(sys, spec.path);
  r.residual_gnorm = r.solution.residual_norm;
  r.fields = extract_fields(disc, sys, r.solution);

  int p = 0;
  for (const auto* s : {disc.trial().u, disc.trial().q})
    if (s) p = std::max(p, s->degree());
  const QuadratureRule rule(disc.mesh, spec.error_points > 0 ? spec.error_points : p + 2);
  r.err_h1 = error_h1_seminorm(disc, r.fields, exact, rule);
  if (disc.trial_q) r.err_flux = error_flux_l2(disc, r.fields, exact, rule);
  if (keep_system) *keep_system = std::move(sys);
  return r;
}

}  // namespace rmiga
