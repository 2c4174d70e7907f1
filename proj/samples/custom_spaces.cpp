// Builds a discretization by hand: trivial primal formulation, C^2 cubic trial
// space, broken quadratic test space, L2 Gramm product. Assembles the saddle
// system, solves it both ways and reports the residual representative.

#include <cstdio>

#include "rmiga.hpp"

int main() {
  using namespace rmiga;
  const ManufacturedCase exact = manufactured_case();

  DiscretizationChoice choice;
  choice.trial_u = {3, 2};
  choice.test_u = {2, -1};
  const Discretization disc = make_discretization(1, choice, 8, exact.data);

  GrammSpec gramm;
  gramm.tau1 = 0.0;
  gramm.tau2 = 0.0;
  const SaddleSystem sys = assemble(disc, gramm);
  std::printf("G %dx%d (block-diagonal: %s), B %dx%d\n", sys.test_size(), sys.test_size(),
              sys.block_diagonal ? "yes" : "no", sys.test_size(), sys.trial_size());

  const MixedSolution full = solve_full(sys);
  const MixedSolution schur = solve_schur(sys);
  std::printf("||U_full - U_schur|| / ||U_full|| = %.2e\n", (full.U - schur.U).norm() / full.U.norm());
  std::printf("||Phi||_G = %.6e\n", schur.residual_norm);

  const FieldCoefficients fields = extract_fields(disc, sys, schur);
  const QuadratureRule rule(disc.mesh, 5);
  std::printf("|u - u_h|_1 = %.6e\n", error_h1_seminorm(*disc.trial_u, fields.u, exact, rule));
}
