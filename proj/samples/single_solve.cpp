// Solves the reference manufactured problem with one formulation on a sequence
// of meshes and prints errors and pairwise rates.
//
//   sample_single_solve [formulation] [p]

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "rmiga.hpp"

int main(int argc, char** argv) {
  const int id = argc > 1 ? std::atoi(argv[1]) : 3;
  const int p = argc > 2 ? std::atoi(argv[2]) : 2;
  const rmiga::ManufacturedCase exact = rmiga::manufactured_case();

  std::vector<double> h, e;
  for (int n : {5, 10, 20}) {
    rmiga::RunSpec spec;
    spec.formulation = id;
    spec.choice = rmiga::default_choice(id, p);
    spec.n = n;
    const rmiga::RunResult r = rmiga::run_case(spec, exact);
    std::printf("n=%2d  dofs %5d/%5d  |u-uh|_1 = %.3e  ||q-qh|| = %s  ||phi||_G = %.3e\n", n, r.trial_dofs,
                r.test_dofs, r.err_h1, r.err_flux ? std::to_string(*r.err_flux).c_str() : "-", r.residual_gnorm);
    h.push_back(r.h);
    e.push_back(r.err_h1);
  }
  const rmiga::RateFit fit = rmiga::fit_rates(h, e);
  std::printf("H1 rate (finest pair) %.3f, slope %.3f\n", fit.finest(), fit.slope);
}
