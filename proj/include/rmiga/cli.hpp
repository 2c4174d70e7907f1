#pragma once

/**
 * @file cli.hpp
 * @brief Run configuration, refinement sweeps and CSV output for the rmiga tool.
 *
 * A configuration expands to rows in the order formulation, p, mesh. Rates are
 * pairwise against the previous mesh of the same (formulation, p) group.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmiga/assembly_solver.hpp"
#include "rmiga/errors.hpp"
#include "rmiga/experiment.hpp"
#include "rmiga/forms.hpp"
#include "rmiga/verification.hpp"

namespace rmiga::cli {

enum ExitCode : int { ok = 0, config_error = 2, solver_error = 3, check_failed = 4 };

struct RunConfig {
  std::vector<int> formulations{1, 2, 3, 4, 5, 6};
  std::vector<int> orders{2, 3, 4, 5};
  std::vector<int> meshes{5, 10, 20, 40};
  std::optional<int> k, k_flux;  ///< trial continuity; default p-1
  std::optional<int> q;          ///< test order; default p
  std::optional<int> l, l_flux;  ///< test continuity; default per formulation
  FluxSpace flux_space = FluxSpace::equal_order;
  GrammSpec gramm;
  double kappa = 1.0;
  std::array<double, 2> beta{1.0, 1.0};
  double gamma = 1.0;
  SolverPath solver = SolverPath::automatic;
  std::string out = "rmiga-out";
  bool dump_matrices = false;
  bool check = false;
  std::optional<int> replay;
};

/// One CSV row before it is solved.
struct RunRow {
  int formulation = 0;
  int p = 0, k = 0, q = 0, l = 0, n = 0;
  RunSpec spec;
};

struct RowResult {
  RunRow row;
  RunResult result;
  std::optional<double> rate_h1, rate_flux;
};

inline ManufacturedCase exact_solution(const RunConfig& c) {
  ProblemData data;
  data.kappa = c.kappa;
  data.beta = c.beta;
  data.gamma = c.gamma;
  return manufactured_case(std::move(data));
}

inline DiscretizationChoice choice_for(const RunConfig& c, int id, int p) {
  DiscretizationChoice ch = default_choice(id, p, c.flux_space);
  if (c.k) ch.trial_u.continuity = *c.k;
  const std::optional<int> kq = c.k_flux ? c.k_flux : c.k;
  if (kq) ch.trial_q.continuity = c.flux_space == FluxSpace::equal_order ? *kq : *kq - 1;
  if (c.q) ch.test_u.degree = ch.test_q.degree = *c.q;
  if (c.l) ch.test_u.continuity = *c.l;
  const std::optional<int> lq = c.l_flux ? c.l_flux : c.l;
  if (lq) ch.test_q.continuity = *lq;
  return ch;
}

/// Rows in output order; every row is validated before anything is solved.
inline std::vector<RunRow> expand(const RunConfig& c) {
  if (c.formulations.empty() || c.orders.empty() || c.meshes.empty())
    throw ConfigError("formulation, p and mesh lists must be non-empty");
  std::vector<RunRow> rows;
  for (int id : c.formulations) {
    if (id < 1 || id > 7) throw ConfigError("formulation id " + std::to_string(id) + " is not in 1..7");
    for (int p : c.orders) {
      if (p < 1) throw ConfigError("p must be positive");
      for (int n : c.meshes) {
        if (n < 1) throw ConfigError("mesh sizes must be positive");
        RunRow r;
        r.formulation = id;
        r.p = p;
        r.n = n;
        r.spec.formulation = id;
        r.spec.choice = choice_for(c, id, p);
        r.spec.n = n;
        r.spec.gramm = c.gramm;
        r.spec.path = c.solver;
        const FormulationSpec form = formulation(id);
        r.k = form.has_scalar() ? r.spec.choice.trial_u.continuity : r.spec.choice.trial_q.continuity;
        r.q = form.test_u.present ? r.spec.choice.test_u.degree : r.spec.choice.test_q.degree;
        r.l = form.test_u.present ? r.spec.choice.test_u.continuity : r.spec.choice.test_q.continuity;
        ProblemData data;
        data.kappa = c.kappa;
        data.beta = c.beta;
        data.gamma = c.gamma;
        make_discretization(id, r.spec.choice, n, data);
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline const char* csv_header() {
  return "formulation,p,k,q,l,n,h,dofs_trial,dofs_test,err_h1,err_flux,residual_gnorm,rate_h1,rate_flux";
}

inline std::string csv_row(const RowResult& r) {
  std::ostringstream s;
  s << r.row.formulation << ',' << r.row.p << ',' << r.row.k << ',' << r.row.q << ',' << r.row.l << ',' << r.row.n
    << ',' << format_double(r.result.h) << ',' << r.result.trial_dofs << ',' << r.result.test_dofs << ','
    << format_double(r.result.err_h1) << ',' << format_optional(r.result.err_flux) << ','
    << format_double(r.result.residual_gnorm) << ',' << format_optional(r.rate_h1) << ','
    << format_optional(r.rate_flux);
  return s.str();
}

namespace detail {

inline std::optional<double> rate(double e0, double h0, double e1, double h1) {
  if (!(e0 > 0.0) || !(e1 > 0.0) || h0 == h1) return std::nullopt;
  return std::log(e0 / e1) / std::log(h0 / h1);
}

inline void dump(const std::filesystem::path& dir, const RunRow& row, const SaddleSystem& sys) {
  const std::string tag =
      "f" + std::to_string(row.formulation) + "_p" + std::to_string(row.p) + "_n" + std::to_string(row.n);
  write_coordinate((dir / ("G_" + tag + ".txt")).string(), sys.G);
  write_coordinate((dir / ("B_" + tag + ".txt")).string(), sys.B);
  write_vector((dir / ("L_" + tag + ".txt")).string(), sys.L);
}

}  // namespace detail

/// Solves one row; the system is kept only when `keep` is given.
inline RowResult solve_row(const RunRow& row, const ManufacturedCase& exact, SaddleSystem* keep = nullptr) {
  RowResult out;
  out.row = row;
  try {
    out.result = run_case(row.spec, exact, keep);
  } catch (const SolverError& e) {
    throw SolverError("formulation " + std::to_string(row.formulation) + ", p=" + std::to_string(row.p) +
                      ", n=" + std::to_string(row.n) + ": " + e.what());
  }
  return out;
}

struct GroupSummary {
  int formulation = 0, p = 0;
  std::vector<double> h, err_h1, err_flux;
};

/// Finest-pair gates: H1 within p +- 0.15, flux (formulations 3-6) at least p + 0.85.
inline std::vector<std::string> check_rates(const std::vector<GroupSummary>& groups) {
  std::vector<std::string> failures;
  for (const auto& g : groups) {
    if (g.h.size() < 2) continue;
    const std::string tag = "formulation " + std::to_string(g.formulation) + " p=" + std::to_string(g.p);
    const double r1 = fit_rates(g.h, g.err_h1).finest();
    if (std::abs(r1 - g.p) > 0.15) failures.push_back(tag + ": H1 rate " + format_double(r1));
    if (g.formulation >= 3 && g.formulation <= 6 && g.err_flux.size() == g.h.size()) {
      const double rf = fit_rates(g.h, g.err_flux).finest();
      if (rf < g.p + 0.85) failures.push_back(tag + ": flux rate " + format_double(rf));
    }
  }
  return failures;
}

inline void print_summary(std::ostream& log, const std::vector<GroupSummary>& groups) {
  log << "formulation  p  rate_h1(finest)  slope_h1  rate_flux(finest)  slope_flux\n";
  for (const auto& g : groups) {
    char line[160];
    if (g.h.size() < 2) {
      std::snprintf(line, sizeof line, "%11d %2d  (single mesh)\n", g.formulation, g.p);
      log << line;
      continue;
    }
    const RateFit f1 = fit_rates(g.h, g.err_h1);
    std::string flux = "             -           -";
    if (g.err_flux.size() == g.h.size()) {
      const RateFit ff = fit_rates(g.h, g.err_flux);
      char b[64];
      std::snprintf(b, sizeof b, "%18.3f %11.3f", ff.finest(), ff.slope);
      flux = b;
    }
    std::snprintf(line, sizeof line, "%11d %2d %16.3f %9.3f %s\n", g.formulation, g.p, f1.finest(), f1.slope,
                  flux.c_str());
    log << line;
  }
}

/// Executes a validated configuration; CSV goes to `<out>/results.csv`.
inline int run(const RunConfig& config, std::ostream& log) {
  const std::vector<RunRow> rows = expand(config);
  const ManufacturedCase exact = exact_solution(config);

  if (config.replay) {
    const int idx = *config.replay;
    if (idx < 0 || idx >= static_cast<int>(rows.size()))
      throw ConfigError("replay row " + std::to_string(idx) + " out of range (0.." +
                        std::to_string(rows.size() - 1) + ")");
    const RowResult r = solve_row(rows[static_cast<std::size_t>(idx)], exact);
    log << csv_header() << '\n' << csv_row(r) << '\n';
    return ok;
  }

  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "results.csv", std::ios::binary);
  if (!csv) throw Error("cannot write " + (dir / "results.csv").string());
  csv << csv_header() << '\n';

  std::vector<GroupSummary> groups;
  const RowResult* prev = nullptr;
  RowResult last;
  for (const RunRow& row : rows) {
    SaddleSystem sys;
    RowResult r = solve_row(row, exact, config.dump_matrices ? &sys : nullptr);
    const bool same_group = prev && prev->row.formulation == row.formulation && prev->row.p == row.p;
    if (same_group) {
      r.rate_h1 = detail::rate(prev->result.err_h1, prev->result.h, r.result.err_h1, r.result.h);
      if (prev->result.err_flux && r.result.err_flux)
        r.rate_flux = detail::rate(*prev->result.err_flux, prev->result.h, *r.result.err_flux, r.result.h);
    } else {
      groups.push_back({row.formulation, row.p, {}, {}, {}});
    }
    auto& g = groups.back();
    g.h.push_back(r.result.h);
    g.err_h1.push_back(r.result.err_h1);
    if (r.result.err_flux) g.err_flux.push_back(*r.result.err_flux);
    if (config.dump_matrices) detail::dump(dir, row, sys);
    csv << csv_row(r) << '\n';
    csv.flush();
    last = std::move(r);
    prev = &last;
  }

  bool sorted = true;
  for (const auto& g : groups)
    for (std::size_t i = 1; i < g.h.size(); ++i) sorted = sorted && g.h[i] < g.h[i - 1];
  if (sorted) print_summary(log, groups);
  if (config.check) {
    if (!sorted) throw ConfigError("--check needs strictly refining mesh lists");
    const auto failures = check_rates(groups);
    for (const auto& f : failures) log << "CHECK FAIL " << f << '\n';
    if (!failures.empty()) return check_failed;
    log << "CHECK PASS\n";
  }
  return ok;
}

/// Result of command-line parsing: either a configuration or an exit request.
struct Parsed {
  RunConfig config;
  std::optional<int> exit_code;
  std::string message;
};

inline Parsed parse_config(int argc, const char* const* argv) {
  RunConfig c;
  CLI::App app{"Residual-minimization isogeometric solver for 2D advection-diffusion-reaction.\n"
               "Runs manufactured-solution refinement sweeps and writes a CSV table.",
               "rmiga"};
  app.set_config("--config", "", "key = value file; keys are the long option names")->check(CLI::ExistingFile);
  app.allow_config_extras(false);

  app.add_option("--formulation", c.formulations,
                 "Formulation ids: 1 primal trivial, 2 primal classical, 3 mixed trivial, "
                 "4 mixed classical I, 5 mixed classical II, 6 mixed ultraweak, 7 reduced flux")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--p", c.orders, "Trial polynomial orders")->delimiter(',')->capture_default_str();
  app.add_option("--mesh", c.meshes, "Elements per direction")->delimiter(',')->capture_default_str();
  app.add_option("--k", c.k, "Trial continuity (default p-1)");
  app.add_option("--k-flux", c.k_flux, "Trial flux continuity (default --k)");
  app.add_option("--q", c.q, "Test polynomial order (default p)");
  app.add_option("--l", c.l, "Test continuity (default -1 where broken tests are admitted, else 0)");
  app.add_option("--l-flux", c.l_flux, "Test flux continuity (default --l)");
  app.add_option("--flux-space", c.flux_space, "equal (p, k) or reduced (p-1, k-1) flux components")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, FluxSpace>{{"equal", FluxSpace::equal_order}, {"reduced", FluxSpace::reduced}}))
      ->default_str("equal");

  GrammSpec& g = c.gramm;
  app.add_option("--tau0", g.tau0, "Primal Gramm L2 weight")->capture_default_str();
  app.add_option("--tau1", g.tau1, "Primal Gramm gradient weight")->capture_default_str();
  app.add_option("--tau2", g.tau2, "Primal Gramm Laplacian weight")->capture_default_str();
  app.add_option("--tau3", g.tau3, "Mixed Gramm scalar L2 weight")->capture_default_str();
  app.add_option("--tau4", g.tau4, "Mixed Gramm scalar gradient weight")->capture_default_str();
  app.add_option("--tau5", g.tau5, "Mixed Gramm flux L2 weight")->capture_default_str();
  app.add_option("--tau6", g.tau6, "Mixed Gramm flux divergence weight")->capture_default_str();
  app.add_option("--iota1", g.iota1, "h exponent of the tau1 term")->capture_default_str();
  app.add_option("--iota2", g.iota2, "h exponent of the tau2 term")->capture_default_str();
  app.add_option("--iota3", g.iota3, "h exponent of the tau4 term")->capture_default_str();
  app.add_option("--iota4", g.iota4, "h exponent of the tau6 term")->capture_default_str();

  app.add_option("--kappa", c.kappa, "Diffusion coefficient")->capture_default_str();
  app.add_option("--beta", c.beta, "Advection velocity bx,by")->delimiter(',')->default_str("1,1");
  app.add_option("--gamma", c.gamma, "Reaction coefficient")->capture_default_str();

  app.add_option("--solver", c.solver, "auto (Schur when G is block-diagonal), full or schur")
      ->transform(CLI::CheckedTransformer(std::map<std::string, SolverPath>{
          {"auto", SolverPath::automatic}, {"full", SolverPath::full}, {"schur", SolverPath::schur}}))
      ->default_str("auto");
  app.add_option("--out", c.out, "Output directory for results.csv and matrix dumps")->capture_default_str();
  app.add_flag("--dump-matrices", c.dump_matrices, "Write G, B (row col value) and L per run");
  app.add_option("--replay", c.replay, "Re-solve one zero-based row and print it");
  app.add_flag("--check", c.check, "Gate finest-pair rates; exit 4 on failure");

  Parsed out;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out.exit_code = ok;
    out.message = app.help();
    return out;
  } catch (const CLI::ParseError& e) {
    out.exit_code = config_error;
    out.message = std::string(e.what()) + "\n" + app.help();
    return out;
  }
  out.config = std::move(c);
  return out;
}

inline Parsed parse_config(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"rmiga"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_config(static_cast<int>(argv.size()), argv.data());
}

/// Full tool entry point: parse, validate, run, map errors to exit codes.
inline int main(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  const Parsed parsed = parse_config(argc, argv);
  if (parsed.exit_code) {
    (*parsed.exit_code == ok ? log : err) << parsed.message;
    return *parsed.exit_code;
  }
  try {
    return run(parsed.config, log);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return config_error;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return solver_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return solver_error;
  }
}

}  // namespace rmiga::cli
