#pragma once

/**
 * @file assembly_solver.hpp
 * @brief Global saddle-point system  [G B; B^T 0][Phi; U] = [L; 0]  and its solvers.
 *
 * G is the Gramm matrix on the test space, B the bilinear form (test x trial)
 * and L the load. Homogeneous Dirichlet DOFs are eliminated before assembly, so
 * every index in a SaddleSystem is a free index. Unknowns are blocked by field:
 * trial = [u, q], test = [w, p], each vector field component-major.
 */

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseQR>

#include "rmiga/errors.hpp"
#include "rmiga/forms.hpp"
#include "rmiga/quadrature_mesh.hpp"
#include "rmiga/tensor_space.hpp"

namespace rmiga {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SpaceChoice {
  int degree = 2;
  int continuity = 1;
};

/// Orders and continuities of every field; fields a formulation lacks are ignored.
struct DiscretizationChoice {
  SpaceChoice trial_u, trial_q, test_u, test_q;
};

enum class FluxSpace {
  equal_order,  ///< flux components share the solution's (p, k)
  reduced,      ///< flux components use (p-1, k-1)
};

/// Highly continuous trial spaces (k = p-1) and test order q = p; test fields
/// are broken where the formulation admits L2 test functions and C^0 otherwise.
inline DiscretizationChoice default_choice(int id, int p, FluxSpace flux = FluxSpace::equal_order) {
  const FormulationSpec form = formulation(id);
  DiscretizationChoice c;
  c.trial_u = {p, p - 1};
  c.trial_q = flux == FluxSpace::equal_order ? SpaceChoice{p, p - 1} : SpaceChoice{p - 1, p - 2};
  c.test_u = {p, form.test_u.min_continuity >= 0 ? 0 : -1};
  c.test_q = {p, form.test_q.min_continuity >= 0 ? 0 : -1};
  return c;
}

/// A formulation together with its mesh, spaces, data and quadrature order.
struct Discretization {
  FormulationSpec form;
  ProblemData data;
  Mesh mesh;
  std::optional<DiscreteSpace> trial_u, trial_q, test_u, test_q;
  int quad_points = 0;

  [[nodiscard]] FieldSpaces trial() const {
    return {trial_u ? &*trial_u : nullptr, trial_q ? &*trial_q : nullptr};
  }
  [[nodiscard]] FieldSpaces test() const { return {test_u ? &*test_u : nullptr, test_q ? &*test_q : nullptr}; }
  [[nodiscard]] int trial_free_count() const {
    return (trial_u ? trial_u->free_dof_count() : 0) + (trial_q ? trial_q->free_dof_count() : 0);
  }
  [[nodiscard]] int test_free_count() const {
    return (test_u ? test_u->free_dof_count() : 0) + (test_q ? test_q->free_dof_count() : 0);
  }
  [[nodiscard]] int max_degree() const {
    int p = 0;
    for (const auto* s : {trial().u, trial().q, test().u, test().q})
      if (s) p = std::max(p, s->degree());
    return p;
  }
};

namespace detail {

inline Boundary boundary_for(const FieldRule& rule, int continuity) {
  const bool bc = rule.dirichlet == DirichletRule::always ||
                  (rule.dirichlet == DirichletRule::when_conforming && continuity >= 0);
  return bc && continuity >= 0 ? Boundary::homogeneous_dirichlet : Boundary::none;
}

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

}  // namespace detail

/// Builds and validates the spaces of formulation `id` on an n x n unit-square
/// mesh. quad_points <= 0 selects max(trial p, test q) + 1 points per direction.
inline Discretization make_discretization(int id, const DiscretizationChoice& choice, int n, ProblemData data,
                                          int quad_points = 0) {
  const FormulationSpec form = formulation(id);
  const int ns[2] = {n, n};
  auto scalar = [&](const FieldRule& rule, SpaceChoice c) -> std::optional<DiscreteSpace> {
    if (!rule.present) return std::nullopt;
    return make_scalar_space(ns, c.degree, c.continuity, detail::boundary_for(rule, c.continuity));
  };
  auto vector = [&](const FieldRule& rule, SpaceChoice c) -> std::optional<DiscreteSpace> {
    if (!rule.present) return std::nullopt;
    return make_vector_space(ns, c.degree, c.continuity);
  };
  Discretization d{form, std::move(data), build_mesh(n), std::nullopt, std::nullopt, std::nullopt, std::nullopt, 0};
  try {
    d.trial_u = scalar(form.trial_u, choice.trial_u);
    d.trial_q = vector(form.trial_q, choice.trial_q);
    d.test_u = scalar(form.test_u, choice.test_u);
    d.test_q = vector(form.test_q, choice.test_q);
  } catch (const ConfigError& e) {
    throw ConfigError("formulation " + std::to_string(id) + ": " + e.what());
  }
  const auto violations = validate_formulation(form, d.trial(), d.test(), d.data);
  if (!violations.empty())
    throw ConfigError("formulation " + std::to_string(id) + ": " + detail::join(violations));
  d.quad_points = quad_points > 0 ? quad_points : d.max_degree() + 1;
  return d;
}

struct FieldBlock {
  int offset = 0;
  int size = 0;
};

struct SaddleSystem {
  SparseMatrix G;  ///< test x test, symmetric
  SparseMatrix B;  ///< test x trial
  Eigen::VectorXd L;
  /// Set iff every test field is broken; test_blocks then lists each element's test indices.
  bool block_diagonal = false;
  std::vector<std::vector<int>> test_blocks;
  FieldBlock trial_u, trial_q, test_u, test_q;

  [[nodiscard]] int trial_size() const { return static_cast<int>(B.cols()); }
  [[nodiscard]] int test_size() const { return static_cast<int>(G.rows()); }
};

struct MixedSolution {
  Eigen::VectorXd U;    ///< trial coefficients (free DOFs)
  Eigen::VectorXd Phi;  ///< Riesz representative of the residual (test free DOFs)
  double residual_norm = 0.0;  ///< sqrt(Phi^T G Phi)
  bool trivial = false;        ///< no trial unknowns
};

namespace detail {

/// Triplet accumulator that compresses in fixed-size chunks; duplicates are
/// summed in insertion order, so results do not depend on anything but the
/// element order.
class ChunkedAssembler {
 public:
  ChunkedAssembler(int rows, int cols) : acc_(rows, cols) {}

  void add(int r, int c, double v) {
    if (v == 0.0) return;
    triplets_.emplace_back(r, c, v);
    if (triplets_.size() >= kChunk) flush();
  }

  SparseMatrix finish() {
    flush();
    acc_.makeCompressed();
    return std::move(acc_);
  }

 private:
  static constexpr std::size_t kChunk = 1u << 22;

  void flush() {
    if (triplets_.empty()) return;
    SparseMatrix part(acc_.rows(), acc_.cols());
    part.setFromTriplets(triplets_.begin(), triplets_.end());
    acc_ = acc_.nonZeros() == 0 ? part : SparseMatrix(acc_ + part);
    triplets_.clear();
  }

  SparseMatrix acc_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

/// Free (block-offset) index of every local function of a field, -1 if constrained.
inline void local_map(std::vector<int>& out, const DiscreteSpace* space, const ElementTable* table, int offset) {
  if (!space) return;
  const auto free = space->free_index();
  for (int c = 0; c < space->components(); ++c)
    for (int dof : table->dofs) {
      const int f = free[static_cast<std::size_t>(c * space->scalar_dof_count() + dof)];
      out.push_back(f < 0 ? -1 : f + offset);
    }
}

}  // namespace detail

/// Scatter-adds element Gramm, bilinear and load contributions in element order.
inline SaddleSystem assemble(const Discretization& disc, const GrammSpec& gramm) {
  const auto violations = validate_formulation(disc.form, disc.trial(), disc.test(), disc.data);
  if (!violations.empty()) throw ConfigError(detail::join(violations));

  SaddleSystem sys;
  const int ntu = disc.trial_u ? disc.trial_u->free_dof_count() : 0;
  const int ntq = disc.trial_q ? disc.trial_q->free_dof_count() : 0;
  const int nwu = disc.test_u ? disc.test_u->free_dof_count() : 0;
  const int nwq = disc.test_q ? disc.test_q->free_dof_count() : 0;
  sys.trial_u = {0, ntu};
  sys.trial_q = {ntu, ntq};
  sys.test_u = {0, nwu};
  sys.test_q = {nwu, nwq};
  const int n_trial = ntu + ntq, n_test = nwu + nwq;

  const QuadratureRule rule(disc.mesh, disc.quad_points);
  auto cache = [&](const std::optional<DiscreteSpace>& s) -> std::optional<EvalCache> {
    if (!s) return std::nullopt;
    return EvalCache(*s, rule, 2);
  };
  const auto c_tu = cache(disc.trial_u), c_tq = cache(disc.trial_q), c_wu = cache(disc.test_u),
             c_wq = cache(disc.test_q);

  sys.block_diagonal = (!disc.test_u || disc.test_u->is_broken()) && (!disc.test_q || disc.test_q->is_broken());

  detail::ChunkedAssembler G(n_test, n_test), B(n_test, n_trial);
  sys.L = Eigen::VectorXd::Zero(n_test);
  ElementTable t_tu, t_tq, t_wu, t_wq;
  std::vector<int> row_map, col_map;
  const int n_elem = disc.mesh.element_count();
  if (sys.block_diagonal) sys.test_blocks.resize(static_cast<std::size_t>(n_elem));

  for (int e = 0; e < n_elem; ++e) {
    if (c_tu) c_tu->fill(e, t_tu);
    if (c_tq) c_tq->fill(e, t_tq);
    if (c_wu) c_wu->fill(e, t_wu);
    if (c_wq) c_wq->fill(e, t_wq);
    const ElementFields trial{c_tu ? &t_tu : nullptr, c_tq ? &t_tq : nullptr};
    const ElementFields test{c_wu ? &t_wu : nullptr, c_wq ? &t_wq : nullptr};

    const Eigen::VectorXd w = rule.weights(e);
    const Eigen::MatrixXd x = rule.points(e);
    Eigen::VectorXd f(x.rows());
    for (int i = 0; i < x.rows(); ++i) f[i] = disc.data.f(x(i, 0), x(i, 1));

    const Eigen::MatrixXd Ge = element_g(disc.form.structure, gramm, disc.mesh.element_size(e), test, w);
    const Eigen::MatrixXd Be = element_b(disc.form, disc.data, trial, test, w);
    const Eigen::VectorXd Le = element_l(disc.form, disc.data, test, w, f);

    row_map.clear();
    col_map.clear();
    detail::local_map(row_map, disc.test().u, test.u, sys.test_u.offset);
    detail::local_map(row_map, disc.test().q, test.q, sys.test_q.offset);
    detail::local_map(col_map, disc.trial().u, trial.u, sys.trial_u.offset);
    detail::local_map(col_map, disc.trial().q, trial.q, sys.trial_q.offset);

    for (int i = 0; i < static_cast<int>(row_map.size()); ++i) {
      const int r = row_map[static_cast<std::size_t>(i)];
      if (r < 0) continue;
      sys.L[r] += Le[i];
      for (int j = 0; j < static_cast<int>(row_map.size()); ++j) {
        const int c = row_map[static_cast<std::size_t>(j)];
        if (c >= 0) G.add(r, c, Ge(i, j));
      }
      for (int j = 0; j < static_cast<int>(col_map.size()); ++j) {
        const int c = col_map[static_cast<std::size_t>(j)];
        if (c >= 0) B.add(r, c, Be(i, j));
      }
      if (sys.block_diagonal) sys.test_blocks[static_cast<std::size_t>(e)].push_back(r);
    }
  }
  sys.G = G.finish();
  sys.B = B.finish();
  return sys;
}

namespace detail {

inline double g_norm(const SparseMatrix& G, const Eigen::VectorXd& phi) {
  if (phi.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, phi.dot(G * phi)));
}

inline void check_gramm(const SparseMatrix& G) {
  if (G.rows() == 0) return;
  Eigen::SimplicialLLT<SparseMatrix> llt(G);
  if (llt.info() != Eigen::Success)
    throw GrammError("Gramm matrix is not positive definite for the chosen tau/iota parameters");
}

/// Names the trial field blocks of B whose columns are rank deficient.
inline std::string rank_diagnostic(const SaddleSystem& sys) {
  std::ostringstream out;
  const std::pair<const char*, FieldBlock> fields[] = {{"u", sys.trial_u}, {"q", sys.trial_q}};
  bool found = false;
  for (const auto& [name, block] : fields) {
    if (block.size == 0) continue;
    SparseMatrix cols = sys.B.middleCols(block.offset, block.size);
    cols.makeCompressed();
    Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr(cols);
    if (qr.info() == Eigen::Success && qr.rank() < block.size) {
      out << " B block of trial field " << name << " has rank " << qr.rank() << " < " << block.size << ";";
      found = true;
    }
  }
  if (!found) out << " no single trial field block of B is rank deficient (coupled deficiency);";
  return out.str();
}

/// Inverse iteration for the smallest eigenvalue of B^T G^-1 B + delta I, read
/// off the trial block of the factored quasi-definite matrix.
template <class Factor>
double schur_min_eigenvalue(const Factor& factor, int nt, int nu) {
  std::mt19937 rng(12345u);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::VectorXd v(nu);
  for (int i = 0; i < nu; ++i) v[i] = uniform(rng);
  v.normalize();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nt + nu);
  double lambda = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30; ++it) {
    rhs.tail(nu) = v;
    const Eigen::VectorXd w = -factor.solve(rhs).tail(nu);
    const double next = 1.0 / v.dot(w);
    v = w.normalized();
    const bool done = std::abs(next - lambda) <= 1e-3 * std::abs(next);
    lambda = next;
    if (done) break;
  }
  return lambda;
}

}  // namespace detail

/// Direct factorization of the full block system. K = [G B; B^T 0] is
/// factored as the quasi-definite [G B; B^T -delta I], which admits LDL^T under
/// any symmetric ordering; refinement against the unperturbed K removes delta.
inline MixedSolution solve_full(const SaddleSystem& sys, bool check_gramm = true) {
  const int nt = sys.test_size(), nu = sys.trial_size();
  MixedSolution sol;
  if (check_gramm) detail::check_gramm(sys.G);
  if (nu == 0) {
    sol.trivial = true;
    sol.U = Eigen::VectorXd::Zero(0);
    if (nt == 0) {
      sol.Phi = Eigen::VectorXd::Zero(0);
      return sol;
    }
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(sys.G);
    sol.Phi = ldlt.solve(sys.L);
    sol.residual_norm = detail::g_norm(sys.G, sol.Phi);
    return sol;
  }

  const double delta = 1e-6 * std::max(sys.G.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(sys.G.nonZeros() + 2 * sys.B.nonZeros() + nu));
  for (int k = 0; k < sys.G.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.G, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < sys.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.B, k); it; ++it) {
      trip.emplace_back(it.row(), nt + it.col(), it.value());
      trip.emplace_back(nt + it.col(), it.row(), it.value());
    }
  for (int i = 0; i < nu; ++i) trip.emplace_back(nt + i, nt + i, -delta);
  SparseMatrix Kd(nt + nu, nt + nu);
  Kd.setFromTriplets(trip.begin(), trip.end());
  trip = {};
  const auto apply_K = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = Kd * x;
    y.tail(nu) += delta * x.tail(nu);
    return y;
  };

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(Kd);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("saddle-point factorization failed:" + detail::rank_diagnostic(sys));
  const Eigen::VectorXd d = ldlt.vectorD();
  if (!d.allFinite() || (d.array() < 0.0).count() != nu)
    throw SolverError("saddle-point system has wrong inertia:" + detail::rank_diagnostic(sys));
  if (detail::schur_min_eigenvalue(ldlt, nt, nu) <= 1e2 * delta)
    throw SolverError("saddle-point system is singular:" + detail::rank_diagnostic(sys));

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nt + nu);
  rhs.head(nt) = sys.L;
  const double scale = std::max(rhs.norm(), 1e-300);
  Eigen::VectorXd x = ldlt.solve(rhs);
  double prev = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 20; ++step) {
    const Eigen::VectorXd r = rhs - apply_K(x);
    const double rn = r.norm() / scale;
    if (rn <= 1e-15 || rn >= 0.5 * prev) break;
    prev = rn;
    x += ldlt.solve(r);
  }
  if (!x.allFinite()) throw SolverError("saddle-point solve produced non-finite values:" + detail::rank_diagnostic(sys));
  if ((rhs - apply_K(x)).norm() > 1e-8 * scale)
    throw SolverError("iterative refinement did not converge:" + detail::rank_diagnostic(sys));
  sol.Phi = x.head(nt);
  sol.U = x.tail(nu);
  sol.residual_norm = detail::g_norm(sys.G, sol.Phi);
  return sol;
}

/// Block-diagonal inverse of G assembled from dense per-element inverses.
inline SparseMatrix block_inverse(const SaddleSystem& sys) {
  if (!sys.block_diagonal) throw ContractError("Schur path requires a block-diagonal Gramm matrix (broken test spaces)");
  const int nt = sys.test_size();
  std::vector<int> local(static_cast<std::size_t>(nt), -1);
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& block : sys.test_blocks) {
    const int n = static_cast<int>(block.size());
    if (n == 0) continue;
    for (int i = 0; i < n; ++i) local[static_cast<std::size_t>(block[static_cast<std::size_t>(i)])] = i;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
      for (SparseMatrix::InnerIterator it(sys.G, block[static_cast<std::size_t>(j)]); it; ++it) {
        const int i = local[static_cast<std::size_t>(it.row())];
        if (i < 0) throw ContractError("Gramm matrix couples distinct element blocks");
        g(i, j) = it.value();
      }
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
      throw GrammError("element Gramm block is not positive definite for the chosen tau/iota parameters");
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        trip.emplace_back(block[static_cast<std::size_t>(i)], block[static_cast<std::size_t>(j)],
                          0.5 * (inv(i, j) + inv(j, i)));
    for (int i = 0; i < n; ++i) local[static_cast<std::size_t>(block[static_cast<std::size_t>(i)])] = -1;
  }
  SparseMatrix Ginv(nt, nt);
  Ginv.setFromTriplets(trip.begin(), trip.end());
  return Ginv;
}

/// S = B^T G^-1 B for block-diagonal G.
inline SparseMatrix schur_complement(const SaddleSystem& sys) {
  const SparseMatrix Ginv = block_inverse(sys);
  const SparseMatrix GB = Ginv * sys.B;
  return SparseMatrix(sys.B.transpose() * GB);
}

/// Least-squares reduction  B^T G^-1 B U = B^T G^-1 L  with per-element
/// inversion of G; Phi = G^-1 (L - B U).
inline MixedSolution solve_schur(const SaddleSystem& sys) {
  const SparseMatrix Ginv = block_inverse(sys);
  MixedSolution sol;
  const int nu = sys.trial_size();
  if (nu == 0) {
    sol.trivial = true;
    sol.U = Eigen::VectorXd::Zero(0);
    sol.Phi = Ginv * sys.L;
    sol.residual_norm = detail::g_norm(sys.G, sol.Phi);
    return sol;
  }
  const SparseMatrix GB = Ginv * sys.B;
  SparseMatrix S = sys.B.transpose() * GB;
  const Eigen::VectorXd GL = Ginv * sys.L;
  const Eigen::VectorXd rhs = sys.B.transpose() * GL;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw SolverError("Schur complement factorization failed:" + detail::rank_diagnostic(sys));
  const Eigen::VectorXd d = ldlt.vectorD();
  if ((d.array() <= 0.0).any())
    throw SolverError("Schur complement is not positive definite:" + detail::rank_diagnostic(sys));
  sol.U = ldlt.solve(rhs);
  sol.U += ldlt.solve(rhs - S * sol.U);
  sol.Phi = Ginv * (sys.L - sys.B * sol.U);
  sol.residual_norm = detail::g_norm(sys.G, sol.Phi);
  return sol;
}

enum class SolverPath { automatic, full, schur };

inline MixedSolution solve(const SaddleSystem& sys, SolverPath path = SolverPath::automatic) {
  switch (path) {
    case SolverPath::full:
      return solve_full(sys);
    case SolverPath::schur:
      return solve_schur(sys);
    case SolverPath::automatic:
      break;
  }
  return sys.block_diagonal ? solve_schur(sys) : solve_full(sys);
}

/// Full coefficient vectors (constrained DOFs set to zero) of the trial fields.
struct FieldCoefficients {
  Eigen::VectorXd u;
  Eigen::VectorXd q;
};

inline Eigen::VectorXd expand_free(const DiscreteSpace& space, const Eigen::VectorXd& free_values) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(space.dof_count());
  const auto map = space.free_to_global();
  for (std::size_t i = 0; i < map.size(); ++i) full[map[i]] = free_values[static_cast<Eigen::Index>(i)];
  return full;
}

inline FieldCoefficients extract_fields(const Discretization& disc, const SaddleSystem& sys,
                                        const MixedSolution& sol) {
  FieldCoefficients out;
  if (disc.trial_u) out.u = expand_free(*disc.trial_u, sol.U.segment(sys.trial_u.offset, sys.trial_u.size));
  if (disc.trial_q) out.q = expand_free(*disc.trial_q, sol.U.segment(sys.trial_q.offset, sys.trial_q.size));
  return out;
}

/// Zero-based "row col value" lines.
inline void write_coordinate(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

inline void write_vector(const std::string& path, const Eigen::VectorXd& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

}  // namespace rmiga
