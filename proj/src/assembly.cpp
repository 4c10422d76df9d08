#include "afemcr/assembly.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace afemcr {

namespace {

constexpr int kDirectSolveLimit = 200000;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// 4 |T| g_i . g_j: stiffness of the basis psi_i = 1 - 2 lambda_i.
double local_stiffness(const TriGeom& g, int i, int j) {
  return 4.0 * g.area * dot(g.grad[i], g.grad[j]);
}

std::vector<int> free_dof_map(const Triangulation& t, int components, int& n_free) {
  std::vector<int> dof(static_cast<std::size_t>(t.num_sides()) * components, -1);
  n_free = 0;
  for (int s = 0; s < t.num_sides(); ++s) {
    if (t.side(s).boundary) continue;
    for (int c = 0; c < components; ++c) dof[s * components + c] = n_free++;
  }
  return dof;
}

void check_residual(const SparseSystem& sys, const Eigen::VectorXd& x,
                    const char* what) {
  const double res = (sys.A * x - sys.b).norm();
  if (!(res <= 1e-12 * (sys.b.norm() + 1.0)))
    fail(std::string(what) + ": solver residual too large: " + std::to_string(res));
}

}  // namespace

void SparseSystem::dump_matrix_market(std::ostream& out) const {
  out << "%%MatrixMarket matrix coordinate real "
      << (saddle ? "general" : "symmetric") << "\n";
  std::vector<Eigen::Triplet<double>> entries;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      if (!saddle && it.row() < it.col()) continue;
      entries.emplace_back(it.row(), it.col(), it.value());
    }
  out << A.rows() << " " << A.cols() << " " << entries.size() << "\n";
  out.precision(17);
  for (const auto& e : entries)
    out << e.row() + 1 << " " << e.col() + 1 << " " << e.value() << "\n";
}

SparseSystem assemble_poisson(const Triangulation& t, const RhsField& f) {
  if (f.components != 1) fail("assemble_poisson: scalar load required");
  SparseSystem sys;
  sys.dof_of = free_dof_map(t, 1, sys.n_free);
  sys.b = Eigen::VectorXd::Zero(sys.n_free);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(t.num_elems()) * 9);
  for (int e = 0; e < t.num_elems(); ++e) {
    const TriGeom& g = t.geom(e);
    const auto& sides = t.sides_of(e);
    for (int i = 0; i < 3; ++i) {
      const int di = sys.dof_of[sides[i]];
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = sys.dof_of[sides[j]];
        if (dj >= 0) trip.emplace_back(di, dj, local_stiffness(g, i, j));
      }
      sys.b[di] += integrate_d5(g, [&](const Vec2& x) {
        return f.scalar(x) * (1.0 - 2.0 * g.bary(x)[i]);
      });
    }
  }
  sys.A.resize(sys.n_free, sys.n_free);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

CRFunction solve_poisson(const Triangulation& t, const RhsField& f) {
  const SparseSystem sys = assemble_poisson(t, f);
  Eigen::VectorXd x;
  if (sys.n_free == 0) {
    x.resize(0);
  } else if (sys.n_free <= kDirectSolveLimit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(sys.A);
    if (solver.info() != Eigen::Success) fail("solve_poisson: factorization failed");
    x = solver.solve(sys.b);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper>
        solver;
    solver.setTolerance(1e-14);
    solver.setMaxIterations(20 * sys.n_free);
    solver.compute(sys.A);
    x = solver.solve(sys.b);
    if (solver.info() != Eigen::Success) fail("solve_poisson: CG did not converge");
  }
  if (sys.n_free > 0) check_residual(sys, x, "solve_poisson");

  CRFunction u = CRFunction::zero(t, 1);
  for (int s = 0; s < t.num_sides(); ++s)
    if (sys.dof_of[s] >= 0) u.at(s) = x[sys.dof_of[s]];
  return u;
}

SparseSystem assemble_stokes(const Triangulation& t, const RhsField& f) {
  if (f.components != 2) fail("assemble_stokes: vector load required");
  SparseSystem sys;
  sys.saddle = true;
  sys.dof_of = free_dof_map(t, 2, sys.n_velocity);
  sys.n_pressure = t.num_elems();
  sys.n_free = sys.n_velocity + sys.n_pressure + 1;
  sys.b = Eigen::VectorXd::Zero(sys.n_free);

  const int p0 = sys.n_velocity;     // first pressure unknown
  const int mult = sys.n_free - 1;   // mean-zero multiplier
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < t.num_elems(); ++e) {
    const TriGeom& g = t.geom(e);
    const auto& sides = t.sides_of(e);
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 2; ++c) {
        const int di = sys.dof_of[sides[i] * 2 + c];
        if (di < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const int dj = sys.dof_of[sides[j] * 2 + c];
          if (dj >= 0) trip.emplace_back(di, dj, local_stiffness(g, i, j));
        }
        // divergence coupling: int_T d_c psi_i = |T| (-2 g_i)_c
        const Vec2 gpsi = g.grad[i] * -2.0;
        const double bval = g.area * (c == 0 ? gpsi.x : gpsi.y);
        trip.emplace_back(p0 + e, di, bval);
        trip.emplace_back(di, p0 + e, bval);
        sys.b[di] += integrate_d5(g, [&](const Vec2& x) {
          return f.eval(x, c) * (1.0 - 2.0 * g.bary(x)[i]);
        });
      }
    }
    trip.emplace_back(p0 + e, mult, g.area);
    trip.emplace_back(mult, p0 + e, g.area);
  }
  sys.A.resize(sys.n_free, sys.n_free);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

StokesSolution solve_stokes(const Triangulation& t, const RhsField& f) {
  const SparseSystem sys = assemble_stokes(t, f);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(sys.A);
  if (solver.info() != Eigen::Success) fail("solve_stokes: factorization failed");
  const Eigen::VectorXd x = solver.solve(sys.b);
  check_residual(sys, x, "solve_stokes");

  StokesSolution sol;
  sol.u = CRFunction::zero(t, 2);
  for (int s = 0; s < t.num_sides(); ++s)
    for (int c = 0; c < 2; ++c)
      if (sys.dof_of[s * 2 + c] >= 0) sol.u.at(s, c) = x[sys.dof_of[s * 2 + c]];
  sol.p.tria = t;
  sol.p.mean_zero = true;
  sol.p.value.resize(t.num_elems());
  for (int e = 0; e < t.num_elems(); ++e) sol.p.value[e] = x[sys.n_velocity + e];
  return sol;
}

double hf_norm_sq(const Triangulation& t, const RhsField& f) {
  double s = 0.0;
  for (int e = 0; e < t.num_elems(); ++e) {
    for (int c = 0; c < f.components; ++c)
      s += t.area(e) * integrate_d5(t.geom(e), [&](const Vec2& x) {
        const double v = f.eval(x, c);
        return v * v;
      });
  }
  return s;
}

double hf_norm_sq_refined_region(const Triangulation& t, const Triangulation& tstar,
                                 const RhsField& f) {
  double s = 0.0;
  for (int e = 0; e < t.num_elems(); ++e) {
    if (tstar.contains(t.elems()[e])) continue;
    for (int c = 0; c < f.components; ++c)
      s += t.area(e) * integrate_d5(t.geom(e), [&](const Vec2& x) {
        const double v = f.eval(x, c);
        return v * v;
      });
  }
  return s;
}

}  // namespace afemcr
