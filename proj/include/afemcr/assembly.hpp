#pragma once

#include <Eigen/Sparse>
#include <iosfwd>

#include "afemcr/space.hpp"

namespace afemcr {

/// Load function with its declared polynomial degree (-1 for general data);
/// degree <= 4 is integrated exactly by the default quadrature.
struct RhsField {
  int components = 1;
  ScalarField scalar;
  VectorField vector;
  int degree = -1;

  double eval(const Vec2& x, int c) const {
    if (components == 1) return scalar(x);
    const Vec2 v = vector(x);
    return c == 0 ? v.x : v.y;
  }

  static RhsField make_scalar(ScalarField f, int degree = -1) {
    return {1, std::move(f), {}, degree};
  }
  static RhsField make_vector(VectorField f, int degree = -1) {
    return {2, {}, std::move(f), degree};
  }
};

/// Assembled linear system with homogeneous boundary DOFs eliminated.
/// For the Stokes saddle problem the unknowns are ordered velocity DOFs,
/// then one pressure per element, then a single mean-zero multiplier.
struct SparseSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  std::vector<int> dof_of;  // side * components + c -> free index, -1 on boundary
  int n_free = 0;
  int n_velocity = 0;  // saddle only
  int n_pressure = 0;  // saddle only
  bool saddle = false;

  void dump_matrix_market(std::ostream& out) const;
};

SparseSystem assemble_poisson(const Triangulation& t, const RhsField& f);
SparseSystem assemble_stokes(const Triangulation& t, const RhsField& f);

CRFunction solve_poisson(const Triangulation& t, const RhsField& f);

struct StokesSolution {
  CRFunction u;  // 2 components
  P0Function p;  // mean-zero
};

StokesSolution solve_stokes(const Triangulation& t, const RhsField& f);

/// gamma-weighted data term sum_T |T| int_T f^2 (so ||h_T f||^2 with
/// h_T = |T|^{1/2}), all components.
double hf_norm_sq(const Triangulation& t, const RhsField& f);
/// Same sum restricted to the elements of t refined away in tstar.
double hf_norm_sq_refined_region(const Triangulation& t, const Triangulation& tstar,
                                 const RhsField& f);

}  // namespace afemcr
