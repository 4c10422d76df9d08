#pragma once

#include <cmath>
#include <string>

#include "afemcr/afem.hpp"

namespace afemcr {

/// Catalog entry: domain mesh, load, and (when available) the exact
/// solution with its gradient and energy.
struct ProblemSpec {
  std::string name;
  ProblemKind kind = ProblemKind::poisson;
  std::string mesh_name;
  std::string mesh_text;
  RhsField f;

  bool has_exact = false;
  ScalarField exact_u;        // Poisson
  VectorField exact_grad_u;   // Poisson
  VectorField exact_vel;      // Stokes
  VectorField exact_grad_vel[2];  // rows of the velocity gradient
  ScalarField exact_pressure;     // Stokes
  double exact_energy = std::nan("");  // -(1/2||grad u||^2 - (f,u)) = +1/2||grad u||^2
  int kref = 2;

  Triangulation base_mesh() const;
};

const std::vector<ProblemSpec>& catalog();
const ProblemSpec& find_problem(const std::string& name);

struct Solution {
  CRFunction u;
  P0Function p;
  bool has_pressure = false;
};

Solution solve_problem(const ProblemSpec& prob, const Triangulation& t);

/// Discrete stand-in for the exact solution: solve on a deep refinement
/// (join of `t` with kref extra uniform refinement rounds of the base mesh
/// region covered by `t`).
Solution reference_solution(const ProblemSpec& prob, const Triangulation& t_ref);
Triangulation reference_mesh(const Triangulation& finest, int kref);

/// Squared broken energy distance of u to the exact solution gradient.
double energy_error_sq(const ProblemSpec& prob, const CRFunction& u);

}  // namespace afemcr
