#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "afemcr/mesh.hpp"

namespace afemcr {

/// Stability constant of the nonconforming interpolation operator and the
/// induced lower bound on admissible energy weights gamma > 2 Lambda^2.
struct SpaceConstants {
  static constexpr double lambda = 0.4396;
  static constexpr double min_gamma = 2.0 * lambda * lambda;
  static constexpr double default_gamma = 0.5;
};

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Crouzeix-Raviart function: one coefficient per side midpoint and
/// component; boundary-side coefficients are zero.
struct CRFunction {
  Triangulation tria;
  int components = 1;
  std::vector<double> coef;  // coef[side * components + c]

  static CRFunction zero(const Triangulation& t, int components = 1);

  double at(int sideIdx, int c = 0) const { return coef[sideIdx * components + c]; }
  double& at(int sideIdx, int c = 0) { return coef[sideIdx * components + c]; }

  /// Value of component c of the elementwise affine reconstruction on the
  /// element with leaf index elemIdx.
  double eval(int elemIdx, const Vec2& x, int c = 0) const;

  /// Constant gradient of component c on element elemIdx.
  Vec2 grad(int elemIdx, int c = 0) const;

  void zero_boundary();
};

/// Piecewise constants; used for pressures and projected data.
struct P0Function {
  Triangulation tria;
  std::vector<double> value;  // per leaf index
  bool mean_zero = false;

  double weighted_sum() const;  // sum |T| value_T
};

/// Elementwise constant gradient of a CRFunction (c x 2 values per element).
struct NCGradientField {
  Triangulation tria;
  int components = 1;
  std::vector<Vec2> grad;  // grad[elem * components + c]

  const Vec2& at(int elemIdx, int c = 0) const { return grad[elemIdx * components + c]; }
};

NCGradientField nc_gradient(const CRFunction& v);
/// Trace of the gradient of a 2-component field; throws for scalar input.
P0Function nc_divergence(const CRFunction& v);

/// Nonconforming interpolation onto CR(t): side-midpoint coefficient equals
/// the mean of v over the side.
CRFunction interpolate_nc(const Triangulation& t, const ScalarField& v);
CRFunction interpolate_nc(const Triangulation& t, const VectorField& v);
/// v lives on a refinement of t; side means are evaluated exactly by a
/// composite midpoint rule over the sub-sides.
CRFunction interpolate_nc(const Triangulation& t, const CRFunction& v);

/// Conforming piecewise quadratic: P1 vertex part plus edge bubbles.
struct EnrichedFunction {
  Triangulation tria;
  int components = 1;
  std::vector<double> vertex_value;  // vertex_value[node_pos * components + c]
  std::vector<double> bubble;        // bubble[side * components + c]
  std::vector<int> node_pos_of;      // dense position per vertex id (-1 elsewhere)

  double eval(int elemIdx, const Vec2& x, int c = 0) const;
  Vec2 grad(int elemIdx, const Vec2& x, int c = 0) const;
};

/// Enrichment into H^1_0: vertex averaging plus quadratic edge bubbles so
/// that every side mean of the result matches the side mean of v. As a
/// consequence the elementwise gradient means agree.
EnrichedFunction enrich(const CRFunction& v);

/// interpolate_nc(tstar, enrich(v)): CR on the refinement, equal to v on
/// every unrefined element and preserving coarse gradient means.
CRFunction enrich_then_interpolate(const Triangulation& tstar, const CRFunction& v);

struct TransferResult {
  CRFunction on_fine;          // element of CR(tstar)
  CRFunction on_intermediate;  // the same function on uniform_refine(t) meet tstar
  double stability_ratio = 0.0;  // (||h^-1 d||^2 + ||grad d||^2) / jump sum
};

/// Transfer operator CR(t) -> CR(tstar) for t <= tstar: identity on
/// unrefined elements, class averaging across bisected edges elsewhere.
TransferResult transfer(const Triangulation& tstar, const CRFunction& v);

/// Elementwise averages (L^2 projection onto piecewise constants).
P0Function l2_project_p0(const Triangulation& t, const ScalarField& q);
P0Function l2_project_p0(const Triangulation& t, const P0Function& q_fine);

// --- norm and integral helpers used across estimator / verify -------------

/// sum_T |T| |grad v|^2 over all elements and components.
double grad_norm_sq(const CRFunction& v);

/// Squared L2 norm of the difference of the broken gradients of two CR
/// functions on nested meshes, evaluated on the triangulation `on`. Both u
/// and v must live on coarsenings of `on` (or on `on` itself).
double grad_diff_norm_sq(const Triangulation& on, const CRFunction& u,
                         const CRFunction& v);

/// Gradient of v on the element of v's triangulation containing the leaf
/// `elemId` of a refinement.
Vec2 grad_on_ancestor(const CRFunction& v, int elemId, int c = 0);

}  // namespace afemcr
