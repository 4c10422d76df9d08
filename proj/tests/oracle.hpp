#pragma once

// Independent reference implementations used only by the tests: dense
// solvers with basis gradients recovered by affine fitting, composite
// quadrature, and a refinement-diff characterization of side closures.

#include <Eigen/Dense>
#include <algorithm>

#include "afemcr/assembly.hpp"

namespace afemcr::oracle {

// gradient of the affine function taking value vals[k] at corner k,
// recovered by solving the 3x3 interpolation system
inline Vec2 affine_gradient(const TriGeom& g, const std::array<double, 3>& vals) {
  Eigen::Matrix3d M;
  Eigen::Vector3d r;
  for (int k = 0; k < 3; ++k) {
    M(k, 0) = 1.0;
    M(k, 1) = g.p[k].x;
    M(k, 2) = g.p[k].y;
    r(k) = vals[k];
  }
  const Eigen::Vector3d c = M.fullPivLu().solve(r);
  return {c(1), c(2)};
}

// corner values of the side-midpoint basis function of local side i
inline std::array<double, 3> basis_corner_values(int i) {
  std::array<double, 3> vals{1.0, 1.0, 1.0};
  vals[i] = -1.0;
  return vals;
}

template <class F>
double composite_d5(const TriGeom& g, F&& f, int levels = 2) {
  if (levels == 0) return integrate_d5(g, f);
  const Vec2 m01 = (g.p[0] + g.p[1]) / 2.0;
  const Vec2 m12 = (g.p[1] + g.p[2]) / 2.0;
  const Vec2 m02 = (g.p[0] + g.p[2]) / 2.0;
  double s = 0.0;
  s += composite_d5(TriGeom::make(g.p[0], m01, m02), f, levels - 1);
  s += composite_d5(TriGeom::make(m01, g.p[1], m12), f, levels - 1);
  s += composite_d5(TriGeom::make(m02, m12, g.p[2]), f, levels - 1);
  s += composite_d5(TriGeom::make(m01, m12, m02), f, levels - 1);
  return s;
}

struct DensePoisson {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<int> dof;
  int n = 0;
};

inline DensePoisson dense_assemble_poisson(const Triangulation& t, const RhsField& f) {
  DensePoisson sys;
  sys.dof.assign(t.num_sides(), -1);
  for (int s = 0; s < t.num_sides(); ++s)
    if (!t.side(s).boundary) sys.dof[s] = sys.n++;
  sys.A = Eigen::MatrixXd::Zero(sys.n, sys.n);
  sys.b = Eigen::VectorXd::Zero(sys.n);
  for (int e = 0; e < t.num_elems(); ++e) {
    const TriGeom& g = t.geom(e);
    std::array<Vec2, 3> gb;
    for (int i = 0; i < 3; ++i) gb[i] = affine_gradient(g, basis_corner_values(i));
    const auto& sides = t.sides_of(e);
    for (int i = 0; i < 3; ++i) {
      if (sys.dof[sides[i]] < 0) continue;
      for (int j = 0; j < 3; ++j)
        if (sys.dof[sides[j]] >= 0)
          sys.A(sys.dof[sides[i]], sys.dof[sides[j]]) += g.area * dot(gb[i], gb[j]);
      sys.b(sys.dof[sides[i]]) += composite_d5(g, [&](const Vec2& x) {
        return f.scalar(x) * (1.0 - 2.0 * g.bary(x)[i]);
      });
    }
  }
  return sys;
}

inline CRFunction dense_solve_poisson(const Triangulation& t, const RhsField& f) {
  const DensePoisson sys = dense_assemble_poisson(t, f);
  const Eigen::VectorXd x = sys.A.fullPivLu().solve(sys.b);
  CRFunction u = CRFunction::zero(t, 1);
  for (int s = 0; s < t.num_sides(); ++s)
    if (sys.dof[s] >= 0) u.at(s) = x(sys.dof[s]);
  return u;
}

inline StokesSolution dense_solve_stokes(const Triangulation& t, const RhsField& f) {
  std::vector<int> dof(static_cast<std::size_t>(t.num_sides()) * 2, -1);
  int nv = 0;
  for (int s = 0; s < t.num_sides(); ++s)
    if (!t.side(s).boundary)
      for (int c = 0; c < 2; ++c) dof[s * 2 + c] = nv++;
  const int np = t.num_elems();
  const int n = nv + np + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < t.num_elems(); ++e) {
    const TriGeom& g = t.geom(e);
    std::array<Vec2, 3> gb;
    for (int i = 0; i < 3; ++i) gb[i] = affine_gradient(g, basis_corner_values(i));
    const auto& sides = t.sides_of(e);
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 2; ++c) {
        const int di = dof[sides[i] * 2 + c];
        if (di < 0) continue;
        for (int j = 0; j < 3; ++j)
          if (dof[sides[j] * 2 + c] >= 0)
            A(di, dof[sides[j] * 2 + c]) += g.area * dot(gb[i], gb[j]);
        const double bv = g.area * (c == 0 ? gb[i].x : gb[i].y);
        A(nv + e, di) += bv;
        A(di, nv + e) += bv;
        b(di) += composite_d5(
            g, [&](const Vec2& x) { return f.eval(x, c) * (1.0 - 2.0 * g.bary(x)[i]); });
      }
    A(nv + e, n - 1) += g.area;
    A(n - 1, nv + e) += g.area;
  }
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  StokesSolution sol;
  sol.u = CRFunction::zero(t, 2);
  for (int s = 0; s < t.num_sides(); ++s)
    for (int c = 0; c < 2; ++c)
      if (dof[s * 2 + c] >= 0) sol.u.at(s, c) = x(dof[s * 2 + c]);
  sol.p.tria = t;
  sol.p.mean_zero = true;
  sol.p.value.resize(np);
  for (int e = 0; e < np; ++e) sol.p.value[e] = x(nv + e);
  return sol;
}

// closure of a side as the sides of t that disappear in refine(t, {s})
inline std::vector<SideKey> refd_by_diff(const Triangulation& t, const SideKey& s) {
  const Triangulation r = refine(t, {s});
  std::vector<SideKey> gone;
  for (int i = 0; i < t.num_sides(); ++i)
    if (r.side_index(t.side(i).key) < 0) gone.push_back(t.side(i).key);
  std::sort(gone.begin(), gone.end());
  return gone;
}

}  // namespace afemcr::oracle
