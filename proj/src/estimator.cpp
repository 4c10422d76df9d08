#include "afemcr/estimator.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace afemcr {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double elem_hf_sq(const Triangulation& t, int e, const RhsField& f) {
  double s = 0.0;
  for (int c = 0; c < f.components; ++c)
    s += t.area(e) * integrate_d5(t.geom(e), [&](const Vec2& x) {
      const double v = f.eval(x, c);
      return v * v;
    });
  return s;
}

}  // namespace

void IndicatorTable::write_csv(std::ostream& out) const {
  out << "side,node_a,node_b,volume_sq,jump_sq,total_sq\n";
  out.precision(17);
  for (int s = 0; s < tria.num_sides(); ++s) {
    const SideKey& k = tria.side(s).key;
    out << s << "," << k.a << "," << k.b << "," << volume[s] << "," << jump[s]
        << "," << total[s] << "\n";
  }
}

IndicatorTable indicators(const Triangulation& t, const CRFunction& u,
                          const RhsField& f) {
  if (!(u.tria == t)) fail("indicators: solution does not live on this mesh");
  IndicatorTable tab;
  tab.tria = t;
  tab.volume.assign(t.num_sides(), 0.0);
  tab.jump.assign(t.num_sides(), 0.0);
  tab.total.assign(t.num_sides(), 0.0);

  std::vector<double> hf(t.num_elems());
  for (int e = 0; e < t.num_elems(); ++e) hf[e] = elem_hf_sq(t, e, f);

  const auto& verts = t.forest()->vertices();
  for (int s = 0; s < t.num_sides(); ++s) {
    const Side& sd = t.side(s);
    for (int adj : sd.elems)
      if (adj >= 0) tab.volume[s] += hf[t.elem_index(adj)];
    const Vec2 tan = (verts[sd.key.b] - verts[sd.key.a]) / sd.length;
    for (int c = 0; c < u.components; ++c) {
      double j = dot(u.grad(t.elem_index(sd.elems[0]), c), tan);
      if (sd.elems[1] >= 0) j -= dot(u.grad(t.elem_index(sd.elems[1]), c), tan);
      tab.jump[s] += sd.length * sd.length * j * j;
    }
    tab.total[s] = tab.volume[s] + tab.jump[s];
    tab.sum_total += tab.total[s];
  }
  return tab;
}

EtaBarResult eta_bar(const Triangulation& t, const IndicatorTable& table) {
  if (!(table.tria == t)) fail("eta_bar: table does not match mesh");
  EtaBarResult res;
  res.refd_sum.assign(t.num_sides(), 0.0);
  res.refd_sides.resize(t.num_sides());
  for (int s = 0; s < t.num_sides(); ++s) {
    for (const SideKey& k : refd(t, t.side(s).key)) {
      const int idx = t.side_index(k);
      res.refd_sides[s].push_back(idx);
      res.refd_sum[s] += table.total[idx];
    }
    res.value = std::max(res.value, res.refd_sum[s]);
  }
  return res;
}

EnergyRecord energy(const Triangulation& t, const CRFunction& u, const RhsField& f,
                    double gamma, bool include_data) {
  if (gamma <= 0.0) fail("energy: gamma must be positive");
  EnergyRecord rec;
  rec.gamma = gamma;
  rec.dirichlet = 0.5 * grad_norm_sq(u);
  for (int e = 0; e < t.num_elems(); ++e)
    for (int c = 0; c < u.components; ++c)
      rec.load += integrate_d5(t.geom(e),
                               [&](const Vec2& x) { return f.eval(x, c) * u.eval(e, x, c); });
  rec.data = include_data ? gamma * hf_norm_sq(t, f) : 0.0;
  rec.total = -(rec.dirichlet - rec.load) + rec.data;
  return rec;
}

OscillationRecord oscillation(const Triangulation& t, const RhsField& f) {
  OscillationRecord rec;
  rec.tria = t;
  rec.per_elem.assign(t.num_elems(), 0.0);
  for (int e = 0; e < t.num_elems(); ++e) {
    const TriGeom& g = t.geom(e);
    for (int c = 0; c < f.components; ++c) {
      const double mean =
          integrate_d5(g, [&](const Vec2& x) { return f.eval(x, c); }) / g.area;
      rec.per_elem[e] += g.area * integrate_d5(g, [&](const Vec2& x) {
        const double d = f.eval(x, c) - mean;
        return d * d;
      });
    }
    rec.total += rec.per_elem[e];
  }
  return rec;
}

EnergyGapReport energy_difference_vs_error(const Triangulation& t,
                                           const Triangulation& tstar,
                                           ProblemKind kind, const RhsField& f,
                                           double gamma) {
  if (!coarser_or_equal(t, tstar))
    fail("energy_difference_vs_error: meshes not nested");

  CRFunction u, ustar;
  if (kind == ProblemKind::poisson) {
    u = solve_poisson(t, f);
    ustar = solve_poisson(tstar, f);
  } else {
    u = solve_stokes(t, f).u;
    ustar = solve_stokes(tstar, f).u;
  }

  EnergyGapReport rep;
  const EnergyRecord gt = energy(t, u, f, gamma);
  const EnergyRecord gs = energy(tstar, ustar, f, gamma);
  rep.energy_gap = gt.total - gs.total;
  rep.grad_diff_sq = grad_diff_norm_sq(tstar, ustar, u);
  rep.hf_refined_sq = hf_norm_sq_refined_region(t, tstar, f);
  rep.quasi_error = rep.grad_diff_sq + rep.hf_refined_sq;

  const IndicatorTable tab = indicators(t, u, f);
  for (int s = 0; s < t.num_sides(); ++s)
    if (tstar.side_index(t.side(s).key) < 0) rep.eta_removed_sq += tab.total[s];

  const double eps = 1e-14;
  rep.ratio_quasi = rep.eta_removed_sq > eps ? rep.quasi_error / rep.eta_removed_sq : 0.0;
  rep.ratio_gap = rep.eta_removed_sq > eps ? rep.energy_gap / rep.eta_removed_sq : 0.0;

  const double L2 = SpaceConstants::lambda * SpaceConstants::lambda;
  rep.bracket_lower = 0.25 * rep.grad_diff_sq + (0.5 * gamma - L2) * rep.hf_refined_sq;
  rep.bracket_upper = 0.75 * rep.grad_diff_sq + (gamma + L2) * rep.hf_refined_sq;
  const double slack = 1e-9 * (1.0 + std::abs(rep.energy_gap));
  rep.bracket_ok = rep.bracket_lower <= rep.energy_gap + slack &&
                   rep.energy_gap <= rep.bracket_upper + slack;
  return rep;
}

}  // namespace afemcr
