#include "afemcr/space.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace afemcr {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

// ---------------------------------------------------------------------------
// CRFunction / P0Function / gradients
// ---------------------------------------------------------------------------

CRFunction CRFunction::zero(const Triangulation& t, int components) {
  CRFunction v;
  v.tria = t;
  v.components = components;
  v.coef.assign(static_cast<std::size_t>(t.num_sides()) * components, 0.0);
  return v;
}

double CRFunction::eval(int elemIdx, const Vec2& x, int c) const {
  const auto& sides = tria.sides_of(elemIdx);
  const auto lam = tria.geom(elemIdx).bary(x);
  double val = 0.0;
  for (int i = 0; i < 3; ++i) val += at(sides[i], c) * (1.0 - 2.0 * lam[i]);
  return val;
}

Vec2 CRFunction::grad(int elemIdx, int c) const {
  const auto& sides = tria.sides_of(elemIdx);
  const auto& g = tria.geom(elemIdx).grad;
  Vec2 out;
  for (int i = 0; i < 3; ++i) out += g[i] * (-2.0 * at(sides[i], c));
  return out;
}

void CRFunction::zero_boundary() {
  for (int s = 0; s < tria.num_sides(); ++s)
    if (tria.side(s).boundary)
      for (int c = 0; c < components; ++c) at(s, c) = 0.0;
}

double P0Function::weighted_sum() const {
  double s = 0.0;
  for (int i = 0; i < tria.num_elems(); ++i) s += tria.area(i) * value[i];
  return s;
}

NCGradientField nc_gradient(const CRFunction& v) {
  NCGradientField g;
  g.tria = v.tria;
  g.components = v.components;
  g.grad.resize(static_cast<std::size_t>(v.tria.num_elems()) * v.components);
  for (int e = 0; e < v.tria.num_elems(); ++e)
    for (int c = 0; c < v.components; ++c) g.grad[e * v.components + c] = v.grad(e, c);
  return g;
}

P0Function nc_divergence(const CRFunction& v) {
  if (v.components != 2) fail("nc_divergence: requires a 2-component field");
  P0Function d;
  d.tria = v.tria;
  d.value.resize(v.tria.num_elems());
  for (int e = 0; e < v.tria.num_elems(); ++e)
    d.value[e] = v.grad(e, 0).x + v.grad(e, 1).y;
  return d;
}

// ---------------------------------------------------------------------------
// Nonconforming interpolation
// ---------------------------------------------------------------------------

CRFunction interpolate_nc(const Triangulation& t, const ScalarField& v) {
  CRFunction out = CRFunction::zero(t, 1);
  for (int s = 0; s < t.num_sides(); ++s) {
    const Side& sd = t.side(s);
    const Vec2 pa = t.forest()->vertices()[sd.key.a];
    const Vec2 pb = t.forest()->vertices()[sd.key.b];
    out.at(s) = integrate_edge(pa, pb, v) / sd.length;
  }
  return out;
}

CRFunction interpolate_nc(const Triangulation& t, const VectorField& v) {
  CRFunction out = CRFunction::zero(t, 2);
  for (int s = 0; s < t.num_sides(); ++s) {
    const Side& sd = t.side(s);
    const Vec2 pa = t.forest()->vertices()[sd.key.a];
    const Vec2 pb = t.forest()->vertices()[sd.key.b];
    out.at(s, 0) = integrate_edge(pa, pb, [&](const Vec2& x) { return v(x).x; }) / sd.length;
    out.at(s, 1) = integrate_edge(pa, pb, [&](const Vec2& x) { return v(x).y; }) / sd.length;
  }
  return out;
}

namespace {

// sum of |S_i| * coef over the sub-sides of (a,b) in the fine triangulation;
// exact for CR traces because each sub-side mean is the stored coefficient.
void accumulate_subside_means(const Triangulation& fine, const CRFunction& v, int a,
                              int b, int c, double& acc) {
  const int idx = fine.side_index(SideKey(a, b));
  if (idx >= 0) {
    acc += fine.side(idx).length * v.at(idx, c);
    return;
  }
  const int m = fine.forest()->find_midpoint(SideKey(a, b));
  if (m < 0) fail("interpolate_nc: side is neither a side nor split in the fine mesh");
  accumulate_subside_means(fine, v, a, m, c, acc);
  accumulate_subside_means(fine, v, m, b, c, acc);
}

}  // namespace

CRFunction interpolate_nc(const Triangulation& t, const CRFunction& v) {
  if (t == v.tria) return v;
  if (!coarser_or_equal(t, v.tria))
    fail("interpolate_nc: function does not live on a refinement of the target mesh");
  CRFunction out = CRFunction::zero(t, v.components);
  for (int s = 0; s < t.num_sides(); ++s) {
    const Side& sd = t.side(s);
    for (int c = 0; c < v.components; ++c) {
      double acc = 0.0;
      accumulate_subside_means(v.tria, v, sd.key.a, sd.key.b, c, acc);
      out.at(s, c) = acc / sd.length;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enrichment
// ---------------------------------------------------------------------------

EnrichedFunction enrich(const CRFunction& v) {
  const Triangulation& t = v.tria;
  const int nc = v.components;
  EnrichedFunction e;
  e.tria = t;
  e.components = nc;

  int max_node = 0;
  for (int z : t.nodes()) max_node = std::max(max_node, z);
  e.node_pos_of.assign(max_node + 1, -1);
  for (int i = 0; i < static_cast<int>(t.nodes().size()); ++i)
    e.node_pos_of[t.nodes()[i]] = i;

  e.vertex_value.assign(t.nodes().size() * nc, 0.0);
  std::vector<int> count(t.nodes().size(), 0);
  for (int el = 0; el < t.num_elems(); ++el) {
    const auto& vv = t.forest()->elem(t.elems()[el]).v;
    const auto& sides = t.sides_of(el);
    for (int c = 0; c < nc; ++c) {
      const double csum = v.at(sides[0], c) + v.at(sides[1], c) + v.at(sides[2], c);
      for (int k = 0; k < 3; ++k) {
        // corner value of the CR reconstruction: sum_i coef_i - 2 coef_k
        const double corner = csum - 2.0 * v.at(sides[k], c);
        e.vertex_value[e.node_pos_of[vv[k]] * nc + c] += corner;
      }
    }
    for (int k = 0; k < 3; ++k) ++count[e.node_pos_of[vv[k]]];
  }
  for (int i = 0; i < static_cast<int>(t.nodes().size()); ++i) {
    const bool bdry = t.node_on_boundary(t.nodes()[i]);
    for (int c = 0; c < nc; ++c) {
      if (bdry)
        e.vertex_value[i * nc + c] = 0.0;
      else
        e.vertex_value[i * nc + c] /= count[i];
    }
  }

  // Edge bubbles restore the side means: int_S bubble ds = (2/3) h_S.
  e.bubble.assign(static_cast<std::size_t>(t.num_sides()) * nc, 0.0);
  for (int s = 0; s < t.num_sides(); ++s) {
    const Side& sd = t.side(s);
    if (sd.boundary) continue;
    for (int c = 0; c < nc; ++c) {
      const double va = e.vertex_value[e.node_pos_of[sd.key.a] * nc + c];
      const double vb = e.vertex_value[e.node_pos_of[sd.key.b] * nc + c];
      e.bubble[s * nc + c] = 1.5 * (v.at(s, c) - 0.5 * (va + vb));
    }
  }
  return e;
}

double EnrichedFunction::eval(int elemIdx, const Vec2& x, int c) const {
  const auto& vv = tria.forest()->elem(tria.elems()[elemIdx]).v;
  const auto& sides = tria.sides_of(elemIdx);
  const auto lam = tria.geom(elemIdx).bary(x);
  double val = 0.0;
  for (int k = 0; k < 3; ++k)
    val += vertex_value[node_pos_of[vv[k]] * components + c] * lam[k];
  // local side i is opposite vertex i, spanned by the other two vertices
  for (int i = 0; i < 3; ++i) {
    const double b = 4.0 * lam[(i + 1) % 3] * lam[(i + 2) % 3];
    val += bubble[sides[i] * components + c] * b;
  }
  return val;
}

Vec2 EnrichedFunction::grad(int elemIdx, const Vec2& x, int c) const {
  const auto& vv = tria.forest()->elem(tria.elems()[elemIdx]).v;
  const auto& sides = tria.sides_of(elemIdx);
  const auto& g = tria.geom(elemIdx).grad;
  const auto lam = tria.geom(elemIdx).bary(x);
  Vec2 out;
  for (int k = 0; k < 3; ++k)
    out += g[k] * vertex_value[node_pos_of[vv[k]] * components + c];
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    const Vec2 gb = (g[i2] * lam[i1] + g[i1] * lam[i2]) * 4.0;
    out += gb * bubble[sides[i] * components + c];
  }
  return out;
}

CRFunction enrich_then_interpolate(const Triangulation& tstar, const CRFunction& v) {
  if (!coarser_or_equal(v.tria, tstar))
    fail("enrich_then_interpolate: target is not a refinement");
  if (tstar == v.tria) return v;
  const EnrichedFunction e = enrich(v);
  CRFunction out = CRFunction::zero(tstar, v.components);
  const auto& verts = tstar.forest()->vertices();
  for (int s = 0; s < tstar.num_sides(); ++s) {
    const Side& sd = tstar.side(s);
    const int estar = sd.elems[0];
    const int anc = v.tria.ancestor_leaf(estar);
    const int ai = v.tria.elem_index(anc);
    const Vec2 pa = verts[sd.key.a];
    const Vec2 pb = verts[sd.key.b];
    for (int c = 0; c < v.components; ++c) {
      // Simpson rule: exact side mean of the piecewise quadratic
      const double mean = (e.eval(ai, pa, c) + 4.0 * e.eval(ai, sd.midpoint, c) +
                           e.eval(ai, pb, c)) /
                          6.0;
      out.at(s, c) = mean;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transfer operator
// ---------------------------------------------------------------------------

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

}  // namespace

TransferResult transfer(const Triangulation& tstar, const CRFunction& v) {
  const Triangulation& t = v.tria;
  if (!coarser_or_equal(t, tstar)) fail("transfer: target is not a refinement");

  TransferResult res;
  if (tstar == t) {
    res.on_fine = v;
    res.on_intermediate = v;
    res.stability_ratio = 0.0;
    return res;
  }

  const Triangulation ti = intermediate_triangulation(t, tstar);
  const int nc = v.components;
  const MeshForest& forest = *t.forest();

  // Coarse ancestor (as leaf index in t) of every intermediate element.
  std::vector<int> coarse_of(ti.num_elems());
  for (int e = 0; e < ti.num_elems(); ++e)
    coarse_of[e] = t.elem_index(t.ancestor_leaf(ti.elems()[e]));

  // Stars: intermediate leaf indices incident to each node.
  std::unordered_map<int, std::vector<int>> star;
  for (int e = 0; e < ti.num_elems(); ++e)
    for (int k = 0; k < 3; ++k) star[forest.elem(ti.elems()[e]).v[k]].push_back(e);

  // Refined-edge-connected classes: within a star, elements are joined
  // across sides of the intermediate mesh that are not sides of t.
  // avg[elem*3 + k] = class-average vertex value, per component.
  std::vector<double> avg(static_cast<std::size_t>(ti.num_elems()) * 3 * nc, 0.0);
  auto corner_value = [&](int elemIdx, int node, int c) {
    return v.eval(coarse_of[elemIdx], forest.vertices()[node], c);
  };
  for (const auto& [z, elems] : star) {
    const int n = static_cast<int>(elems.size());
    std::unordered_map<int, int> local;
    for (int i = 0; i < n; ++i) local[elems[i]] = i;
    UnionFind uf(n);
    for (int i = 0; i < n; ++i) {
      const int e = elems[i];
      const auto& sides = ti.sides_of(e);
      for (int k = 0; k < 3; ++k) {
        const Side& sd = ti.side(sides[k]);
        if (sd.key.a != z && sd.key.b != z) continue;  // side must contain z
        if (t.side_index(sd.key) >= 0) continue;       // chain edges avoid sides of t
        const int other = (sd.elems[0] == ti.elems()[e]) ? sd.elems[1] : sd.elems[0];
        if (other < 0) continue;
        auto it = local.find(ti.elem_index(other));
        if (it != local.end()) uf.unite(i, it->second);
      }
    }
    const bool bdry = ti.node_on_boundary(z);
    for (int c = 0; c < nc; ++c) {
      std::unordered_map<int, std::pair<double, int>> cls;  // root -> (sum, count)
      if (!bdry)
        for (int i = 0; i < n; ++i) {
          auto& acc = cls[uf.find(i)];
          acc.first += corner_value(elems[i], z, c);
          acc.second += 1;
        }
      for (int i = 0; i < n; ++i) {
        const int e = elems[i];
        int k = 0;
        while (forest.elem(ti.elems()[e]).v[k] != z) ++k;
        double val = 0.0;
        if (!bdry) {
          const auto& acc = cls[uf.find(i)];
          val = acc.first / acc.second;
        }
        avg[(static_cast<std::size_t>(e) * 3 + k) * nc + c] = val;
      }
    }
  }

  // CR coefficients on the intermediate mesh.
  CRFunction ji = CRFunction::zero(ti, nc);
  for (int s = 0; s < ti.num_sides(); ++s) {
    const Side& sd = ti.side(s);
    const int ct = t.side_index(sd.key);
    for (int c = 0; c < nc; ++c) {
      if (ct >= 0) {
        ji.at(s, c) = v.at(ct, c);
        continue;
      }
      double sum = 0.0;
      int cnt = 0;
      for (int adj : sd.elems) {
        if (adj < 0) continue;
        const int e = ti.elem_index(adj);
        const auto& vv = forest.elem(adj).v;
        double val = 0.0;
        for (int k = 0; k < 3; ++k) {
          if (vv[k] == sd.key.a || vv[k] == sd.key.b)
            val += 0.5 * avg[(static_cast<std::size_t>(e) * 3 + k) * nc + c];
        }
        sum += val;
        ++cnt;
      }
      ji.at(s, c) = sum / cnt;
    }
  }
  res.on_intermediate = ji;

  // Representation in CR(tstar): evaluate the (by construction piecewise
  // affine on tstar) function at the fine side midpoints.
  CRFunction jf = CRFunction::zero(tstar, nc);
  for (int s = 0; s < tstar.num_sides(); ++s) {
    const Side& sd = tstar.side(s);
    for (int c = 0; c < nc; ++c) {
      double sum = 0.0;
      int cnt = 0;
      for (int adj : sd.elems) {
        if (adj < 0) continue;
        const int anc = ti.ancestor_leaf(adj);
        sum += ji.eval(ti.elem_index(anc), sd.midpoint, c);
        ++cnt;
      }
      jf.at(s, c) = sum / cnt;
    }
  }
  res.on_fine = jf;

  // Stability ratio: quasi-interpolation error against the tangential jumps
  // on the bisected sides of t.
  double num = 0.0;
  for (int e = 0; e < ti.num_elems(); ++e) {
    const TriGeom& g = ti.geom(e);
    const int ce = coarse_of[e];
    const double hinv2 = 1.0 / t.area(ce);
    for (int c = 0; c < nc; ++c) {
      const Vec2 gd = v.grad(ce, c) - ji.grad(e, c);
      num += g.area * norm_sq(gd);
      num += hinv2 * integrate_mid(g, [&](const Vec2& x) {
        const double d = v.eval(ce, x, c) - ji.eval(e, x, c);
        return d * d;
      });
    }
  }
  double den = 0.0;
  const auto& verts = forest.vertices();
  for (int s = 0; s < t.num_sides(); ++s) {
    const Side& sd = t.side(s);
    if (tstar.side_index(sd.key) >= 0) continue;  // side survives
    const Vec2 tan = (verts[sd.key.b] - verts[sd.key.a]) / sd.length;
    for (int c = 0; c < nc; ++c) {
      double jump = dot(v.grad(t.elem_index(sd.elems[0]), c), tan);
      if (sd.elems[1] >= 0) jump -= dot(v.grad(t.elem_index(sd.elems[1]), c), tan);
      den += sd.length * sd.length * jump * jump;
    }
  }
  if (den > 1e-28)
    res.stability_ratio = num / den;
  else
    res.stability_ratio = (num < 1e-24) ? 0.0 : std::numeric_limits<double>::infinity();
  return res;
}

// ---------------------------------------------------------------------------
// P0 projection and norms
// ---------------------------------------------------------------------------

P0Function l2_project_p0(const Triangulation& t, const ScalarField& q) {
  P0Function p;
  p.tria = t;
  p.value.resize(t.num_elems());
  for (int e = 0; e < t.num_elems(); ++e)
    p.value[e] = integrate_d5(t.geom(e), q) / t.area(e);
  return p;
}

P0Function l2_project_p0(const Triangulation& t, const P0Function& q_fine) {
  if (!coarser_or_equal(t, q_fine.tria))
    fail("l2_project_p0: input does not live on a refinement");
  P0Function p;
  p.tria = t;
  p.value.assign(t.num_elems(), 0.0);
  for (int e = 0; e < t.num_elems(); ++e) {
    double acc = 0.0;
    for (int leaf : descendant_leaves(q_fine.tria, t.elems()[e]))
      acc += q_fine.tria.area(q_fine.tria.elem_index(leaf)) *
             q_fine.value[q_fine.tria.elem_index(leaf)];
    p.value[e] = acc / t.area(e);
  }
  return p;
}

double grad_norm_sq(const CRFunction& v) {
  double s = 0.0;
  for (int e = 0; e < v.tria.num_elems(); ++e)
    for (int c = 0; c < v.components; ++c) s += v.tria.area(e) * norm_sq(v.grad(e, c));
  return s;
}

Vec2 grad_on_ancestor(const CRFunction& v, int elemId, int c) {
  const int anc = v.tria.ancestor_leaf(elemId);
  if (anc < 0) fail("grad_on_ancestor: element not below the function's mesh");
  return v.grad(v.tria.elem_index(anc), c);
}

double grad_diff_norm_sq(const Triangulation& on, const CRFunction& u,
                         const CRFunction& v) {
  if (u.components != v.components) fail("grad_diff_norm_sq: component mismatch");
  double s = 0.0;
  for (int e = 0; e < on.num_elems(); ++e) {
    const int id = on.elems()[e];
    for (int c = 0; c < u.components; ++c) {
      const Vec2 gu = (u.tria == on) ? u.grad(e, c) : grad_on_ancestor(u, id, c);
      const Vec2 gv = (v.tria == on) ? v.grad(e, c) : grad_on_ancestor(v, id, c);
      s += on.area(e) * norm_sq(gu - gv);
    }
  }
  return s;
}

}  // namespace afemcr
