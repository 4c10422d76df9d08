#include <doctest.h>

#include <random>

#include "afemcr/problems.hpp"
#include "afemcr/verify.hpp"
#include "oracle.hpp"

using namespace afemcr;

namespace {

Triangulation square() { return find_problem("square-poisson-f1").base_mesh(); }

Triangulation unit_right_triangle() {
  return Triangulation::bottom(MeshForest::load_string(
      "vertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\n"));
}

}  // namespace

TEST_CASE("basis reconstruction reproduces side-mean coefficients") {
  const Triangulation t = square();
  std::mt19937_64 rng(3);
  const CRFunction v = [&] {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    CRFunction v = CRFunction::zero(t, 1);
    for (double& c : v.coef) c = d(rng);
    return v;
  }();
  for (int s = 0; s < t.num_sides(); ++s) {
    const Side& sd = t.side(s);
    const int e = t.elem_index(sd.elems[0]);
    CHECK(v.eval(e, sd.midpoint) == doctest::Approx(v.at(s)).epsilon(1e-13));
  }
  // constant coefficients give the constant function with zero gradient
  CRFunction one = CRFunction::zero(t, 1);
  for (double& c : one.coef) c = 1.0;
  for (int e = 0; e < t.num_elems(); ++e) {
    CHECK(one.eval(e, t.geom(e).point(0.2, 0.3, 0.5)) == doctest::Approx(1.0));
    CHECK(norm(one.grad(e)) == doctest::Approx(0.0));
  }
}

TEST_CASE("interpolating x^2 gives mean 1/3 on the hypotenuse") {
  const Triangulation t = unit_right_triangle();
  const CRFunction v =
      interpolate_nc(t, ScalarField([](const Vec2& p) { return p.x * p.x; }));
  const int hyp = t.side_index(SideKey(1, 2));
  REQUIRE(hyp >= 0);
  CHECK(v.at(hyp) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("interpolation reproduces the elementwise gradient mean") {
  std::mt19937_64 rng(5);
  const Triangulation t = random_refinement(square(), rng, 2);
  const auto f = [](const Vec2& p) { return p.x * p.x - 0.5 * p.x * p.y + p.y; };
  const auto gf = [](const Vec2& p) { return Vec2{2 * p.x - 0.5 * p.y, -0.5 * p.x + 1}; };
  const CRFunction v = interpolate_nc(t, ScalarField(f));
  for (int e = 0; e < t.num_elems(); ++e) {
    Vec2 mean;
    for (const auto& q : tri_quad_mid())
      mean += gf(t.geom(e).point(q.l0, q.l1, q.l2)) * q.w;
    CHECK(norm(mean - v.grad(e)) < 1e-13);
  }
}

TEST_CASE("interpolation from a refinement preserves coarse side means") {
  std::mt19937_64 rng(9);
  const Triangulation t = random_refinement(square(), rng, 1);
  const Triangulation tstar = random_refinement(t, rng, 2);
  const CRFunction fine =
      interpolate_nc(tstar, ScalarField([](const Vec2& p) { return p.x * p.y; }));
  const CRFunction coarse = interpolate_nc(t, fine);
  const CRFunction direct =
      interpolate_nc(t, ScalarField([](const Vec2& p) { return p.x * p.y; }));
  for (int s = 0; s < t.num_sides(); ++s)
    CHECK(coarse.at(s) == doctest::Approx(direct.at(s)).epsilon(1e-12));
}

TEST_CASE("interpolation stability ratio for xy on the unit right triangle") {
  const Triangulation t = unit_right_triangle();
  const auto f = [](const Vec2& p) { return p.x * p.y; };
  const CRFunction v = interpolate_nc(t, ScalarField(f));
  const TriGeom& g = t.geom(0);
  const double num = (1.0 / g.area) * integrate_d5(g, [&](const Vec2& p) {
    const double d = f(p) - v.eval(0, p);
    return d * d;
  });
  const Vec2 gv = v.grad(0);
  const double den = integrate_d5(g, [&](const Vec2& p) {
    return norm_sq(Vec2{p.y, p.x} - gv);
  });
  const double ratio = std::sqrt(num / den);
  CHECK(ratio == doctest::Approx(0.2581988897).epsilon(1e-8));
  CHECK(ratio <= SpaceConstants::lambda);
}

TEST_CASE("enrichment matches side means and gradient means") {
  std::mt19937_64 rng(13);
  const Triangulation t = random_refinement(square(), rng, 2);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  CRFunction v = CRFunction::zero(t, 1);
  for (double& c : v.coef) c = d(rng);
  v.zero_boundary();
  const EnrichedFunction e = enrich(v);
  const auto& verts = t.forest()->vertices();

  for (int s = 0; s < t.num_sides(); ++s) {
    const Side& sd = t.side(s);
    const int el = t.elem_index(sd.elems[0]);
    // Simpson on the side is exact for the quadratic trace
    const double mean = (e.eval(el, verts[sd.key.a]) + 4.0 * e.eval(el, sd.midpoint) +
                         e.eval(el, verts[sd.key.b])) /
                        6.0;
    CHECK(mean == doctest::Approx(v.at(s)).epsilon(1e-12));
    if (sd.boundary) {
      CHECK(e.eval(el, verts[sd.key.a]) == doctest::Approx(0.0));
      CHECK(e.eval(el, sd.midpoint) == doctest::Approx(0.0));
    }
    if (sd.elems[1] >= 0) {  // conformity: both traces agree
      const int el2 = t.elem_index(sd.elems[1]);
      CHECK(e.eval(el, sd.midpoint) ==
            doctest::Approx(e.eval(el2, sd.midpoint)).epsilon(1e-12));
    }
  }
  for (int el = 0; el < t.num_elems(); ++el) {
    Vec2 mean;
    for (const auto& q : tri_quad_mid())
      mean += e.grad(el, t.geom(el).point(q.l0, q.l1, q.l2)) * q.w;
    CHECK(norm(mean - v.grad(el)) < 1e-12);
  }
}

TEST_CASE("enrich-then-interpolate equals the input on unrefined elements") {
  std::mt19937_64 rng(17);
  const Triangulation t = random_refinement(square(), rng, 1);
  const Triangulation tstar = random_refinement(t, rng, 1);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  CRFunction v = CRFunction::zero(t, 1);
  for (double& c : v.coef) c = d(rng);
  v.zero_boundary();
  const CRFunction w = enrich_then_interpolate(tstar, v);
  for (int e = 0; e < t.num_elems(); ++e) {
    if (!tstar.contains(t.elems()[e])) continue;
    for (int s : t.sides_of(e)) {
      const int fs = tstar.side_index(t.side(s).key);
      REQUIRE(fs >= 0);
      CHECK(w.at(fs) == doctest::Approx(v.at(s)).epsilon(1e-12));
    }
  }
  // coarse gradient means preserved everywhere
  for (int e = 0; e < t.num_elems(); ++e) {
    Vec2 mean;
    double area = 0.0;
    for (int leaf : descendant_leaves(tstar, t.elems()[e])) {
      const int li = tstar.elem_index(leaf);
      mean += w.grad(li) * tstar.area(li);
      area += tstar.area(li);
    }
    CHECK(norm(mean / area - v.grad(e)) < 1e-12);
  }
}

TEST_CASE("transfer is the identity on an unrefined mesh") {
  const Triangulation t = square();
  CRFunction v = CRFunction::zero(t, 1);
  v.at(t.side_index(SideKey(0, 2))) = 1.0;
  const TransferResult res = transfer(t, v);
  CHECK(res.on_fine.coef == v.coef);
  CHECK(res.stability_ratio == doctest::Approx(0.0));
}

TEST_CASE("transfer conserves kept elements and lands in the fine space") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 5; ++rep) {
    const Triangulation t = random_refinement(square(), rng, 1 + rep % 2);
    const Triangulation tstar = random_refinement(t, rng, 1);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    CRFunction v = CRFunction::zero(t, rep % 2 ? 2 : 1);
    for (double& c : v.coef) c = d(rng);
    v.zero_boundary();
    const TransferResult res = transfer(tstar, v);
    for (int e = 0; e < t.num_elems(); ++e) {
      if (!tstar.contains(t.elems()[e])) continue;
      for (int s : t.sides_of(e))
        for (int c = 0; c < v.components; ++c)
          CHECK(res.on_fine.at(tstar.side_index(t.side(s).key), c) ==
                doctest::Approx(v.at(s, c)).epsilon(1e-11));
    }
    const Triangulation ti = res.on_intermediate.tria;
    for (int s = 0; s < tstar.num_sides(); ++s) {
      const Side& sd = tstar.side(s);
      if (sd.elems[1] < 0) continue;
      for (int c = 0; c < v.components; ++c) {
        double vals[2];
        for (int a = 0; a < 2; ++a)
          vals[a] = res.on_intermediate.eval(
              ti.elem_index(ti.ancestor_leaf(sd.elems[a])), sd.midpoint, c);
        CHECK(vals[0] == doctest::Approx(vals[1]).epsilon(1e-10));
      }
    }
    CHECK(res.stability_ratio >= 0.0);
    CHECK(std::isfinite(res.stability_ratio));
  }
}

TEST_CASE("piecewise constant projection") {
  const Triangulation t = unit_right_triangle();
  const P0Function p =
      l2_project_p0(t, ScalarField([](const Vec2& v) { return v.x; }));
  CHECK(p.value[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const Triangulation sq = square();
  const Triangulation r = uniform_refine(sq);
  const P0Function fine =
      l2_project_p0(r, ScalarField([](const Vec2& v) { return v.x + 2 * v.y; }));
  const P0Function coarse = l2_project_p0(sq, fine);
  const P0Function direct =
      l2_project_p0(sq, ScalarField([](const Vec2& v) { return v.x + 2 * v.y; }));
  for (int e = 0; e < 2; ++e)
    CHECK(coarse.value[e] == doctest::Approx(direct.value[e]).epsilon(1e-13));
}

TEST_CASE("divergence of a rigid rotation interpolant vanishes") {
  const Triangulation t = uniform_refine(square());
  const CRFunction v =
      interpolate_nc(t, VectorField([](const Vec2& p) { return Vec2{-p.y, p.x}; }));
  const P0Function d = nc_divergence(v);
  for (double val : d.value) CHECK(val == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("gradient norm helpers agree with direct sums") {
  std::mt19937_64 rng(23);
  const Triangulation t = random_refinement(square(), rng, 1);
  const Triangulation tstar = random_refinement(t, rng, 1);
  const CRFunction u =
      interpolate_nc(t, ScalarField([](const Vec2& p) { return p.x * p.y; }));
  const CRFunction us =
      interpolate_nc(tstar, ScalarField([](const Vec2& p) { return p.x * p.y; }));
  double direct = 0.0;
  for (int e = 0; e < tstar.num_elems(); ++e)
    direct += tstar.area(e) *
              norm_sq(us.grad(e) - grad_on_ancestor(u, tstar.elems()[e]));
  CHECK(grad_diff_norm_sq(tstar, us, u) == doctest::Approx(direct).epsilon(1e-13));
  CHECK(grad_diff_norm_sq(tstar, us, us) == doctest::Approx(0.0));
  CHECK(grad_norm_sq(u) >= 0.0);
}
