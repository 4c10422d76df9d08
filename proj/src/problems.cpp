#include "afemcr/problems.hpp"

#include <stdexcept>

namespace afemcr {

namespace {

const char* kSquareMesh = R"(# unit square, two triangles, diagonal refinement edges
vertices 4
0 0
1 0
1 1
0 1
triangles 2
1 0 2
3 0 2
)";

const char* kLShapeMesh = R"(# L-shape (-1,1)^2 minus the closed quadrant [0,1)x(-1,0],
# quadrant diagonals (meeting the reentrant corner) as refinement edges
vertices 8
-1 -1
0 -1
0 0
1 0
1 1
0 1
-1 1
-1 0
triangles 6
1 2 0
7 2 0
7 2 6
5 2 6
3 2 4
5 2 4
)";

constexpr double kPi = 3.14159265358979323846;

// stream function factors a(x) = x^2 (1-x)^2 and derivatives
double sa(double x) { return x * x * (1 - x) * (1 - x); }
double sa1(double x) { return 2 * x * (1 - x) * (1 - 2 * x); }
double sa2(double x) { return 2 * (6 * x * x - 6 * x + 1); }
double sa3(double x) { return 12 * (2 * x - 1); }

std::vector<ProblemSpec> build_catalog() {
  std::vector<ProblemSpec> cat;

  {
    ProblemSpec p;
    p.name = "square-poisson-f1";
    p.kind = ProblemKind::poisson;
    p.mesh_name = "square2.mesh";
    p.mesh_text = kSquareMesh;
    p.f = RhsField::make_scalar([](const Vec2&) { return 1.0; }, 0);
    cat.push_back(std::move(p));
  }
  {
    ProblemSpec p;
    p.name = "square-poisson-smooth";
    p.kind = ProblemKind::poisson;
    p.mesh_name = "square2.mesh";
    p.mesh_text = kSquareMesh;
    p.f = RhsField::make_scalar(
        [](const Vec2& v) {
          return 2.0 * kPi * kPi * std::sin(kPi * v.x) * std::sin(kPi * v.y);
        },
        -1);
    p.has_exact = true;
    p.exact_u = [](const Vec2& v) { return std::sin(kPi * v.x) * std::sin(kPi * v.y); };
    p.exact_grad_u = [](const Vec2& v) {
      return Vec2{kPi * std::cos(kPi * v.x) * std::sin(kPi * v.y),
                  kPi * std::sin(kPi * v.x) * std::cos(kPi * v.y)};
    };
    // ||grad u||^2 = pi^2/2, so the data-free energy is pi^2/4
    p.exact_energy = kPi * kPi / 4.0;
    cat.push_back(std::move(p));
  }
  {
    ProblemSpec p;
    p.name = "lshape-poisson-f1";
    p.kind = ProblemKind::poisson;
    p.mesh_name = "lshape6.mesh";
    p.mesh_text = kLShapeMesh;
    p.f = RhsField::make_scalar([](const Vec2&) { return 1.0; }, 0);
    cat.push_back(std::move(p));
  }
  {
    ProblemSpec p;
    p.name = "square-stokes-f10";
    p.kind = ProblemKind::stokes;
    p.mesh_name = "square2.mesh";
    p.mesh_text = kSquareMesh;
    p.f = RhsField::make_vector([](const Vec2&) { return Vec2{1.0, 0.0}; }, 0);
    cat.push_back(std::move(p));
  }
  {
    ProblemSpec p;
    p.name = "square-stokes-manufactured";
    p.kind = ProblemKind::stokes;
    p.mesh_name = "square2.mesh";
    p.mesh_text = kSquareMesh;
    // velocity = curl of the stream function a(x) a(y); pressure = 0
    p.f = RhsField::make_vector(
        [](const Vec2& v) {
          return Vec2{-sa2(v.x) * sa1(v.y) - sa(v.x) * sa3(v.y),
                      sa3(v.x) * sa(v.y) + sa1(v.x) * sa2(v.y)};
        },
        6);
    p.has_exact = true;
    p.exact_vel = [](const Vec2& v) {
      return Vec2{sa(v.x) * sa1(v.y), -sa1(v.x) * sa(v.y)};
    };
    p.exact_grad_vel[0] = [](const Vec2& v) {
      return Vec2{sa1(v.x) * sa1(v.y), sa(v.x) * sa2(v.y)};
    };
    p.exact_grad_vel[1] = [](const Vec2& v) {
      return Vec2{-sa2(v.x) * sa(v.y), -sa1(v.x) * sa1(v.y)};
    };
    p.exact_pressure = [](const Vec2&) { return 0.0; };
    cat.push_back(std::move(p));
  }
  return cat;
}

}  // namespace

Triangulation ProblemSpec::base_mesh() const {
  return Triangulation::bottom(MeshForest::load_string(mesh_text));
}

const std::vector<ProblemSpec>& catalog() {
  static const std::vector<ProblemSpec> cat = build_catalog();
  return cat;
}

const ProblemSpec& find_problem(const std::string& name) {
  for (const ProblemSpec& p : catalog())
    if (p.name == name) return p;
  throw std::runtime_error("unknown problem: " + name);
}

Solution solve_problem(const ProblemSpec& prob, const Triangulation& t) {
  Solution sol;
  if (prob.kind == ProblemKind::poisson) {
    sol.u = solve_poisson(t, prob.f);
  } else {
    StokesSolution s = solve_stokes(t, prob.f);
    sol.u = std::move(s.u);
    sol.p = std::move(s.p);
    sol.has_pressure = true;
  }
  return sol;
}

Triangulation reference_mesh(const Triangulation& finest, int kref) {
  Triangulation t = finest;
  for (int i = 0; i < kref; ++i) t = uniform_refine(t);
  return t;
}

Solution reference_solution(const ProblemSpec& prob, const Triangulation& t_ref) {
  return solve_problem(prob, t_ref);
}

double energy_error_sq(const ProblemSpec& prob, const CRFunction& u) {
  if (!prob.has_exact) throw std::runtime_error("energy_error_sq: no exact solution");
  const Triangulation& t = u.tria;
  double err = 0.0;
  for (int e = 0; e < t.num_elems(); ++e) {
    if (prob.kind == ProblemKind::poisson) {
      const Vec2 gu = u.grad(e, 0);
      err += integrate_d5(t.geom(e), [&](const Vec2& x) {
        return norm_sq(prob.exact_grad_u(x) - gu);
      });
    } else {
      for (int c = 0; c < 2; ++c) {
        const Vec2 gu = u.grad(e, c);
        err += integrate_d5(t.geom(e), [&](const Vec2& x) {
          return norm_sq(prob.exact_grad_vel[c](x) - gu);
        });
      }
    }
  }
  return err;
}

}  // namespace afemcr
