#pragma once

#include <array>
#include <cmath>

namespace afemcr {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double xx, double yy) : x(xx), y(yy) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline double norm_sq(const Vec2& a) { return dot(a, a); }

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

/// Triangle geometry cache: corner coordinates, area, barycentric gradients.
struct TriGeom {
  std::array<Vec2, 3> p;
  double area = 0.0;
  std::array<Vec2, 3> grad;  // gradient of barycentric coordinate lambda_i

  static TriGeom make(const Vec2& a, const Vec2& b, const Vec2& c) {
    TriGeom g;
    g.p = {a, b, c};
    const double twice = cross(b - a, c - a);
    g.area = 0.5 * std::abs(twice);
    // grad lambda_i is the inward normal of the opposite edge scaled by 1/(2 area)
    g.grad[0] = Vec2{b.y - c.y, c.x - b.x} / twice;
    g.grad[1] = Vec2{c.y - a.y, a.x - c.x} / twice;
    g.grad[2] = Vec2{a.y - b.y, b.x - a.x} / twice;
    return g;
  }

  Vec2 point(double l0, double l1, double l2) const {
    return p[0] * l0 + p[1] * l1 + p[2] * l2;
  }

  std::array<double, 3> bary(const Vec2& x) const {
    const double a0 = signed_area(x, p[1], p[2]);
    const double a1 = signed_area(p[0], x, p[2]);
    const double a2 = signed_area(p[0], p[1], x);
    const double s = a0 + a1 + a2;
    return {a0 / s, a1 / s, a2 / s};
  }
};

struct TriQuadPoint {
  double l0, l1, l2, w;  // barycentric point and weight (weights sum to 1)
};

/// 7-point rule, exact for polynomials of degree 5.
inline const std::array<TriQuadPoint, 7>& tri_quad_d5() {
  static const double a1 = 0.059715871789769820;
  static const double b1 = 0.470142064105115090;
  static const double w1 = 0.132394152788506180;
  static const double a2 = 0.797426985353087320;
  static const double b2 = 0.101286507323456340;
  static const double w2 = 0.125939180544827150;
  static const std::array<TriQuadPoint, 7> pts = {{
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
      {a1, b1, b1, w1},
      {b1, a1, b1, w1},
      {b1, b1, a1, w1},
      {a2, b2, b2, w2},
      {b2, a2, b2, w2},
      {b2, b2, a2, w2},
  }};
  return pts;
}

/// Edge-midpoint rule, exact for quadratics.
inline const std::array<TriQuadPoint, 3>& tri_quad_mid() {
  static const std::array<TriQuadPoint, 3> pts = {{
      {0.5, 0.5, 0.0, 1.0 / 3.0},
      {0.0, 0.5, 0.5, 1.0 / 3.0},
      {0.5, 0.0, 0.5, 1.0 / 3.0},
  }};
  return pts;
}

template <class F>
double integrate_d5(const TriGeom& g, F&& f) {
  double s = 0.0;
  for (const auto& q : tri_quad_d5()) s += q.w * f(g.point(q.l0, q.l1, q.l2));
  return s * g.area;
}

template <class F>
double integrate_mid(const TriGeom& g, F&& f) {
  double s = 0.0;
  for (const auto& q : tri_quad_mid()) s += q.w * f(g.point(q.l0, q.l1, q.l2));
  return s * g.area;
}

struct EdgeQuadPoint {
  double t, w;  // point in [0,1], weights sum to 1
};

/// 4-point Gauss-Legendre on [0,1], exact for degree 7.
inline const std::array<EdgeQuadPoint, 4>& edge_quad_g4() {
  static const double r1 = 0.339981043584856260;
  static const double r2 = 0.861136311594052580;
  static const double w1 = 0.652145154862546140 / 2.0;
  static const double w2 = 0.347854845137453860 / 2.0;
  static const std::array<EdgeQuadPoint, 4> pts = {{
      {0.5 - 0.5 * r2, w2},
      {0.5 - 0.5 * r1, w1},
      {0.5 + 0.5 * r1, w1},
      {0.5 + 0.5 * r2, w2},
  }};
  return pts;
}

template <class F>
double integrate_edge(const Vec2& a, const Vec2& b, F&& f) {
  double s = 0.0;
  for (const auto& q : edge_quad_g4()) s += q.w * f(a + (b - a) * q.t);
  return s * norm(b - a);
}

}  // namespace afemcr
