// SPDX-License-Identifier: Apache-2.0
//
// Second-order forward-mode automatic differentiation in two variables.
// A Jet2 carries f, grad f and the Hessian of f with respect to (x, y);
// evaluating a chart on Jet2 arguments yields its exact first and second
// partials.
#pragma once

#include <cmath>

namespace pmc {

struct Jet2 {
  double v = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dxx = 0.0;
  double dxy = 0.0;
  double dyy = 0.0;

  constexpr Jet2() = default;
  constexpr Jet2(double value) : v(value) {}  // NOLINT: implicit lift of constants
  constexpr Jet2(double value, double gx, double gy, double hxx, double hxy, double hyy)
      : v(value), dx(gx), dy(gy), dxx(hxx), dxy(hxy), dyy(hyy) {}

  static constexpr Jet2 variable_x(double x) { return {x, 1.0, 0.0, 0.0, 0.0, 0.0}; }
  static constexpr Jet2 variable_y(double y) { return {y, 0.0, 1.0, 0.0, 0.0, 0.0}; }

  /// Chain rule for g(f) given g(f.v), g'(f.v), g''(f.v).
  constexpr Jet2 compose(double g0, double g1, double g2) const {
    return {g0,
            g1 * dx,
            g1 * dy,
            g1 * dxx + g2 * dx * dx,
            g1 * dxy + g2 * dx * dy,
            g1 * dyy + g2 * dy * dy};
  }

  Jet2& operator+=(const Jet2& o) {
    v += o.v; dx += o.dx; dy += o.dy; dxx += o.dxx; dxy += o.dxy; dyy += o.dyy;
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    v -= o.v; dx -= o.dx; dy -= o.dy; dxx -= o.dxx; dxy -= o.dxy; dyy -= o.dyy;
    return *this;
  }
  Jet2& operator*=(const Jet2& o) {
    *this = Jet2{v * o.v,
                 dx * o.v + v * o.dx,
                 dy * o.v + v * o.dy,
                 dxx * o.v + 2.0 * dx * o.dx + v * o.dxx,
                 dxy * o.v + dx * o.dy + dy * o.dx + v * o.dxy,
                 dyy * o.v + 2.0 * dy * o.dy + v * o.dyy};
    return *this;
  }
  Jet2& operator/=(const Jet2& o) {
    const double r = 1.0 / o.v;
    return *this *= o.compose(r, -r * r, 2.0 * r * r * r);
  }
};

inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.dx, -a.dy, -a.dxx, -a.dxy, -a.dyy}; }
inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
inline Jet2 operator/(Jet2 a, const Jet2& b) { return a /= b; }
inline Jet2 operator+(Jet2 a, double b) { a.v += b; return a; }
inline Jet2 operator+(double b, Jet2 a) { a.v += b; return a; }
inline Jet2 operator-(Jet2 a, double b) { a.v -= b; return a; }
inline Jet2 operator-(double b, const Jet2& a) { return -a + b; }
inline Jet2 operator*(Jet2 a, double b) {
  a.v *= b; a.dx *= b; a.dy *= b; a.dxx *= b; a.dxy *= b; a.dyy *= b;
  return a;
}
inline Jet2 operator*(double b, Jet2 a) { return a * b; }
inline Jet2 operator/(Jet2 a, double b) { return a * (1.0 / b); }
inline Jet2 operator/(double b, const Jet2& a) { return Jet2(b) / a; }

inline Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return a.compose(s, c, -s);
}
inline Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return a.compose(c, -s, -c);
}
inline Jet2 tan(const Jet2& a) {
  const double t = std::tan(a.v), s2 = 1.0 + t * t;
  return a.compose(t, s2, 2.0 * t * s2);
}
inline Jet2 sinh(const Jet2& a) {
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return a.compose(s, c, s);
}
inline Jet2 cosh(const Jet2& a) {
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return a.compose(c, s, c);
}
inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return a.compose(e, e, e);
}
inline Jet2 log(const Jet2& a) {
  const double r = 1.0 / a.v;
  return a.compose(std::log(a.v), r, -r * r);
}
inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.v);
  return a.compose(s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet2 atan(const Jet2& a) {
  const double r = 1.0 / (1.0 + a.v * a.v);
  return a.compose(std::atan(a.v), r, -2.0 * a.v * r * r);
}

inline double value_of(double a) { return a; }
inline double value_of(const Jet2& a) { return a.v; }

}  // namespace pmc
