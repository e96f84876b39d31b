// SPDX-License-Identifier: Apache-2.0
//
// Immersion charts: maps from a parameter rectangle into M^2(eps) x M^2(eps),
// M^2(eps) x R or M^2(eps) x S^1(r). Every target is embedded in R^6 (or
// R^6_2) so a single Vec6 carries a point:
//   product:        (phi, psi)           all six coordinates
//   factor x line:  (phi, t, 0, 0)
//   factor x circle:(phi, q1, q2, 0)     with q1^2 + q2^2 = r^2
#pragma once

#include <array>
#include <functional>
#include <type_traits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pmc/ambient.hpp"
#include "pmc/jet.hpp"
#include "pmc/profile_ode.hpp"

namespace pmc {

enum class TargetKind { kProduct, kFactorTimesLine, kFactorTimesCircle };

struct Target {
  TargetKind kind = TargetKind::kProduct;
  double radius = 1.0;

  static Target product() { return {TargetKind::kProduct, 1.0}; }
  static Target line() { return {TargetKind::kFactorTimesLine, 1.0}; }
  static Target circle(double r) { return {TargetKind::kFactorTimesCircle, r}; }
  bool is_product() const { return kind == TargetKind::kProduct; }
  std::string name() const;
};

struct Domain {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(double x, double y, double margin = 0.0) const {
    return x >= x0 + margin && x <= x1 - margin && y >= y0 + margin && y <= y1 - margin;
  }
  Domain grown(double pad) const { return {x0 - pad, x1 + pad, y0 - pad, y1 + pad}; }
};

/// Point and first/second partials of a chart.
struct ChartJet {
  Vec6 p = Vec6::Zero();
  Vec6 dx = Vec6::Zero();
  Vec6 dy = Vec6::Zero();
  Vec6 dxx = Vec6::Zero();
  Vec6 dxy = Vec6::Zero();
  Vec6 dyy = Vec6::Zero();
};

struct Periods {
  double x = 0.0;
  double y = 0.0;
};

class ImmersionChart {
 public:
  std::string family;
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::string> notes;
  Target target;
  Epsilon eps;
  /// The rectangle on which the chart is certified.
  Domain domain;
  /// Evaluation is also valid this far outside `domain` (room for stencils).
  double pad = 0.0;
  std::function<Vec6(double, double)> eval;
  /// Analytic or semi-analytic jet; empty when only evaluation is known.
  std::function<ChartJet(double, double)> jet;
  std::optional<Periods> periods;

  Vec6 evaluate(double x, double y) const;
  bool has_jet() const { return static_cast<bool>(jet); }
  /// Throws UsageError if the parameter is absent.
  double param(const std::string& key) const;
};

/// Metric of the ambient R^6 / R^6_2 restricted to the target's coordinates.
double ambient_inner(const Target& t, Epsilon eps, const Vec6& v, const Vec6& w);

/// Orthogonal projection onto the tangent space of the target at `point`.
Vec6 tangent_projection(const Target& t, Epsilon eps, const Vec6& point, const Vec6& v);

/// Distance of `point` from the target quadrics (0 when on the target).
double manifold_defect(const Target& t, Epsilon eps, const Vec6& point);

/// Unit vertical field d/dt of the line or circle factor at `point`.
Vec6 vertical_field(const Target& t, const Vec6& point);

/// Chain rule for a function of one variable along the chart parameters.
template <class S>
S lift(const Univariate& g, const S& x) {
  if constexpr (std::is_same_v<S, double>) {
    (void)x;
    return g.f;
  } else {
    return x.compose(g.f, g.df, g.d2f);
  }
}

inline ChartJet jet_from(const std::array<Jet2, 6>& c) {
  ChartJet j;
  for (int k = 0; k < 6; ++k) {
    j.p[k] = c[k].v;
    j.dx[k] = c[k].dx;
    j.dy[k] = c[k].dy;
    j.dxx[k] = c[k].dxx;
    j.dxy[k] = c[k].dxy;
    j.dyy[k] = c[k].dyy;
  }
  return j;
}

/// Builds eval and jet from one generic map f(S x, S y) -> std::array<S, 6>.
template <class F>
void attach_generic_map(ImmersionChart& chart, F f) {
  chart.eval = [f](double x, double y) {
    const std::array<double, 6> a = f(x, y);
    Vec6 v;
    for (int k = 0; k < 6; ++k) v[k] = a[k];
    return v;
  };
  chart.jet = [f](double x, double y) { return jet_from(f(Jet2::variable_x(x), Jet2::variable_y(y))); };
}

}  // namespace pmc
