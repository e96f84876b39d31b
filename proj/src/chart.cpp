// SPDX-License-Identifier: Apache-2.0
#include "pmc/chart.hpp"

#include <cmath>

namespace pmc {

std::string Target::name() const {
  switch (kind) {
    case TargetKind::kProduct: return "product";
    case TargetKind::kFactorTimesLine: return "factor_times_line";
    case TargetKind::kFactorTimesCircle: return "factor_times_circle";
  }
  return "";
}

Vec6 ImmersionChart::evaluate(double x, double y) const {
  if (!domain.grown(pad + 1e-12).contains(x, y)) {
    throw DomainError("chart '" + family + "' evaluated outside its domain");
  }
  return eval(x, y);
}

double ImmersionChart::param(const std::string& key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  throw UsageError("chart '" + family + "' has no parameter '" + key + "'");
}

double ambient_inner(const Target& t, Epsilon eps, const Vec6& v, const Vec6& w) {
  const double first = inner3(v.head<3>(), w.head<3>(), eps);
  switch (t.kind) {
    case TargetKind::kProduct: return first + inner3(v.tail<3>(), w.tail<3>(), eps);
    case TargetKind::kFactorTimesLine: return first + v[3] * w[3];
    case TargetKind::kFactorTimesCircle: return first + v[3] * w[3] + v[4] * w[4];
  }
  return first;
}

Vec6 tangent_projection(const Target& t, Epsilon eps, const Vec6& point, const Vec6& v) {
  Vec6 out = Vec6::Zero();
  out.head<3>() = project_to_factor_tangent(point.head<3>(), v.head<3>(), eps);
  switch (t.kind) {
    case TargetKind::kProduct:
      out.tail<3>() = project_to_factor_tangent(point.tail<3>(), v.tail<3>(), eps);
      break;
    case TargetKind::kFactorTimesLine:
      out[3] = v[3];
      break;
    case TargetKind::kFactorTimesCircle: {
      const double r2 = point[3] * point[3] + point[4] * point[4];
      const double s = (v[3] * point[3] + v[4] * point[4]) / r2;
      out[3] = v[3] - s * point[3];
      out[4] = v[4] - s * point[4];
      break;
    }
  }
  return out;
}

double manifold_defect(const Target& t, Epsilon eps, const Vec6& point) {
  double d = std::abs(inner3(point.head<3>(), point.head<3>(), eps) - eps.sign());
  switch (t.kind) {
    case TargetKind::kProduct:
      d = std::max(d, std::abs(inner3(point.tail<3>(), point.tail<3>(), eps) - eps.sign()));
      break;
    case TargetKind::kFactorTimesLine:
      d = std::max({d, std::abs(point[4]), std::abs(point[5])});
      break;
    case TargetKind::kFactorTimesCircle:
      d = std::max({d, std::abs(std::hypot(point[3], point[4]) - t.radius), std::abs(point[5])});
      break;
  }
  return d;
}

Vec6 vertical_field(const Target& t, const Vec6& point) {
  Vec6 v = Vec6::Zero();
  if (t.kind == TargetKind::kFactorTimesLine) {
    v[3] = 1.0;
  } else if (t.kind == TargetKind::kFactorTimesCircle) {
    const double r = std::hypot(point[3], point[4]);
    v[3] = -point[4] / r;
    v[4] = point[3] / r;
  } else {
    throw UsageError("vertical_field: product targets have no vertical direction");
  }
  return v;
}

}  // namespace pmc
