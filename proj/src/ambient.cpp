// SPDX-License-Identifier: Apache-2.0
#include "pmc/ambient.hpp"

#include <cmath>
#include <string>

namespace pmc {

Epsilon::Epsilon(int value) : value_(value) {
  if (value != 1 && value != -1) {
    throw DomainError("eps must be +1 or -1, got " + std::to_string(value));
  }
}

FactorPoint::FactorPoint(const Vec3& coords, Epsilon eps, double tol) : coords_(coords), eps_(eps) {
  const double n = inner3(coords, coords, eps);
  if (!coords.allFinite() || std::abs(n - eps.sign()) > tol) {
    throw DomainError("point is not on M^2(eps): <p,p> = " + std::to_string(n));
  }
  if (!eps.is_sphere() && coords[2] <= 0.0) {
    throw DomainError("point on the lower sheet of the hyperboloid");
  }
}

FactorPoint FactorPoint::project(const Vec3& coords, Epsilon eps) {
  const double n = eps.sign() * inner3(coords, coords, eps);
  if (!(n > 0.0)) throw DomainError("cannot project onto M^2(eps)");
  Vec3 p = coords / std::sqrt(n);
  if (!eps.is_sphere() && p[2] < 0.0) p = -p;
  return FactorPoint(p, eps, nullptr);
}

ProductPoint::ProductPoint(const FactorPoint& first, const FactorPoint& second)
    : first_(first), second_(second) {
  if (!(first.eps() == second.eps())) throw UsageError("factors of a product point differ in eps");
}

Vec6 ProductPoint::coords() const {
  Vec6 out;
  out << first_.coords(), second_.coords();
  return out;
}

Vec6 ProductPoint::hat() const {
  Vec6 out;
  out << first_.coords(), -second_.coords();
  return out;
}

double inner(const AmbientVector& v, const AmbientVector& w) {
  if (!(v.eps == w.eps)) throw UsageError("inner product of vectors with different eps");
  return inner6(v.coords, w.coords, v.eps);
}

Vec3 rotate_tangent(const Vec3& p, const Vec3& v, Epsilon eps) {
  Vec3 c = p.cross(v);
  c[2] *= eps.sign();
  return c;
}

Vec3 project_to_factor_tangent(const Vec3& p, const Vec3& v, Epsilon eps) {
  return v - eps.sign() * inner3(v, p, eps) * p;
}

Vec3 factor_j(const FactorPoint& p, const Vec3& v, double tol) {
  const double scale = std::max(1.0, std::sqrt(std::abs(inner3(v, v, p.eps()))));
  if (std::abs(inner3(p.coords(), v, p.eps())) > tol * scale) {
    throw PreconditionError("factor_j: vector is not tangent to M^2(eps)");
  }
  return rotate_tangent(p.coords(), v, p.eps());
}

Vec6 product_j_raw(int which, const Vec6& point, const Vec6& v, Epsilon eps) {
  Vec6 out;
  out.head<3>() = rotate_tangent(point.head<3>(), v.head<3>(), eps);
  out.tail<3>() = rotate_tangent(point.tail<3>(), v.tail<3>(), eps);
  if (which == 2) out.tail<3>() *= -1.0;
  return out;
}

AmbientVector product_j(int which, const ProductPoint& p, const AmbientVector& v, double tol) {
  if (which != 1 && which != 2) throw UsageError("complex structure index must be 1 or 2");
  if (!(v.eps == p.eps())) throw UsageError("product_j: eps mismatch");
  const Vec3 a = factor_j(p.first(), v.first(), tol);
  Vec3 b = factor_j(p.second(), v.second(), tol);
  if (which == 2) b = -b;
  AmbientVector out;
  out.eps = v.eps;
  out.coords << a, b;
  return out;
}

std::array<Vec3, 2> factor_tangent_basis(const Vec3& p, Epsilon eps) {
  // Project the coordinate axis least aligned with p.
  Vec3 best = Vec3::Zero();
  double best_norm = -1.0;
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e[k] = 1.0;
    const Vec3 t = project_to_factor_tangent(p, e, eps);
    const double n = inner3(t, t, eps);
    if (n > best_norm) {
      best_norm = n;
      best = t;
    }
  }
  const Vec3 a = best / std::sqrt(best_norm);
  return {a, rotate_tangent(p, a, eps)};
}

double product_volume_form(const Vec6& point, Epsilon eps, const std::array<Vec6, 4>& vs) {
  const auto first = factor_tangent_basis(point.head<3>(), eps);
  const auto second = factor_tangent_basis(point.tail<3>(), eps);
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) {
    const Vec3 v1 = vs[i].head<3>();
    const Vec3 v2 = vs[i].tail<3>();
    m(0, i) = inner3(v1, first[0], eps);
    m(1, i) = inner3(v1, first[1], eps);
    m(2, i) = inner3(v2, second[0], eps);
    m(3, i) = inner3(v2, second[1], eps);
  }
  return m.determinant();
}

double kaehler_form(int which, const Vec6& point, const Vec6& v, const Vec6& w, Epsilon eps) {
  return inner6(product_j_raw(which, point, v, eps), w, eps);
}

}  // namespace pmc
