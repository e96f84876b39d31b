// SPDX-License-Identifier: Apache-2.0
//
// Signature-aware linear algebra on the quadric models of S^2 and H^2 and on
// their products.
//
// S^2 = { x in R^3 : x1^2 + x2^2 + x3^2 = 1 } with the Euclidean metric.
// H^2 = { x in R^3_1 : x1^2 + x2^2 - x3^2 = -1, x3 > 0 } (upper sheet).
//
// The complex structure on either factor is J v = D (p x v) with
// D = diag(1, 1, eps). At p = (0,0,1) this gives J e1 = e2 for both signs.
#pragma once

#include <Eigen/Dense>

#include <array>

#include "pmc/errors.hpp"

namespace pmc {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

inline constexpr double kTangencyTol = 1e-8;
inline constexpr double kQuadricTol = 1e-10;

/// Curvature sign of the factor: +1 for S^2, -1 for H^2.
class Epsilon {
 public:
  constexpr Epsilon() = default;
  explicit Epsilon(int value);

  static constexpr Epsilon sphere() { return Epsilon(Tag{}, 1); }
  static constexpr Epsilon hyperbolic() { return Epsilon(Tag{}, -1); }

  constexpr int value() const { return value_; }
  constexpr double sign() const { return static_cast<double>(value_); }
  constexpr bool is_sphere() const { return value_ == 1; }

  friend constexpr bool operator==(Epsilon a, Epsilon b) { return a.value_ == b.value_; }

 private:
  struct Tag {};
  constexpr Epsilon(Tag, int v) : value_(v) {}
  int value_ = 1;
};

/// <v, w>_eps on R^3: Euclidean for eps=+1, Lorentz (+,+,-) for eps=-1.
inline double inner3(const Vec3& v, const Vec3& w, Epsilon eps) {
  return v[0] * w[0] + v[1] * w[1] + eps.sign() * v[2] * w[2];
}

/// A point of M^2(eps) in its quadric model.
class FactorPoint {
 public:
  /// Validates <p,p>_eps = eps (and x3 > 0 on H^2).
  FactorPoint(const Vec3& coords, Epsilon eps, double tol = kQuadricTol);

  /// Rescales an approximate point back to the quadric.
  static FactorPoint project(const Vec3& coords, Epsilon eps);

  const Vec3& coords() const { return coords_; }
  Epsilon eps() const { return eps_; }

 private:
  FactorPoint(const Vec3& coords, Epsilon eps, std::nullptr_t) : coords_(coords), eps_(eps) {}
  Vec3 coords_;
  Epsilon eps_;
};

class ProductPoint {
 public:
  ProductPoint(const FactorPoint& first, const FactorPoint& second);

  const FactorPoint& first() const { return first_; }
  const FactorPoint& second() const { return second_; }
  Epsilon eps() const { return first_.eps(); }
  Vec6 coords() const;
  /// The normal vector (phi, -psi) of M^2 x M^2 inside R^6.
  Vec6 hat() const;

 private:
  FactorPoint first_;
  FactorPoint second_;
};

/// A free vector of R^6 (eps=+1) or R^6_2 (eps=-1).
struct AmbientVector {
  Vec6 coords = Vec6::Zero();
  Epsilon eps;

  Vec3 first() const { return coords.head<3>(); }
  Vec3 second() const { return coords.tail<3>(); }
};

/// Product metric; throws UsageError on mismatched signatures.
double inner(const AmbientVector& v, const AmbientVector& w);

/// Same, on raw coordinates.
inline double inner6(const Vec6& v, const Vec6& w, Epsilon eps) {
  return inner3(v.head<3>(), w.head<3>(), eps) + inner3(v.tail<3>(), w.tail<3>(), eps);
}

/// Rotation by +90 degrees in T_p M^2(eps). No tangency check.
Vec3 rotate_tangent(const Vec3& p, const Vec3& v, Epsilon eps);

/// J v at p; throws PreconditionError if v is not tangent within `tol`.
Vec3 factor_j(const FactorPoint& p, const Vec3& v, double tol = kTangencyTol);

/// J_1 = (J, J) or J_2 = (J, -J) applied blockwise.
AmbientVector product_j(int which, const ProductPoint& p, const AmbientVector& v,
                        double tol = kTangencyTol);

/// Unchecked blockwise J_1 / J_2 on raw coordinates.
Vec6 product_j_raw(int which, const Vec6& point, const Vec6& v, Epsilon eps);

/// Orthogonal projection of v onto T_p M^2(eps).
Vec3 project_to_factor_tangent(const Vec3& p, const Vec3& v, Epsilon eps);

/// An orthonormal, positively oriented basis (a, J a) of T_p M^2(eps).
std::array<Vec3, 2> factor_tangent_basis(const Vec3& p, Epsilon eps);

/// The orientation 4-form pi_1^* omega ^ pi_2^* omega evaluated on four
/// tangent vectors of M^2 x M^2 at `point`.
double product_volume_form(const Vec6& point, Epsilon eps, const std::array<Vec6, 4>& vs);

/// omega_j(v, w) = <J_j v, w>.
double kaehler_form(int which, const Vec6& point, const Vec6& v, const Vec6& w, Epsilon eps);

}  // namespace pmc
