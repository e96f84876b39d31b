// SPDX-License-Identifier: Apache-2.0
//
// Curves in M^2(eps). Curvature is signed by k = <c'', J c'> / |c'|^3 with the
// complex structure of ambient.hpp.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "pmc/ambient.hpp"
#include "pmc/jet.hpp"
#include "pmc/profile_ode.hpp"

namespace pmc {

/// Value and first two derivatives of a curve at one parameter value.
struct CurveJet {
  Vec3 p;
  Vec3 d1;
  Vec3 d2;
};

double signed_curvature(const CurveJet& c, Epsilon eps);

enum class CurveType { kGeodesicCircle, kGeodesic, kHypercycle, kHorocycle };

CurveType classify_constant_curvature(Epsilon eps, double k);

/// Unit-speed curve of constant curvature k, written for any scalar type
/// (double or Jet2). Circles are centred on the x3 axis, hypercycles sit on
/// x1 = const, horocycles on x1 - x3 = -1; all pass through or near (0,0,1).
template <class S>
std::array<S, 3> constant_curvature_point(Epsilon eps, double k, const S& s) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  if (eps.is_sphere()) {
    const double r = 1.0 / std::sqrt(1.0 + k * k);
    const double z0 = k * r;
    return {r * cos(s / r), r * sin(s / r), S(z0)};
  }
  const double ak = std::abs(k);
  if (ak > 1.0) {
    const double r = 1.0 / std::sqrt(k * k - 1.0);
    const double sigma = k > 0.0 ? 1.0 : -1.0;
    return {r * cos(s / r), sigma * r * sin(s / r), S(ak * r)};
  }
  if (ak < 1.0) {
    const double rr = 1.0 / std::sqrt(1.0 - k * k);
    const double b = k * rr;
    return {S(b), rr * sinh(s / rr), rr * cosh(s / rr)};
  }
  const double tau = -k;
  return {0.5 * s * s, tau * s, 0.5 * s * s + 1.0};
}

/// Point of the constant-curvature curve at arclength s.
FactorPoint constant_curvature_curve(Epsilon eps, double k, double s);
CurveJet constant_curvature_jet(Epsilon eps, double k, double s);

struct CurveSpec {
  Epsilon eps;
  std::function<Univariate(double)> speed;   // s(x) > 0 and s'(x)
  std::function<double(double)> curvature;   // k(x)
  Vec3 p0 = Vec3(0.0, 0.0, 1.0);
  Vec3 t0 = Vec3(1.0, 0.0, 0.0);
};

/// psi' = s T, T' = s k N - eps s psi, N = J T; stored on a uniform grid and
/// evaluated elsewhere by RK4 from the nearest node.
class SampledCurve {
 public:
  SampledCurve(CurveSpec spec, double x0, double x1, double step);

  CurveJet at(double x) const;
  double x_min() const { return x0_; }
  double x_max() const { return x0_ + step_ * static_cast<double>(p_.size() - 1); }
  double step() const { return step_; }
  const std::vector<Vec3>& points() const { return p_; }
  const std::vector<Vec3>& tangents() const { return t_; }
  const CurveSpec& spec() const { return spec_; }
  /// Largest |<psi,psi> - eps| and frame Gram defect seen while integrating.
  double constraint_defect() const { return defect_; }

 private:
  struct Frame {
    Vec3 p;
    Vec3 t;
  };
  Frame advance(Frame f, double x, double dx) const;
  Frame normalize(Frame f) const;

  CurveSpec spec_;
  double x0_;
  double step_;
  int substeps_ = 4;
  std::vector<Vec3> p_;
  std::vector<Vec3> t_;
  double defect_ = 0.0;
};

SampledCurve integrate_curve(const CurveSpec& spec, double x0, double x1, double step);

}  // namespace pmc
