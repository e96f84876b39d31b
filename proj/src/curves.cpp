// SPDX-License-Identifier: Apache-2.0
#include "pmc/curves.hpp"

#include <algorithm>
#include <cmath>

#include "pmc/errors.hpp"

namespace pmc {

double signed_curvature(const CurveJet& c, Epsilon eps) {
  const double speed = std::sqrt(inner3(c.d1, c.d1, eps));
  return inner3(c.d2, rotate_tangent(c.p, c.d1, eps), eps) / (speed * speed * speed);
}

CurveType classify_constant_curvature(Epsilon eps, double k) {
  if (k == 0.0) return CurveType::kGeodesic;
  if (eps.is_sphere()) return CurveType::kGeodesicCircle;
  const double ak = std::abs(k);
  if (ak > 1.0) return CurveType::kGeodesicCircle;
  if (ak < 1.0) return CurveType::kHypercycle;
  return CurveType::kHorocycle;
}

CurveJet constant_curvature_jet(Epsilon eps, double k, double s) {
  const auto c = constant_curvature_point(eps, k, Jet2::variable_x(s));
  CurveJet out;
  for (int i = 0; i < 3; ++i) {
    out.p[i] = c[i].v;
    out.d1[i] = c[i].dx;
    out.d2[i] = c[i].dxx;
  }
  return out;
}

FactorPoint constant_curvature_curve(Epsilon eps, double k, double s) {
  return FactorPoint::project(constant_curvature_jet(eps, k, s).p, eps);
}

SampledCurve::SampledCurve(CurveSpec spec, double x0, double x1, double step)
    : spec_(std::move(spec)), x0_(x0), step_(step) {
  if (!(step > 0.0) || !(x1 >= x0)) throw DomainError("integrate_curve: bad span or step");
  const Epsilon eps = spec_.eps;
  FactorPoint check(spec_.p0, eps, 1e-10);
  (void)check;
  if (std::abs(inner3(spec_.p0, spec_.t0, eps)) > kTangencyTol ||
      std::abs(inner3(spec_.t0, spec_.t0, eps) - 1.0) > kTangencyTol) {
    throw PreconditionError("integrate_curve: T0 must be a unit tangent at p0");
  }
  const int n = static_cast<int>(std::floor((x1 - x0) / step + 1e-9));
  Frame f{spec_.p0, spec_.t0};
  p_.push_back(f.p);
  t_.push_back(f.t);
  for (int i = 0; i < n; ++i) {
    const double x = x0_ + i * step_;
    for (int k = 0; k < substeps_; ++k) {
      Frame g = advance(f, x + k * step_ / substeps_, step_ / substeps_);
      Frame h = normalize(g);
      defect_ = std::max(defect_, std::abs(inner3(g.p, g.p, eps) - eps.sign()));
      defect_ = std::max(defect_, std::abs(inner3(g.t, g.t, eps) - 1.0));
      f = h;
    }
    p_.push_back(f.p);
    t_.push_back(f.t);
  }
}

SampledCurve::Frame SampledCurve::normalize(Frame f) const {
  const Epsilon eps = spec_.eps;
  f.p = FactorPoint::project(f.p, eps).coords();
  f.t = project_to_factor_tangent(f.p, f.t, eps);
  f.t /= std::sqrt(inner3(f.t, f.t, eps));
  return f;
}

SampledCurve::Frame SampledCurve::advance(Frame f, double x, double dx) const {
  const Epsilon eps = spec_.eps;
  auto rhs = [&](const Frame& g, double xx) {
    const double s = spec_.speed(xx).f;
    if (!(s > 0.0)) throw DomainError("integrate_curve: speed must be positive");
    const double k = spec_.curvature(xx);
    const Vec3 n = rotate_tangent(g.p, g.t, eps);
    return Frame{s * g.t, s * k * n - eps.sign() * s * g.p};
  };
  auto axpy = [](const Frame& a, double h, const Frame& d) { return Frame{a.p + h * d.p, a.t + h * d.t}; };
  const Frame k1 = rhs(f, x);
  const Frame k2 = rhs(axpy(f, 0.5 * dx, k1), x + 0.5 * dx);
  const Frame k3 = rhs(axpy(f, 0.5 * dx, k2), x + 0.5 * dx);
  const Frame k4 = rhs(axpy(f, dx, k3), x + dx);
  return Frame{f.p + dx / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
               f.t + dx / 6.0 * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t)};
}

CurveJet SampledCurve::at(double x) const {
  if (x < x_min() - 1e-12 || x > x_max() + 1e-12) throw DomainError("curve evaluated outside its span");
  const auto i = static_cast<std::size_t>(
      std::clamp(std::lround((x - x0_) / step_), 0L, static_cast<long>(p_.size()) - 1));
  Frame f{p_[i], t_[i]};
  const double xi = x0_ + static_cast<double>(i) * step_;
  const double dx = x - xi;
  if (dx != 0.0) {
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(dx) / (step_ / substeps_))));
    for (int k = 0; k < n; ++k) f = normalize(advance(f, xi + k * dx / n, dx / n));
  }
  const Epsilon eps = spec_.eps;
  const Univariate s = spec_.speed(x);
  const double k = spec_.curvature(x);
  const Vec3 n = rotate_tangent(f.p, f.t, eps);
  return CurveJet{f.p, s.f * f.t, s.df * f.t + s.f * s.f * (k * n - eps.sign() * f.p)};
}

SampledCurve integrate_curve(const CurveSpec& spec, double x0, double x1, double step) {
  return SampledCurve(spec, x0, x1, step);
}

}  // namespace pmc
