// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pmc/curves.hpp"
#include "pmc/errors.hpp"

namespace pmc {
namespace {

const Epsilon kS = Epsilon::sphere();
const Epsilon kH = Epsilon::hyperbolic();

// Curvature from centred differences of positions only.
double fd_curvature(const std::function<Vec3(double)>& c, double s, Epsilon eps, double h) {
  CurveJet j;
  j.p = c(s);
  j.d1 = (c(s + h) - c(s - h)) / (2 * h);
  j.d2 = (c(s + h) - 2.0 * c(s) + c(s - h)) / (h * h);
  return signed_curvature(j, eps);
}

TEST(Curves, ConstantCurvatureCatalog) {
  struct Case {
    Epsilon eps;
    double k;
    CurveType type;
  };
  const Case cases[] = {{kS, 0.75, CurveType::kGeodesicCircle}, {kS, -2.0, CurveType::kGeodesicCircle},
                        {kS, 0.0, CurveType::kGeodesic},        {kH, 1.4, CurveType::kGeodesicCircle},
                        {kH, -3.0, CurveType::kGeodesicCircle}, {kH, 0.5, CurveType::kHypercycle},
                        {kH, -0.2, CurveType::kHypercycle},     {kH, 1.0, CurveType::kHorocycle},
                        {kH, -1.0, CurveType::kHorocycle},      {kH, 0.0, CurveType::kGeodesic}};
  for (const Case& c : cases) {
    EXPECT_EQ(classify_constant_curvature(c.eps, c.k), c.type);
    for (double s : {-1.3, 0.0, 0.4, 2.2}) {
      const FactorPoint p = constant_curvature_curve(c.eps, c.k, s);
      EXPECT_NEAR(inner3(p.coords(), p.coords(), c.eps), c.eps.sign(), 1e-12);
      const CurveJet j = constant_curvature_jet(c.eps, c.k, s);
      EXPECT_NEAR(inner3(j.d1, j.d1, c.eps), 1.0, 1e-12);
      EXPECT_NEAR(signed_curvature(j, c.eps), c.k, 1e-10);
      auto pos = [&](double t) { return constant_curvature_jet(c.eps, c.k, t).p; };
      EXPECT_NEAR(fd_curvature(pos, s, c.eps, 1e-4), c.k, 1e-6);
    }
  }
}

TEST(Curves, SphereCircleAtHeightPointSix) {
  const double k = 0.6 / std::sqrt(1 - 0.36);
  for (double s : {0.0, 1.0, 2.0}) EXPECT_NEAR(constant_curvature_curve(kS, k, s).coords()[2], 0.6, 1e-14);
}

TEST(Curves, HorocycleLiesOnNullPlane) {
  for (double s : {-2.0, 0.0, 1.5}) {
    const Vec3 p = constant_curvature_curve(kH, 1.0, s).coords();
    EXPECT_NEAR(p[0] - p[2], -1.0, 1e-13);
  }
}

TEST(Curves, GreatCircleFromFrenetIntegration) {
  CurveSpec spec{kS, [](double) { return Univariate{1.0, 0.0, 0.0}; }, [](double) { return 0.0; },
                 Vec3(1, 0, 0), Vec3(0, 1, 0)};
  const SampledCurve c = integrate_curve(spec, 0.0, 3.0, 1e-2);
  for (double x : {0.0, 0.5, 1.234, 3.0}) {
    EXPECT_NEAR((c.at(x).p - Vec3(std::cos(x), std::sin(x), 0.0)).norm(), 0.0, 1e-10);
  }
}

TEST(Curves, RejectsBadInitialFrameAndSpeed) {
  CurveSpec bad{kS, [](double) { return Univariate{1.0, 0.0, 0.0}; }, [](double) { return 0.0; },
                Vec3(0, 0, 1), Vec3(0, 0, 1)};
  EXPECT_THROW(integrate_curve(bad, 0, 1, 0.1), PreconditionError);
  CurveSpec slow{kS, [](double) { return Univariate{0.0, 0.0, 0.0}; }, [](double) { return 0.0; }};
  EXPECT_THROW(integrate_curve(slow, 0, 1, 0.1), DomainError);
}

// Profile-driven speed and curvature of the psi curve for (eps,a,b,c)=(-1,-2,1,0).
TEST(Curves, ProfileDrivenCurveMatchesSpeedAndCurvature) {
  const auto prm = ProfileParams::make(kH, -2, 1, 0);
  const auto h = closed_form(ClosedFormKind::kSinhFamily, prm);
  auto speed = [h](double x) {
    const Univariate v = h->at(x);
    const double s = std::sqrt(1.0 + v.f * v.f);
    return Univariate{s, v.f * v.df / s, 0.0};
  };
  auto curv = [h, speed](double x) {
    const double s = speed(x).f;
    const double hv = h->at(x).f;
    return (-2.0 - hv * hv) / (s * s * s);  // -eps b (a - h^2) / s^3
  };
  const SampledCurve c = integrate_curve(CurveSpec{kH, speed, curv}, -1.0, 1.0, 1e-2);
  EXPECT_LE(c.constraint_defect(), 1e-8);
  for (double x = -0.95; x < 0.95; x += 0.0917) {
    const CurveJet j = c.at(x);
    EXPECT_NEAR(inner3(j.p, j.p, kH), -1.0, 1e-8);
    EXPECT_NEAR(inner3(j.d1, j.d1, kH), 1.0 + 2.0 * std::pow(std::sinh(x), 2), 1e-8);
    EXPECT_NEAR(signed_curvature(j, kH), curv(x), 1e-8);
    auto pos = [&](double t) { return c.at(t).p; };
    EXPECT_NEAR(fd_curvature(pos, x, kH, 1e-3), curv(x), 1e-5);
  }
}

TEST(Curves, CurvatureRoundTripOnRandomSpecs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 20; ++n) {
    const Epsilon eps = n % 2 ? kS : kH;
    const double s0 = 1.0 + 0.5 * std::abs(u(rng)), s1 = 0.3 * u(rng), k0 = 2 * u(rng), k1 = u(rng),
                 k2 = u(rng);
    auto speed = [=](double x) { return Univariate{s0 + s1 * std::sin(x), s1 * std::cos(x), 0.0}; };
    auto curv = [=](double x) { return k0 + k1 * x + k2 * std::cos(2 * x); };
    const SampledCurve c = integrate_curve(CurveSpec{eps, speed, curv}, -1.0, 1.0, 5e-3);
    double worst = 0.0;
    for (double x = -0.9; x <= 0.9; x += 0.05) {
      auto pos = [&](double t) { return c.at(t).p; };
      worst = std::max(worst, std::abs(fd_curvature(pos, x, eps, 1e-3) - curv(x)));
    }
    EXPECT_LE(worst, 1e-5) << "spec " << n;
    EXPECT_LE(c.constraint_defect(), 1e-8);
  }
}

}  // namespace
}  // namespace pmc
