// SPDX-License-Identifier: Apache-2.0
#include "pmc/families.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pmc/elliptic.hpp"
#include "pmc/errors.hpp"

namespace pmc {

namespace {

using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::sin;
using std::sinh;
using std::sqrt;

constexpr double kCurveStep = 5e-3;

void require_span(const ProfileFunction& h, const Domain& ev) {
  if (h.x_min() > ev.x0 + 1e-12 || h.x_max() < ev.x1 - 1e-12) {
    std::ostringstream msg;
    msg << "profile span [" << h.x_min() << ", " << h.x_max() << "] does not cover [" << ev.x0 << ", " << ev.x1
        << "]";
    throw DomainError(msg.str());
  }
}

// Checks eps(a - h^2) > floor on a fine sample of [x0, x1].
void require_band(const ProfileFunction& h, const ProfileParams& prm, double floor, double x0, double x1,
                  const char* what) {
  constexpr int kSamples = 400;
  for (int i = 0; i <= kSamples; ++i) {
    const double x = x0 + (x1 - x0) * i / kSamples;
    const double v = h.at(x).f;
    if (!(prm.eps.sign() * (prm.a - v * v) > floor)) {
      std::ostringstream msg;
      msg << what << " fails at x = " << x;
      throw DomainError(msg.str());
    }
  }
}

template <class S>
S lift_component(const CurveJet& c, int k, const S& x) {
  return lift(Univariate{c.p[k], c.d1[k], c.d2[k]}, x);
}

std::vector<std::pair<std::string, double>> profile_params(const ProfileParams& prm) {
  return {{"eps", prm.eps.sign()}, {"a", prm.a}, {"b", prm.b}, {"c", prm.c}};
}

template <class S>
struct JacobiTriple {
  S sn, cn, dn;
};

template <class S>
JacobiTriple<S> jacobi_lift(const S& x, const EllipticModulus& m) {
  const JacobiValues j = jacobi_sncndn(value_of(x), m);
  const double k2 = m.parameter();
  const Univariate sn{j.sn, j.cn * j.dn, -j.sn * (j.dn * j.dn + k2 * j.cn * j.cn)};
  const Univariate cn{j.cn, -j.sn * j.dn, -j.cn * (j.dn * j.dn - k2 * j.sn * j.sn)};
  const Univariate dn{j.dn, -k2 * j.sn * j.cn, -k2 * j.dn * (j.cn * j.cn - j.sn * j.sn)};
  return {lift(sn, x), lift(cn, x), lift(dn, x)};
}

}  // namespace

double circle_curvature_from_height(Epsilon eps, double height) {
  if (eps.is_sphere()) {
    if (!(std::abs(height) < 1.0)) throw DomainError("circle height on S^2 must satisfy |x3| < 1");
    return height / std::sqrt(1.0 - height * height);
  }
  if (!(height > 1.0)) throw DomainError("circle height on H^2 must exceed 1");
  return height / std::sqrt(height * height - 1.0);
}

double hypercycle_curvature_from_offset(double offset) { return offset / std::sqrt(1.0 + offset * offset); }

ImmersionChart product_of_curves(Epsilon eps, double k_alpha, double k_beta, Domain d, bool require_pmc) {
  if (require_pmc && k_alpha == 0.0 && k_beta == 0.0) {
    throw PreconditionError("product of two geodesics is minimal, H null");
  }
  ImmersionChart chart;
  chart.family = "curves";
  chart.params = {{"eps", eps.sign()}, {"ka", k_alpha}, {"kb", k_beta}};
  chart.target = Target::product();
  chart.eps = eps;
  chart.domain = d;
  // Both curves are defined for every parameter value.
  chart.pad = std::numeric_limits<double>::infinity();
  // Two closed curves give a doubly periodic chart.
  auto circle_period = [eps](double k) {
    return eps.is_sphere() || classify_constant_curvature(eps, k) == CurveType::kGeodesicCircle
               ? 2.0 * std::numbers::pi / std::sqrt(std::abs(k * k + eps.sign()))
               : 0.0;
  };
  const double pa = circle_period(k_alpha), pb = circle_period(k_beta);
  if (pa > 0.0 && pb > 0.0) chart.periods = Periods{pa, pb};
  attach_generic_map(chart, [eps, k_alpha, k_beta](const auto& x, const auto& y) {
    using S = std::decay_t<decltype(x)>;
    const auto a = constant_curvature_point<S>(eps, k_alpha, x);
    const auto b = constant_curvature_point<S>(eps, k_beta, y);
    return std::array<S, 6>{a[0], a[1], a[2], b[0], b[1], b[2]};
  });
  return chart;
}

std::shared_ptr<const ProfileFunction> default_profile(const ProfileParams& prm, double x0, double x1) {
  const double e = prm.eps.sign();
  const bool c0 = std::abs(prm.c) <= 1e-12;
  if (e < 0 && c0 && std::abs(prm.b - 1.0) <= 1e-12 && prm.a <= -1.0) {
    return closed_form(ClosedFormKind::kSinhFamily, prm);
  }
  if (e > 0 && c0 && prm.b < prm.a) return closed_form(ClosedFormKind::kSnFamily, prm);
  if (e < 0 && c0 && std::abs(prm.a + 1.0) <= 1e-12 && prm.b < 1.0) {
    return closed_form(ClosedFormKind::kTanFamily, prm);
  }
  auto ok = [&](double h0) { return e * profile_p(prm, h0) > 0.0 && profile_pq(prm, h0) > 0.0; };
  double h0 = 0.0;
  if (!ok(h0)) {
    // Scan outward for an admissible start with h' != 0.
    bool found = false;
    for (int i = 1; i <= 4000 && !found; ++i) {
      for (double s : {1.0, -1.0}) {
        const double t = s * i * 1e-3;
        if (ok(t)) {
          h0 = t;
          found = true;
          break;
        }
      }
    }
    if (!found) throw DomainError("no admissible initial value for the profile equation");
  }
  ProfileSolution sol = solve_profile(prm, h0, +1, std::min(x0, 0.0), std::max(x1, 0.0), 1e-2);
  return std::make_shared<SampledProfile>(std::move(sol));
}

ImmersionChart pmc_profile_family(const ProfileParams& prm, std::shared_ptr<const ProfileFunction> h, Domain d,
                                  double pad) {
  const double e = prm.eps.sign();
  if (prm.a <= 0.0 && e > 0) throw DomainError("a <= 0 requires eps = -1");
  const Domain ev = d.grown(pad);
  require_span(*h, ev);
  require_band(*h, prm, 0.0, ev.x0, ev.x1, "eps(a - h^2) > 0");

  const double a = prm.a, b = prm.b, c = prm.c;
  auto speed = [h, b, c](double x) {
    const Univariate v = h->at(x);
    const double s = std::sqrt(b * (1.0 + (v.f - c) * (v.f - c)));
    return Univariate{s, b * (v.f - c) * v.df / s, 0.0};
  };
  auto curvature = [h, speed, a, b, e](double x) {
    const double s = speed(x).f;
    const double v = h->at(x).f;
    return -e * b * (a - v * v) / (s * s * s);
  };
  auto curve = std::make_shared<SampledCurve>(CurveSpec{prm.eps, speed, curvature}, ev.x0, ev.x1, kCurveStep);

  ImmersionChart chart;
  chart.family = "prop4";
  chart.params = profile_params(prm);
  chart.notes = {"profile: " + h->describe(), "psi starts at (0,0,1) with tangent (1,0,0) at x = left edge"};
  chart.target = Target::product();
  chart.eps = prm.eps;
  chart.domain = d;
  chart.pad = pad;
  attach_generic_map(chart, [h, curve, a, e](const auto& x, const auto& y) {
    using S = std::decay_t<decltype(x)>;
    const S hv = lift(h->at(value_of(x)), x);
    std::array<S, 6> out;
    if (a > 0.0) {
      const double ra = std::sqrt(a);
      const S w = sqrt(e * (a - hv * hv)) / ra;
      out[0] = w * cos(ra * y);
      out[1] = w * sin(ra * y);
      out[2] = hv / ra;
    } else if (a < 0.0) {
      const double ra = std::sqrt(-a);
      const S w = sqrt(hv * hv - a) / ra;
      out[0] = hv / ra;
      out[1] = w * sinh(ra * y);
      out[2] = w * cosh(ra * y);
    } else {
      const S h2 = hv * hv;
      const S inv = 1.0 / (2.0 * hv);
      out[0] = ((y * y - 1.0) * h2 + 1.0) * inv;
      out[1] = 2.0 * y * h2 * inv;
      out[2] = ((y * y + 1.0) * h2 + 1.0) * inv;
    }
    const CurveJet cj = curve->at(value_of(x));
    for (int k = 0; k < 3; ++k) out[3 + k] = lift_component(cj, k, x);
    return out;
  });
  return chart;
}

ImmersionChart pmc_profile_family(const ProfileParams& prm, const ProfileSolution& h, Domain d, double pad) {
  if (!h.nonconstant) {
    // A constant profile still defines the product-of-curves member.
  }
  return pmc_profile_family(prm, std::make_shared<SampledProfile>(h), d, pad);
}

ImmersionChart pmc_phi0(double hnorm, Domain d, double pad) {
  if (!(hnorm > 0.0 && 4.0 * hnorm * hnorm < 1.0)) throw DomainError("phi0 needs 0 < |H| < 1/2");
  const Domain ev = d.grown(pad);
  if (!(ev.x0 > -0.5 * std::numbers::pi && ev.x1 < 0.5 * std::numbers::pi)) {
    throw DomainError("phi0 lives on |x| < pi/2 (including the stencil pad)");
  }
  const double w = std::sqrt(1.0 - 4.0 * hnorm * hnorm);
  auto speed = [hnorm, w](double x) {
    const double s = 2.0 * hnorm / (w * std::cos(x));
    return Univariate{s, s * std::tan(x), 0.0};
  };
  auto curvature = [hnorm](double x) { return -std::cos(x) / (2.0 * hnorm); };
  auto curve = std::make_shared<SampledCurve>(CurveSpec{Epsilon::hyperbolic(), speed, curvature}, ev.x0, ev.x1,
                                              kCurveStep);
  ImmersionChart chart;
  chart.family = "phi0";
  chart.params = {{"eps", -1.0}, {"hnorm", hnorm}};
  chart.notes = {"psi0 starts at (0,0,1) with tangent (1,0,0) at x = left edge"};
  chart.target = Target::product();
  chart.eps = Epsilon::hyperbolic();
  chart.domain = d;
  chart.pad = pad;
  attach_generic_map(chart, [curve, w](const auto& x, const auto& y) {
    using S = std::decay_t<decltype(x)>;
    const S sec = 1.0 / cos(x);
    const S yy = y / w;
    const CurveJet cj = curve->at(value_of(x));
    return std::array<S, 6>{sin(x) * sec,          sinh(yy) * sec,         cosh(yy) * sec,
                            lift_component(cj, 0, x), lift_component(cj, 1, x), lift_component(cj, 2, x)};
  });
  return chart;
}

ImmersionChart cmc_profile_family(const ProfileParams& prm, std::shared_ptr<const ProfileFunction> h, Domain d,
                                  double pad) {
  const double e = prm.eps.sign();
  const double a = prm.a, b = prm.b, c = prm.c;
  const double E = a - e * b;
  if (E <= 0.0 && e > 0) throw DomainError("E = a - eps b <= 0 requires eps = -1");
  const Domain ev = d.grown(pad);
  require_span(*h, ev);
  require_band(*h, prm, b, ev.x0, ev.x1, "eps(a - h^2) > b");

  auto f1 = std::make_shared<ProfileIntegral>(h, [c](double v) { return std::pair{v - c, 1.0}; }, d.x0);
  auto f2 = std::make_shared<ProfileIntegral>(
      h,
      [b, c, e, E](double v) {
        const double den = e * (E - v * v);
        return std::pair{b * (c - v) / den, (-b * den + 2.0 * e * b * v * (c - v)) / (den * den)};
      },
      d.x0);

  ImmersionChart chart;
  chart.family = "prop6";
  chart.params = profile_params(prm);
  chart.notes = {"profile: " + h->describe(), "integrals based at x0 = left edge of the domain"};
  chart.target = Target::line();
  chart.eps = prm.eps;
  chart.domain = d;
  chart.pad = pad;
  attach_generic_map(chart, [h, f1, f2, b, e, E](const auto& x, const auto& y) {
    using S = std::decay_t<decltype(x)>;
    const double xv = value_of(x);
    const S hv = lift(h->at(xv), x);
    const S f = y + lift(f2->at(xv), x);
    const S eta = std::sqrt(b) * (y + lift(f1->at(xv), x));
    std::array<S, 6> out{S(0.0), S(0.0), S(0.0), eta, S(0.0), S(0.0)};
    if (E > 0.0) {
      const double re = std::sqrt(E);
      const S w = sqrt(e * (E - hv * hv)) / re;
      out[0] = w * cos(re * f);
      out[1] = w * sin(re * f);
      out[2] = hv / re;
    } else if (E < 0.0) {
      const double re = std::sqrt(-E);
      const S w = sqrt(hv * hv - E) / re;
      out[0] = hv / re;
      out[1] = w * sinh(re * f);
      out[2] = w * cosh(re * f);
    } else {
      const S inv2 = 1.0 / (hv * hv);
      out[0] = hv * (f * f - 0.25 + inv2);
      out[1] = hv * f;
      out[2] = hv * (f * f + 0.25 + inv2);
    }
    return out;
  });
  return chart;
}

ImmersionChart cmc_profile_family(const ProfileParams& prm, const ProfileSolution& h, Domain d, double pad) {
  return cmc_profile_family(prm, std::make_shared<SampledProfile>(h), d, pad);
}

ImmersionChart cmc_psi_lambda(double lambda, Domain d, double pad) {
  if (!(lambda > 0.0)) throw DomainError("Psi_lambda needs lambda > 0");
  ImmersionChart chart;
  chart.family = "psi_lambda";
  chart.params = {{"eps", -1.0}, {"lambda", lambda}};
  chart.target = Target::line();
  chart.eps = Epsilon::hyperbolic();
  chart.domain = d;
  chart.pad = pad;
  const double s = std::sqrt(1.0 + lambda * lambda);
  attach_generic_map(chart, [lambda, s](const auto& x, const auto& y) {
    using S = std::decay_t<decltype(x)>;
    const double m = s / lambda;
    return std::array<S, 6>{m * sinh(x),
                            m * (cosh(x) * sinh(y) + cosh(y) / s),
                            m * (cosh(x) * cosh(y) + sinh(y) / s),
                            (y + s * cosh(x)) / lambda,
                            S(0.0),
                            S(0.0)};
  });
  return chart;
}

ImmersionChart cmc_leite(double hvalue, Domain d, double pad) {
  if (!(hvalue > 0.0 && hvalue < 0.5)) throw DomainError("Leite plane needs 0 < H < 1/2");
  if (!(d.grown(pad).x0 > -0.5 * std::numbers::pi && d.grown(pad).x1 < 0.5 * std::numbers::pi)) {
    throw DomainError("Leite plane lives on |x| < pi/2 (including the stencil pad)");
  }
  ImmersionChart chart;
  chart.family = "leite";
  chart.params = {{"eps", -1.0}, {"hnorm", hvalue}};
  chart.target = Target::line();
  chart.eps = Epsilon::hyperbolic();
  chart.domain = d;
  chart.pad = pad;
  const double w = std::sqrt(1.0 - 4.0 * hvalue * hvalue);
  const double h2 = 2.0 * hvalue * hvalue;
  attach_generic_map(chart, [w, h2, hvalue](const auto& x, const auto& y) {
    using S = std::decay_t<decltype(x)>;
    const S cx = cos(x);
    const S ey = exp(-y);
    return std::array<S, 6>{sin(x) / cx / w,
                            (sinh(y) / cx + h2 * ey * cx) / w,
                            (cosh(y) / cx - h2 * ey * cx) / w,
                            2.0 * hvalue / w * (y - log(cx)),
                            S(0.0),
                            S(0.0)};
  });
  return chart;
}

TorusCharts cmc_torus(double a, double b) {
  if (!(0.0 < b && b < a)) throw DomainError("torus needs 0 < b < a");
  const double kappa = std::sqrt((a - b) / (a * (1.0 + b)));
  const EllipticModulus m(kappa);
  const double r = std::sqrt(b) / std::sqrt(a - b);
  const Periods per{4.0 * complete_k(m), 2.0 * std::numbers::pi / kappa};
  const Domain fundamental{0.0, per.x, 0.0, per.y};

  auto height = [m, a, b, kappa](const auto& x, const auto& y) {
    const auto j = jacobi_lift(x, m);
    return std::sqrt(b) / std::sqrt(1.0 + b) * log(j.dn - kappa * j.cn) + std::sqrt(b) / std::sqrt(a * (1.0 + b)) * y;
  };
  auto first = [m, a, b, kappa](const auto& x, const auto& y) {
    using S = std::decay_t<decltype(x)>;
    const auto j = jacobi_lift(x, m);
    const S ky = kappa * y;
    const double ra = std::sqrt(a), n = std::sqrt(1.0 + a);
    return std::array<S, 3>{(ra * j.dn * cos(ky) - j.cn * sin(ky)) / n, (ra * j.dn * sin(ky) + j.cn * cos(ky)) / n,
                            j.sn / std::sqrt(1.0 + b)};
  };

  TorusCharts out;
  out.kappa = kappa;
  out.radius = r;
  out.periods = per;

  ImmersionChart base;
  base.params = {{"eps", 1.0}, {"a", a}, {"b", b}};
  base.eps = Epsilon::sphere();
  base.domain = fundamental;
  base.pad = 0.5;

  out.line = base;
  out.line.family = "torus_line";
  out.line.target = Target::line();
  attach_generic_map(out.line, [first, height](const auto& x, const auto& y) {
    using S = std::decay_t<decltype(x)>;
    const auto p = first(x, y);
    return std::array<S, 6>{p[0], p[1], p[2], height(x, y), S(0.0), S(0.0)};
  });

  out.circle = base;
  out.circle.family = "torus";
  out.circle.target = Target::circle(r);
  out.circle.periods = per;
  out.circle.notes = {"fundamental domain [0, 4K] x [0, 2 pi / kappa]"};
  attach_generic_map(out.circle, [first, height, r](const auto& x, const auto& y) {
    using S = std::decay_t<decltype(x)>;
    const auto p = first(x, y);
    const S t = height(x, y) / r;
    return std::array<S, 6>{p[0], p[1], p[2], r * cos(t), r * sin(t), S(0.0)};
  });
  return out;
}

ImmersionChart geodesic_inclusion(const ImmersionChart& src) {
  ImmersionChart out = src;
  out.family = "lift:" + src.family;
  out.target = Target::product();
  if (src.target.kind == TargetKind::kFactorTimesCircle) {
    if (!(src.eps.is_sphere() && std::abs(src.target.radius - 1.0) <= 1e-12)) {
      throw UsageError("geodesic_inclusion: only S^2 x S^1(1) sits in S^2 x S^2 as a totally geodesic slice");
    }
    // (q1, q2, 0) already lies on the equator of the second factor.
    return out;
  }
  if (src.target.kind != TargetKind::kFactorTimesLine) {
    throw UsageError("geodesic_inclusion expects a chart into M^2(eps) x R");
  }
  const bool sphere = src.eps.is_sphere();
  // Second-factor curve g(t) with g', g''.
  auto g = [sphere](double t) {
    std::array<Univariate, 3> c;
    if (sphere) {
      c[0] = {std::cos(t), -std::sin(t), -std::cos(t)};
      c[1] = {std::sin(t), std::cos(t), -std::sin(t)};
      c[2] = {0.0, 0.0, 0.0};
    } else {
      c[0] = {0.0, 0.0, 0.0};
      c[1] = {std::sinh(t), std::cosh(t), std::sinh(t)};
      c[2] = {std::cosh(t), std::sinh(t), std::cosh(t)};
    }
    return c;
  };
  auto base_eval = src.eval;
  out.eval = [base_eval, g](double x, double y) {
    Vec6 p = base_eval(x, y);
    const auto c = g(p[3]);
    for (int k = 0; k < 3; ++k) p[3 + k] = c[k].f;
    return p;
  };
  if (src.has_jet()) {
    auto base_jet = src.jet;
    out.jet = [base_jet, g](double x, double y) {
      ChartJet j = base_jet(x, y);
      const Jet2 t(j.p[3], j.dx[3], j.dy[3], j.dxx[3], j.dxy[3], j.dyy[3]);
      const auto c = g(t.v);
      std::array<Jet2, 3> lifted;
      for (int k = 0; k < 3; ++k) lifted[k] = t.compose(c[k].f, c[k].df, c[k].d2f);
      for (int k = 0; k < 3; ++k) {
        j.p[3 + k] = lifted[k].v;
        j.dx[3 + k] = lifted[k].dx;
        j.dy[3 + k] = lifted[k].dy;
        j.dxx[3 + k] = lifted[k].dxx;
        j.dxy[3 + k] = lifted[k].dxy;
        j.dyy[3 + k] = lifted[k].dyy;
      }
      return j;
    };
  } else {
    out.jet = nullptr;
  }
  return out;
}

ImmersionChart scale_height(const ImmersionChart& src, double factor) {
  if (src.target.kind != TargetKind::kFactorTimesLine) throw UsageError("scale_height expects M^2(eps) x R");
  ImmersionChart out = src;
  out.family = src.family + "*height";
  out.params.emplace_back("height_scale", factor);
  auto base_eval = src.eval;
  out.eval = [base_eval, factor](double x, double y) {
    Vec6 p = base_eval(x, y);
    p[3] *= factor;
    return p;
  };
  if (src.has_jet()) {
    auto base_jet = src.jet;
    out.jet = [base_jet, factor](double x, double y) {
      ChartJet j = base_jet(x, y);
      for (Vec6* v : {&j.p, &j.dx, &j.dy, &j.dxx, &j.dxy, &j.dyy}) (*v)[3] *= factor;
      return j;
    };
  }
  return out;
}

}  // namespace pmc
