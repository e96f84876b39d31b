// SPDX-License-Identifier: Apache-2.0
#include "pmc/diffgeo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmc/errors.hpp"

namespace pmc {

namespace {

using CVec6 = Eigen::Matrix<cplx, 6, 1>;
constexpr cplx kI{0.0, 1.0};
const double kSqrt2 = std::sqrt(2.0);

// Diagonal of the ambient metric restricted to the coordinates a target uses.
Vec6 metric_diag(const Target& t, Epsilon eps) {
  const double e = eps.sign();
  Vec6 d;
  switch (t.kind) {
    case TargetKind::kProduct: d << 1, 1, e, 1, 1, e; break;
    case TargetKind::kFactorTimesLine: d << 1, 1, e, 1, 0, 0; break;
    case TargetKind::kFactorTimesCircle: d << 1, 1, e, 1, 1, 0; break;
  }
  return d;
}

struct Metric {
  Vec6 d;
  double operator()(const Vec6& a, const Vec6& b) const { return (d.array() * a.array() * b.array()).sum(); }
  cplx operator()(const CVec6& a, const CVec6& b) const {
    cplx s = 0.0;
    for (int k = 0; k < 6; ++k) s += d[k] * a[k] * b[k];
    return s;
  }
  double norm(const Vec6& a) const { return std::sqrt(std::max(0.0, (*this)(a, a))); }
};

std::vector<Vec6> target_basis(const Target& t, Epsilon eps, const Vec6& p) {
  std::vector<Vec6> out;
  const auto first = factor_tangent_basis(p.head<3>(), eps);
  for (const Vec3& v : first) {
    Vec6 w = Vec6::Zero();
    w.head<3>() = v;
    out.push_back(w);
  }
  if (t.is_product()) {
    for (const Vec3& v : factor_tangent_basis(p.tail<3>(), eps)) {
      Vec6 w = Vec6::Zero();
      w.tail<3>() = v;
      out.push_back(w);
    }
  } else {
    out.push_back(vertical_field(t, p));
  }
  return out;
}

CVec6 complexify(const Vec6& re, const Vec6& im) {
  CVec6 out;
  for (int k = 0; k < 6; ++k) out[k] = cplx(re[k], im[k]);
  return out;
}

double wrapped_height(const Target& t, const Vec6& p) {
  if (t.kind == TargetKind::kFactorTimesLine) return p[3];
  if (t.kind == TargetKind::kFactorTimesCircle) return t.radius * std::atan2(p[4], p[3]);
  return 0.0;
}

// Difference of two heights, unwrapped on the circle.
double height_diff(const Target& t, double a, double b) {
  double d = a - b;
  if (t.kind == TargetKind::kFactorTimesCircle) d = std::remainder(d, 2.0 * std::numbers::pi * t.radius);
  return d;
}

}  // namespace

ChartJet numeric_jet(const ImmersionChart& chart, double x, double y, double h) {
  ChartJet j;
  const Vec6 c = chart.evaluate(x, y);
  const Vec6 xp = chart.evaluate(x + h, y), xm = chart.evaluate(x - h, y);
  const Vec6 yp = chart.evaluate(x, y + h), ym = chart.evaluate(x, y - h);
  const Vec6 pp = chart.evaluate(x + h, y + h), pm = chart.evaluate(x + h, y - h);
  const Vec6 mp = chart.evaluate(x - h, y + h), mm = chart.evaluate(x - h, y - h);
  j.p = c;
  j.dx = (xp - xm) / (2.0 * h);
  j.dy = (yp - ym) / (2.0 * h);
  j.dxx = (xp - 2.0 * c + xm) / (h * h);
  j.dyy = (yp - 2.0 * c + ym) / (h * h);
  j.dxy = (pp - pm - mp + mm) / (4.0 * h * h);
  return j;
}

ChartJet sample_jet(const ImmersionChart& chart, double x, double y, double h, bool prefer_analytic) {
  if (prefer_analytic && chart.has_jet()) {
    if (!chart.domain.grown(chart.pad + 1e-12).contains(x, y)) {
      throw DomainError("sample_jet: point outside the evaluable region of '" + chart.family + "'");
    }
    return chart.jet(x, y);
  }
  return numeric_jet(chart, x, y, h);
}

double ambient_curvature(const Target& t, Epsilon eps, const Vec6& a, const Vec6& b, const Vec6& c,
                         const Vec6& d) {
  auto block = [eps](const Vec3& x, const Vec3& y, const Vec3& z, const Vec3& w) {
    return eps.sign() * (inner3(x, w, eps) * inner3(y, z, eps) - inner3(x, z, eps) * inner3(y, w, eps));
  };
  double r = block(a.head<3>(), b.head<3>(), c.head<3>(), d.head<3>());
  if (t.is_product()) r += block(a.tail<3>(), b.tail<3>(), c.tail<3>(), d.tail<3>());
  return r;
}

PointGeometry point_geometry(const ImmersionChart& chart, const ChartJet& jet, double x, double y) {
  const Target& t = chart.target;
  const Epsilon eps = chart.eps;
  const double e = eps.sign();
  const Metric ip{metric_diag(t, eps)};

  PointGeometry g;
  g.x = x;
  g.y = y;
  g.p = jet.p;
  // Difference jets leave the target at second order; every frame below is
  // built inside the target's tangent space so that it depends smoothly on
  // the point.
  g.dx = tangent_projection(t, eps, jet.p, jet.dx);
  g.dy = tangent_projection(t, eps, jet.p, jet.dy);
  const Vec6& px = g.dx;
  const Vec6& py = g.dy;
  const double E = ip(px, px), F = ip(px, py), G = ip(py, py);
  if (!(E > 0.0) || !(G > 0.0)) throw ConsistencyError("degenerate or non-spacelike tangent vector");
  g.u = 0.5 * std::log(E);
  g.conformal_defect = std::max(std::abs(E - G), std::abs(F)) / E;

  g.e1 = px / std::sqrt(E);
  const double n2 = std::sqrt(G - F * F / E);
  if (!(n2 > 1e-300)) throw ConsistencyError("tangent plane has rank < 2");
  g.e2 = (py - (F / E) * px) / n2;

  // Normal frame inside the target: greedy Gram-Schmidt against the tangent plane.
  std::vector<Vec6> cand;
  for (const Vec6& b : target_basis(t, eps, jet.p)) cand.push_back(b - ip(b, g.e1) * g.e1 - ip(b, g.e2) * g.e2);
  const size_t codim = cand.size() - 2;
  while (g.normals.size() < codim) {
    size_t best = 0;
    double best_norm = -1.0;
    for (size_t k = 0; k < cand.size(); ++k) {
      Vec6 r = cand[k];
      for (const Vec6& n : g.normals) r -= ip(r, n) * n;
      const double nr = ip.norm(r);
      if (nr > best_norm) {
        best_norm = nr;
        best = k;
      }
    }
    Vec6 r = cand[best];
    for (const Vec6& n : g.normals) r -= ip(r, n) * n;
    g.normals.push_back(r / ip.norm(r));
  }

  auto normal_part = [&](const Vec6& v) {
    Vec6 out = Vec6::Zero();
    for (const Vec6& n : g.normals) out += ip(v, n) * n;
    return out;
  };
  g.sigma = {normal_part(jet.dxx), normal_part(jet.dxy), normal_part(jet.dyy)};
  const double det = E * G - F * F;
  g.H = 0.5 * ((G / det) * g.sigma[0] - 2.0 * (F / det) * g.sigma[1] + (E / det) * g.sigma[2]);
  g.hnorm = ip.norm(g.H);

  {
    const double a11 = 1.0 / std::sqrt(E), a21 = -F / (E * n2), a22 = 1.0 / n2;
    const Vec6 s11 = a11 * a11 * g.sigma[0];
    const Vec6 s12 = a11 * (a21 * g.sigma[0] + a22 * g.sigma[1]);
    const Vec6 s22 = a21 * a21 * g.sigma[0] + 2.0 * a21 * a22 * g.sigma[1] + a22 * a22 * g.sigma[2];
    g.k_gauss = ambient_curvature(t, eps, g.e1, g.e2, g.e2, g.e1) + ip(s11, s22) - ip(s12, s12);
  }

  if (g.hnorm < 1e-10) throw PreconditionError("minimal surface: H vanishes, Htilde undefined");

  const CVec6 phi_zz = 0.25 * complexify(jet.dxx - jet.dyy, -2.0 * jet.dxy);

  if (t.is_product()) {
    const Vec6 n2v = g.H / g.hnorm;
    const Vec6& other = std::abs(ip(g.normals[0], n2v)) < std::abs(ip(g.normals[1], n2v)) ? g.normals[0] : g.normals[1];
    Vec6 n1 = other - ip(other, n2v) * n2v;
    n1 /= ip.norm(n1);
    if (product_volume_form(jet.p, eps, {g.e1, g.e2, n1, n2v}) < 0.0) n1 = -n1;
    g.Htilde = g.hnorm * n1;

    const CVec6 xi = complexify(g.H, -g.Htilde) / (kSqrt2 * g.hnorm);
    const CVec6 xi_bar = xi.conjugate();
    for (int j = 0; j < 2; ++j) {
      const int which = j + 1;
      const Vec6 jx = product_j_raw(which, jet.p, px, eps);
      const Vec6 jy = product_j_raw(which, jet.p, py, eps);
      g.C[j] = ip(product_j_raw(which, jet.p, g.e1, eps), g.e2);
      const CVec6 j_phi_z = 0.5 * complexify(jx, -jy);
      const CVec6& pair_with = (j == 0) ? xi_bar : xi;
      g.gamma[j] = ip(j_phi_z, pair_with);
      g.f[j] = ip(phi_zz, pair_with);
      g.theta[j] = 2.0 * kSqrt2 * g.hnorm * g.f[j] + 0.5 * e * g.gamma[j] * g.gamma[j];

      const double s = (j == 0) ? 1.0 : -1.0;
      const CVec6 w = complexify(g.H, s * g.Htilde);
      const cplx jw = ip(j_phi_z, w);
      const cplx zz = ip(phi_zz, w);
      const cplx jt = ip(j_phi_z, complexify(g.Htilde, Vec6::Zero()));
      const double h2 = g.hnorm * g.hnorm;
      g.theta_def[j] = 2.0 * zz + e / (4.0 * h2) * jw * jw;
      g.theta_alt[j] = 2.0 * zz - e / h2 * jt * jt;

      const Vec6 jht = product_j_raw(which, jet.p, g.Htilde, eps);
      const double r1 = ip(jht, px), r2 = ip(jht, py);
      g.X[j] = {(G * r1 - F * r2) / det, (E * r2 - F * r1) / det};
      const Vec6 nor = jht - g.X[j][0] * px - g.X[j][1] * py;
      const Vec6 expect = (j == 0 ? g.C[0] : -g.C[1]) * g.H;
      g.jht_normal_defect[j] = ip.norm(nor - expect) / g.hnorm;
    }
    {
      const Vec6 j1x = product_j_raw(1, jet.p, px, eps), j1y = product_j_raw(1, jet.p, py, eps);
      const Vec6 j2x = product_j_raw(2, jet.p, px, eps), j2y = product_j_raw(2, jet.p, py, eps);
      const cplx d1 = ip(CVec6(0.5 * complexify(j1x, -j1y)), xi);
      const cplx d2 = ip(CVec6(0.5 * complexify(j2x, -j2y)), xi_bar);
      g.xi_defect = std::max(std::abs(d1), std::abs(d2)) / std::exp(g.u);
    }
    g.kbar = 0.5 * e * (g.C[0] * g.C[0] + g.C[1] * g.C[1]);
    g.kbar_perp = 0.5 * e * (g.C[0] * g.C[0] - g.C[1] * g.C[1]);
    g.kbar_tensor = ambient_curvature(t, eps, g.e1, g.e2, g.e2, g.e1);
    g.kbar_perp_tensor = ambient_curvature(t, eps, g.e1, g.e2, n2v, n1);
  } else {
    g.N = g.H / g.hnorm;
    const Vec6 v = vertical_field(t, jet.p);
    g.nu = ip(g.N, v);
    g.eta_z = 0.5 * cplx(ip(px, v), -ip(py, v));
    g.p_hopf = ip(phi_zz, complexify(g.N, Vec6::Zero()));
    g.theta_ar = g.hnorm * g.p_hopf - 0.5 * e * g.eta_z * g.eta_z;
    g.height = wrapped_height(t, jet.p);
  }
  return g;
}

SurfaceInvariants analyze(const ImmersionChart& chart, const GridSpec& grid, const AnalysisOptions& opt) {
  if (grid.nx < 5 || grid.ny < 5) throw DomainError("grid must be at least 5 x 5");
  SurfaceInvariants inv;
  inv.grid = grid;
  inv.target = chart.target;
  inv.eps = chart.eps;
  inv.options = opt;
  const size_t n = static_cast<size_t>(grid.nx) * grid.ny;
  inv.pts.resize(n);
  inv.stencil.resize(n);
  const double d = opt.fd_step;
  const Metric ip{metric_diag(chart.target, chart.eps)};
  const bool product = chart.target.is_product();
  auto geo = [&](double x, double y) {
    return point_geometry(chart, sample_jet(chart, x, y, opt.jet_step, opt.analytic_jets), x, y);
  };

  for (int k = 0; k < grid.ny; ++k) {
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x(i), y = grid.y(k);
      const PointGeometry c = geo(x, y);
      const size_t idx = static_cast<size_t>(k) * grid.nx + i;
      inv.pts[idx] = c;
      if (!opt.stencils) continue;
      const PointGeometry xp = geo(x + d, y), xm = geo(x - d, y);
      const PointGeometry yp = geo(x, y + d), ym = geo(x, y - d);
      // The outer ring is only sampled for fourth-order stencils.
      const bool q = opt.fourth_order;
      const PointGeometry xp2 = q ? geo(x + 2 * d, y) : c, xm2 = q ? geo(x - 2 * d, y) : c;
      const PointGeometry yp2 = q ? geo(x, y + 2 * d) : c, ym2 = q ? geo(x, y - 2 * d) : c;
      StencilValues s;
      const double e2u = std::exp(2.0 * c.u);
      const double em2u = 1.0 / e2u;
      auto diff = [&](auto get, const PointGeometry& m2, const PointGeometry& m1, const PointGeometry& p1,
                      const PointGeometry& p2) {
        return q ? (get(m2) - 8.0 * get(m1) + 8.0 * get(p1) - get(p2)) / (12.0 * d) : (get(p1) - get(m1)) / (2.0 * d);
      };
      auto second = [&](auto get, const PointGeometry& m2, const PointGeometry& m1, const PointGeometry& p1,
                        const PointGeometry& p2) {
        return q ? (-get(m2) + 16.0 * get(m1) - 30.0 * get(c) + 16.0 * get(p1) - get(p2)) / (12.0 * d * d)
                 : (get(m1) - 2.0 * get(c) + get(p1)) / (d * d);
      };
      auto dx_of = [&](auto get) { return diff(get, xm2, xm, xp, xp2); };
      auto dy_of = [&](auto get) { return diff(get, ym2, ym, yp, yp2); };
      auto lap_of = [&](auto get) { return second(get, xm2, xm, xp, xp2) + second(get, ym2, ym, yp, yp2); };

      s.K = -em2u * lap_of([](const PointGeometry& g) { return g.u; });

      {
        const Vec6 hx = q ? Vec6((xm2.H - 8.0 * xm.H + 8.0 * xp.H - xp2.H) / (12.0 * d)) : Vec6((xp.H - xm.H) / (2.0 * d));
        const Vec6 hy = q ? Vec6((ym2.H - 8.0 * ym.H + 8.0 * yp.H - yp2.H) / (12.0 * d)) : Vec6((yp.H - ym.H) / (2.0 * d));
        auto nor = [&](const Vec6& v) {
          double acc = 0.0;
          for (const Vec6& m : c.normals) acc += std::pow(ip(v, m), 2);
          return std::sqrt(acc);
        };
        s.parallelism =
            std::max(nor(hx) / ip.norm(c.dx), nor(hy) / ip.norm(c.dy)) / c.hnorm;
        const double hnx = dx_of([](const PointGeometry& g) { return g.hnorm; });
        const double hny = dy_of([](const PointGeometry& g) { return g.hnorm; });
        s.hnorm_grad = std::sqrt(em2u * (hnx * hnx + hny * hny)) / c.hnorm;
      }

      if (product) {
        for (int j = 0; j < 2; ++j) {
          auto C = [j](const PointGeometry& g) { return g.C[j]; };
          const double cx = dx_of(C), cy = dy_of(C);
          s.grad_c2[j] = em2u * (cx * cx + cy * cy);
          s.lap_c[j] = em2u * lap_of(C);
          const double w1x = dx_of([j](const PointGeometry& g) { return std::exp(2.0 * g.u) * g.X[j][0]; });
          const double w2y = dy_of([j](const PointGeometry& g) { return std::exp(2.0 * g.u) * g.X[j][1]; });
          s.div_x[j] = em2u * (w1x + w2y);
          s.grad_c_x[j] = cx * c.X[j][0] + cy * c.X[j][1];
          s.c_z[j] = 0.5 * cplx(cx, -cy);
          auto F = [j](const PointGeometry& g) { return g.f[j]; };
          auto Gm = [j](const PointGeometry& g) { return g.gamma[j]; };
          s.f_zbar[j] = 0.5 * (dx_of(F) + kI * dy_of(F));
          s.gamma_zbar[j] = 0.5 * (dx_of(Gm) + kI * dy_of(Gm));
        }
      } else {
        auto P = [](const PointGeometry& g) { return g.p_hopf; };
        auto Nu = [](const PointGeometry& g) { return g.nu; };
        s.p_zbar = 0.5 * (dx_of(P) + kI * dy_of(P));
        s.nu_z = 0.5 * cplx(dx_of(Nu), -dy_of(Nu));
        // Heights relative to the centre, unwrapped on the circle.
        const Target& t = chart.target;
        auto rel = [&](const PointGeometry& g) { return height_diff(t, g.height, c.height); };
        s.eta_lap = 0.25 * lap_of(rel);
      }
      inv.stencil[idx] = s;
    }
  }
  return inv;
}

double max_dzbar(const std::vector<cplx>& field, int nx, int ny, double hx, double hy) {
  if (nx < 5 || ny < 5) throw DomainError("holomorphy residual needs at least 5 x 5 points");
  if (field.size() != static_cast<size_t>(nx) * ny) throw UsageError("field size does not match grid");
  auto at = [&](int i, int k) { return field[static_cast<size_t>(k) * nx + i]; };
  double worst = 0.0;
  for (int k = 1; k < ny - 1; ++k) {
    for (int i = 1; i < nx - 1; ++i) {
      const cplx tx = (at(i + 1, k) - at(i - 1, k)) / (2.0 * hx);
      const cplx ty = (at(i, k + 1) - at(i, k - 1)) / (2.0 * hy);
      worst = std::max(worst, std::abs(0.5 * (tx + kI * ty)));
    }
  }
  return worst;
}

double holomorphy_residual(const std::vector<cplx>& field, int nx, int ny, double hx, double hy, double floor) {
  const double worst = max_dzbar(field, nx, ny, hx, hy);
  double top = 0.0;
  for (const cplx& v : field) top = std::max(top, std::abs(v));
  return worst / (top + floor);
}

std::vector<cplx> theta_field(const SurfaceInvariants& inv, int j) {
  if (j != 1 && j != 2) throw UsageError("theta index must be 1 or 2");
  if (!inv.target.is_product()) throw UsageError("Hopf coefficients are defined for product targets");
  std::vector<cplx> out;
  out.reserve(inv.size());
  for (const PointGeometry& g : inv.pts) out.push_back(g.theta[j - 1]);
  return out;
}

void ResidualAccumulator::add(cplx lhs, cplx rhs, double unit) {
  r_.max_abs = std::max(r_.max_abs, std::abs(lhs - rhs));
  side_ = std::max({side_, std::abs(lhs), std::abs(rhs)});
  unit_ = std::max(unit_, unit);
}

IdentityResidual ResidualAccumulator::finish() const {
  IdentityResidual r = r_;
  r.scale = side_ + unit_ + 1e-12;
  r.normalized = r.max_abs / r.scale;
  return r;
}

std::vector<IdentityResidual> identity_residuals(const SurfaceInvariants& inv) {
  const double e = inv.eps.sign();
  std::vector<ResidualAccumulator> acc;
  if (inv.target.is_product()) {
    const char* names[] = {"gamma_modulus", "integrability_c", "integrability_f", "integrability_gamma",
                           "f_modulus",     "gradient_theta",  "kaehler_laplacian", "divergence_x",
                           "gradient_x"};
    for (const char* nm : names) acc.emplace_back(nm);
    for (size_t idx = 0; idx < inv.size(); ++idx) {
      const PointGeometry& g = inv.pts[idx];
      const StencilValues& s = inv.stencil[idx];
      const double e2u = std::exp(2.0 * g.u), eu = std::exp(g.u);
      const double h = g.hnorm, h2 = h * h, K = s.K;
      for (int j = 0; j < 2; ++j) {
        const double C = g.C[j], C2 = C * C;
        const double sgn = (j == 0) ? 1.0 : -1.0;  // (-1)^{j+1}
        const cplx gm = g.gamma[j], f = g.f[j];
        acc[0].add(std::norm(gm), e2u * (1.0 - C2) / 2.0, e2u / 2.0);
        acc[1].add(s.c_z[j], 2.0 * kI / e2u * f * std::conj(gm) - kI * h * gm / kSqrt2, h * eu);
        acc[2].add(s.f_zbar[j], kI * e * e2u * C * gm / 4.0, e2u * eu / 4.0);
        acc[3].add(s.gamma_zbar[j], -kI * h * C * e2u / kSqrt2, h * e2u / kSqrt2);
        acc[4].add(std::norm(f), e2u * e2u / 8.0 * (h2 - K + e * C2), e2u * e2u * (h2 + 1.0) / 8.0);
        acc[5].add(s.grad_c2[j] + 4.0 * e / (e2u * e2u) * std::norm(g.theta[j]),
                   (1.0 - C2 + 4.0 * e * h2) * (e * (1.0 - C2) / 4.0 + h2 + e * C2 - K),
                   (1.0 + 4.0 * h2) * (1.25 + h2));
        acc[6].add(s.lap_c[j], -C * (4.0 * h2 - 2.0 * K + e * (1.0 + C2)), 4.0 * h2 + 2.0);
        acc[7].add(s.div_x[j], sgn * 2.0 * C * h2, 2.0 * h2);
        acc[8].add(s.grad_c2[j], (1.0 - C2) * (e * C2 - K) - sgn * 2.0 * s.grad_c_x[j], 1.0);
      }
    }
  } else {
    for (const char* nm : {"eta_modulus", "integrability_p", "integrability_nu", "integrability_eta"}) {
      acc.emplace_back(nm);
    }
    for (size_t idx = 0; idx < inv.size(); ++idx) {
      const PointGeometry& g = inv.pts[idx];
      const StencilValues& s = inv.stencil[idx];
      const double e2u = std::exp(2.0 * g.u), eu = std::exp(g.u);
      const double H = g.hnorm;
      acc[0].add(std::norm(g.eta_z), e2u / 4.0 * (1.0 - g.nu * g.nu), e2u / 4.0);
      acc[1].add(s.p_zbar, e * e2u / 2.0 * g.nu * g.eta_z, e2u * eu / 2.0);
      acc[2].add(s.nu_z, -H * g.eta_z - 2.0 / e2u * g.p_hopf * std::conj(g.eta_z), H * eu);
      acc[3].add(s.eta_lap, e2u / 2.0 * H * g.nu, e2u * H / 2.0);
    }
  }
  std::vector<IdentityResidual> out;
  for (const ResidualAccumulator& a : acc) out.push_back(a.finish());
  return out;
}

const IdentityResidual& find_residual(const std::vector<IdentityResidual>& all, const std::string& name) {
  for (const IdentityResidual& r : all) {
    if (r.name == name) return r;
  }
  throw UsageError("no identity named '" + name + "'");
}

Summary summarize(const SurfaceInvariants& inv) {
  Summary s;
  s.min_hnorm = std::numeric_limits<double>::infinity();
  const double bound_shift = inv.eps.is_sphere() ? 1.0 : 0.0;
  for (size_t idx = 0; idx < inv.size(); ++idx) {
    const PointGeometry& g = inv.pts[idx];
    const StencilValues& st = inv.stencil[idx];
    s.max_conformal_defect = std::max(s.max_conformal_defect, g.conformal_defect);
    s.max_parallelism = std::max(s.max_parallelism, st.parallelism);
    s.min_hnorm = std::min(s.min_hnorm, g.hnorm);
    s.max_hnorm = std::max(s.max_hnorm, g.hnorm);
    if (inv.target.is_product()) {
      s.max_c_gap = std::max(s.max_c_gap, std::abs(g.C[0] - g.C[1]));
      s.max_kbar_gap = std::max({s.max_kbar_gap, std::abs(g.kbar - g.kbar_tensor),
                                 std::abs(g.kbar_perp - g.kbar_perp_tensor)});
      for (int j = 0; j < 2; ++j) {
        s.max_theta_gap =
            std::max({s.max_theta_gap, std::abs(g.theta[j] - g.theta_def[j]), std::abs(g.theta[j] - g.theta_alt[j])});
      }
      s.max_xi_defect = std::max(s.max_xi_defect, g.xi_defect);
      s.max_curvature_excess =
          std::max(s.max_curvature_excess, st.K - (g.hnorm * g.hnorm + bound_shift));
    }
  }
  if (inv.size() == 0) s.min_hnorm = 0.0;
  if (!inv.target.is_product()) s.max_curvature_excess = -std::numeric_limits<double>::infinity();
  return s;
}

TorusIntegrals torus_integrals(const ImmersionChart& chart, int n) {
  if (!chart.periods) throw DomainError("torus_integrals: chart '" + chart.family + "' is not doubly periodic");
  if (!chart.target.is_product()) throw DomainError("torus_integrals expects a chart into a product target");
  if (n < 8) throw DomainError("torus_integrals: need at least 8 samples per period");
  const Periods per = *chart.periods;
  const double hx = per.x / n, hy = per.y / n;
  TorusIntegrals out;
  double jac_phi = 0.0, jac_psi = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const double x = chart.domain.x0 + i * hx, y = chart.domain.y0 + k * hy;
      const PointGeometry g = point_geometry(chart, sample_jet(chart, x, y, 1e-4), x, y);
      const double da = std::exp(2.0 * g.u) * hx * hy;
      out.area += da;
      out.int_c[0] += g.C[0] * da;
      out.int_c[1] += g.C[1] * da;
      jac_phi += 0.5 * (g.C[0] + g.C[1]) * da;
      jac_psi += 0.5 * (g.C[0] - g.C[1]) * da;
    }
  }
  out.deg_phi = jac_phi / (4.0 * std::numbers::pi);
  out.deg_psi = jac_psi / (4.0 * std::numbers::pi);
  return out;
}

AbreschRosenberg abresch_rosenberg(const SurfaceInvariants& inv, double hnorm_tol) {
  if (inv.target.is_product()) throw UsageError("abresch_rosenberg expects a target M^2(eps) x R or x S^1");
  AbreschRosenberg ar;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, mean = 0.0;
  for (const PointGeometry& g : inv.pts) {
    ar.theta.push_back(g.theta_ar);
    lo = std::min(lo, g.hnorm);
    hi = std::max(hi, g.hnorm);
    mean += g.hnorm;
  }
  mean /= static_cast<double>(inv.size());
  ar.hnorm = mean;
  ar.hnorm_variation = (hi - lo) / mean;
  if (ar.hnorm_variation > hnorm_tol) {
    throw PreconditionError("chart is not CMC: |H| varies by " + std::to_string(ar.hnorm_variation));
  }
  ar.holomorphy = holomorphy_residual(ar.theta, inv.grid.nx, inv.grid.ny, inv.grid.hx(), inv.grid.hy());
  return ar;
}

}  // namespace pmc
