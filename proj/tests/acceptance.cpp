// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, pinned tolerances.
//
//   acceptance                   exit 0 iff every criterion passes
//   acceptance --known-red 3,7   exit 0 iff the failing set is exactly {3, 7}
//
// The second form lets ctest track criteria that are documented as failing
// without hiding them: their FAIL lines are still printed, and the run turns
// red both when another criterion breaks and when a known-red one starts to
// pass.
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pmc/correspondence.hpp"
#include "pmc/diffgeo.hpp"
#include "pmc/elliptic.hpp"
#include "pmc/errors.hpp"
#include "pmc/families.hpp"
#include "pmc/profile_ode.hpp"

namespace {

using namespace pmc;

const Epsilon kS = Epsilon::sphere();
const Epsilon kH = Epsilon::hyperbolic();

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Collects the sub-checks of one criterion; the criterion passes when all do.
class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  // |value - target| <= tol
  void near(const std::string& what, double value, double target, double tol) {
    record(std::abs(value - target) <= tol, what + "=" + num(value) + " (want " + num(target) + " +- " + num(tol) + ")");
  }
  void at_most(const std::string& what, double value, double tol) {
    record(value <= tol, what + "=" + num(value) + " (<= " + num(tol) + ")");
  }
  void at_least(const std::string& what, double value, double bound) {
    record(value >= bound, what + "=" + num(value) + " (>= " + num(bound) + ")");
  }
  void holds(const std::string& what, bool ok) { record(ok, what); }

  bool pass() const { return pass_; }
  int id() const { return id_; }
  std::string line() const {
    return std::string(pass_ ? "PASS" : "FAIL") + " [" + std::to_string(id_) + "] " + title_ + ": " + detail_;
  }

 private:
  void record(bool ok, const std::string& text) {
    pass_ = pass_ && ok;
    if (!detail_.empty()) detail_ += "; ";
    detail_ += (ok ? "" : "!") + text;
  }

  int id_;
  std::string title_;
  std::string detail_;
  bool pass_ = true;
};

GridSpec square_grid(const Domain& d, int n) { return GridSpec{n, n, d}; }

AnalysisOptions certified_options(const GridSpec& g, const ImmersionChart& c) {
  AnalysisOptions o;
  o.fd_step = std::min({g.hx(), g.hy(), 0.5 * c.pad});
  o.fourth_order = true;
  return o;
}

ImmersionChart profile_member(Epsilon eps, double a, double b, double c) {
  const ProfileParams prm = ProfileParams::make(eps, a, b, c);
  return pmc_profile_family(prm, default_profile(prm, kUnitSquare.x0 - 0.2, kUnitSquare.x1 + 0.2));
}

double hnorm_at_origin(const ImmersionChart& c) {
  const ChartJet j = sample_jet(c, 0.0, 0.0, 1e-3);
  return point_geometry(c, j, 0.0, 0.0).hnorm;
}

double max_theta_error(const SurfaceInvariants& inv, int j, cplx target) {
  double e = 0.0;
  for (const PointGeometry& g : inv.pts) e = std::max(e, std::abs(g.theta[j] - target));
  return e;
}

// Square half-period rectangle of a periodic chart, where stencils and
// reconstruction use one step in both directions.
Domain half_period_square(const ImmersionChart& c) {
  const double s = 0.5 * std::min(c.periods->x, c.periods->y);
  return {c.domain.x0, c.domain.x0 + s, c.domain.y0, c.domain.y0 + s};
}

Criterion example1() {
  Criterion r(1, "products of constant-curvature curves, |H| constants");
  const double t = hnorm_at_origin(product_of_curves(kS, circle_curvature_from_height(kS, 0.6),
                                                     circle_curvature_from_height(kS, 0.8)));
  const double ch = hnorm_at_origin(product_of_curves(kH, circle_curvature_from_height(kH, std::numbers::sqrt2), 1.0));
  const double p = hnorm_at_origin(product_of_curves(kH, 1.0, 1.0));
  r.near("T(0.6,0.8) 4|H|^2", 4 * t * t, 2.340278, 1e-5);
  r.near("C(sqrt2) 4|H|^2", 4 * ch * ch, 3.0, 1e-5);
  r.near("P |H|^2", p * p, 0.5, 1e-6);
  return r;
}

Criterion prop4() {
  Criterion r(2, "invariant PMC family certification");
  struct Case {
    Epsilon eps;
    double a, b, c;
  };
  for (const Case& k : {Case{kH, -2, 1, 0}, Case{kS, 2, 1, 0}}) {
    const std::string tag = k.eps.is_sphere() ? "eps=+1 " : "eps=-1 ";
    const ImmersionChart ch = profile_member(k.eps, k.a, k.b, k.c);
    const GridSpec g = square_grid(kUnitSquare, 81);
    const SurfaceInvariants inv = analyze(ch, g, certified_options(g, ch));
    const Summary s = summarize(inv);
    double h2 = 0.0;
    for (const PointGeometry& p : inv.pts) h2 = std::max(h2, std::abs(p.hnorm * p.hnorm - k.b / 4));
    r.at_most(tag + "conformal defect", s.max_conformal_defect, 1e-6);
    r.at_most(tag + "parallelism", s.max_parallelism, 1e-5);
    r.at_most(tag + "max||H|^2-b/4|", h2, 1e-6);
    r.at_most(tag + "max|C1-C2|", s.max_c_gap, 1e-6);
    const double e = k.eps.sign();
    for (int j = 0; j < 2; ++j) {
      const double sj = (j == 0) ? -1.0 : 1.0;
      const cplx want = (e * k.b / 4) * cplx(k.a + 1 - k.c * k.c, 2 * sj * k.c);
      r.at_most(tag + "max|theta" + std::to_string(j + 1) + "-" + num(want.real()) + "|", max_theta_error(inv, j, want),
                1e-5);
    }
  }
  return r;
}

Criterion example2() {
  Criterion r(3, "eps=-1 member a=-2, b=1, c=0 (lambda=1): curvature and Hopf constants");
  const ImmersionChart ch = profile_member(kH, -2.0, 1.0, 0.0);
  const GridSpec g = square_grid(kUnitSquare, 81);
  const SurfaceInvariants inv = analyze(ch, g, certified_options(g, ch));
  const int mid = 40;
  r.near("K(0)", inv.st(mid, mid).K, -1.0, 1e-3);
  r.at_most("max|theta1-0.25|", max_theta_error(inv, 0, 0.25), 1e-5);
  r.at_most("max|theta2-0.25|", max_theta_error(inv, 1, 0.25), 1e-5);
  return r;
}

Criterion phi0() {
  Criterion r(4, "vanishing-Hopf surface (|H|=1/4)");
  const ImmersionChart ch = pmc_phi0(0.25);
  const GridSpec g = square_grid(kUnitSquare, 81);
  const SurfaceInvariants inv = analyze(ch, g, certified_options(g, ch));
  double dk = 0.0, dc = 0.0, th = 0.0;
  for (size_t m = 0; m < inv.size(); ++m) {
    const PointGeometry& p = inv.pts[m];
    dk = std::max({dk, std::abs(inv.stencil[m].K + 0.75), std::abs(p.k_gauss + 0.75)});
    dc = std::max({dc, std::abs(p.C[0] * p.C[0] - 0.75), std::abs(p.C[1] * p.C[1] - 0.75)});
    th = std::max({th, std::abs(p.theta[0]), std::abs(p.theta[1])});
  }
  r.at_most("max|K+0.75|", dk, 1e-4);
  r.at_most("max|C_j^2-0.75|", dc, 1e-5);
  r.at_most("max|theta_j|", th, 1e-7);
  return r;
}

Criterion torus() {
  Criterion r(5, "CMC torus (a,b)=(2,1)");
  const TorusCharts t = cmc_torus(2.0, 1.0);
  r.near("kappa^2", t.kappa * t.kappa, 0.25, 1e-15);

  const Domain sq = half_period_square(t.circle);
  const GridSpec g = square_grid(sq, 81);
  const SurfaceInvariants inv = analyze(t.circle, g, certified_options(g, t.circle));
  const AbreschRosenberg ar = abresch_rosenberg(inv);
  double dar = 0.0;
  for (const cplx& v : ar.theta) dar = std::max(dar, std::abs(v - 0.09375));
  r.at_most("max|theta_AR-0.09375|", dar, 1e-5);

  double seam = 0.0;
  const Domain& d = t.circle.domain;
  for (int k = 0; k <= 64; ++k) {
    const double s = k / 64.0;
    const double y = d.y0 + s * t.periods.y, x = d.x0 + s * t.periods.x;
    seam = std::max(seam, (t.circle.evaluate(d.x0, y) - t.circle.evaluate(d.x0 + t.periods.x, y)).norm());
    seam = std::max(seam, (t.circle.evaluate(x, d.y0) - t.circle.evaluate(x, d.y0 + t.periods.y)).norm());
  }
  r.at_most("seam closure", seam, 1e-8);

  const ImmersionChart lift = geodesic_inclusion(t.line);
  const SurfaceInvariants li = analyze(lift, square_grid(sq, 81), {.stencils = false});
  r.at_most("lift max|theta_j-0.1875|", std::max(max_theta_error(li, 0, 0.1875), max_theta_error(li, 1, 0.1875)), 1e-4);

  // The integrals need the doubly periodic lift, through S^2 x S^1.
  const TorusIntegrals ti = torus_integrals(geodesic_inclusion(t.circle), 96);
  r.at_most("|int C_j dA|/Area", std::max(std::abs(ti.int_c[0]), std::abs(ti.int_c[1])) / ti.area, 1e-3);
  r.at_most("|deg phi|", std::abs(ti.deg_phi), 1e-3);
  r.at_most("|deg psi|", std::abs(ti.deg_psi), 1e-3);
  return r;
}

Criterion round_trip() {
  Criterion r(6, "PMC <-> CMC correspondence");
  const ImmersionChart ch = profile_member(kH, -2.0, 1.0, 0.0);
  const GridSpec g = square_grid(kUnitSquare, 81);
  const PmcFrenetData data = extract_pmc_data(ch, g);
  CmcFrenetData cmc[2];
  Reconstruction rec[2];
  double hgap = 0.0, tgap = 0.0;
  for (int j = 0; j < 2; ++j) {
    cmc[j] = pmc_to_cmc(data, j + 1);
    rec[j] = integrate_cmc_frenet(cmc[j]);
    AnalysisOptions o;
    o.fd_step = rec[j].grid.hx();
    o.fourth_order = true;
    const SurfaceInvariants inv = analyze(rec[j].chart, rec[j].interior, o);
    const AbreschRosenberg ar = abresch_rosenberg(inv, std::numeric_limits<double>::infinity());
    const GridSpec& in = rec[j].interior;
    for (int k = 0; k < in.ny; ++k) {
      for (int i = 0; i < in.nx; ++i) {
        const PointGeometry& p = inv.at(i, k);
        hgap = std::max(hgap, std::abs(p.hnorm - 0.5));
        // Interior node (i, k) sits on data node (2(i+2), 2(k+2)).
        const size_t m = static_cast<size_t>(2 * (k + 2)) * g.nx + 2 * (i + 2);
        const cplx theta_j = 2.0 * std::numbers::sqrt2 * data.hnorm * data.f[j][m] +
                             0.5 * data.eps.sign() * data.gamma[j][m] * data.gamma[j][m];
        tgap = std::max(tgap, std::abs(2.0 * ar.theta[static_cast<size_t>(k) * in.nx + i] - theta_j));
      }
    }
  }
  const PmcFrenetData back = cmc_to_pmc(cmc[0], cmc[1], 1e-6);
  double rt = std::abs(back.hnorm - data.hnorm);
  for (size_t m = 0; m < data.size(); ++m) {
    rt = std::max(rt, std::abs(back.u[m] - data.u[m]));
    for (int j = 0; j < 2; ++j) {
      rt = std::max({rt, std::abs(back.C[j][m] - data.C[j][m]), std::abs(back.f[j][m] - data.f[j][m]),
                     std::abs(back.gamma[j][m] - data.gamma[j][m])});
    }
  }
  r.at_most("data round trip", rt, 1e-6);
  r.at_most("max||H|-0.5|", hgap, 1e-4);
  r.at_most("max|2theta_AR-theta_j|", tgap, 1e-4);
  const CongruenceVerdict v = weak_congruence_check(rec[0].chart, rec[1].chart, rec[0].grid);
  r.at_most("weak congruence distance", std::min(v.direct.distance, v.reflected.distance), 1e-3);

  const TorusCharts t = cmc_torus(2.0, 1.0);
  const ImmersionChart lift = geodesic_inclusion(t.line);
  const PmcFrenetData ld = extract_pmc_data(lift, square_grid(half_period_square(t.circle), 81));
  const Reconstruction r1 = integrate_cmc_frenet(pmc_to_cmc(ld, 1));
  const Reconstruction r2 = integrate_cmc_frenet(pmc_to_cmc(ld, 2));
  const CongruenceVerdict fv = weak_congruence_check(r1.chart, r2.chart, r1.grid);
  r.at_most("factorizing case direct distance", fv.direct.distance, 1e-3);
  r.holds(std::string("factorizing case congruent=") + (fv.congruent ? "yes" : "no"), fv.congruent);
  return r;
}

// max |d theta_j / d zbar| with difference jets at the grid step.
double dzbar_with_difference_jets(const ImmersionChart& c, const Domain& d, int n) {
  const GridSpec g = square_grid(d, n);
  AnalysisOptions o;
  o.analytic_jets = false;
  o.jet_step = g.hx();
  o.stencils = false;
  const SurfaceInvariants inv = analyze(c, g, o);
  return std::max(max_dzbar(theta_field(inv, 1), n, n, g.hx(), g.hy()),
                  max_dzbar(theta_field(inv, 2), n, n, g.hx(), g.hy()));
}

struct NamedChart {
  std::string name;
  ImmersionChart chart;
  Domain domain;
};

std::vector<NamedChart> pmc_families() {
  const TorusCharts t = cmc_torus(2.0, 1.0);
  return {
      {"prop(-1,-2,1,0)", profile_member(kH, -2, 1, 0), kUnitSquare},
      {"prop(+1,2,1,0)", profile_member(kS, 2, 1, 0), kUnitSquare},
      {"prop(-1,-3,2,1)", profile_member(kH, -3, 2, 1), kUnitSquare},
      {"example2(lambda=2)", profile_member(kH, -5, 1, 0), kUnitSquare},
      {"phi0", pmc_phi0(0.25), kUnitSquare},
      {"product", product_of_curves(kS, 0.75, 4.0 / 3.0), kUnitSquare},
      {"torus lift", geodesic_inclusion(t.line), half_period_square(t.circle)},
  };
}

Criterion holomorphy() {
  Criterion r(7, "holomorphy residual decay under grid halving");
  for (const NamedChart& f : pmc_families()) {
    const double coarse = dzbar_with_difference_jets(f.chart, f.domain, 81);
    const double fine = dzbar_with_difference_jets(f.chart, f.domain, 161);
    // Families whose theta is exactly constant can sit at rounding level on
    // both grids, where no decay ratio is measurable.
    if (coarse <= 1e-8 && fine <= 1e-8) {
      r.at_most(f.name + " residual (rounding level)", coarse, 1e-8);
    } else {
      r.at_least(f.name + " ratio", coarse / fine, 3.5);
    }
  }
  return r;
}

Criterion curvature_bounds() {
  Criterion r(8, "intrinsic curvature bounds");
  for (const NamedChart& f : pmc_families()) {
    const GridSpec g = square_grid(f.domain, 81);
    const Summary s = summarize(analyze(f.chart, g, certified_options(g, f.chart)));
    r.at_most(f.name + " excess", s.max_curvature_excess, 1e-6);
  }
  return r;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4 * f(lm) + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * f(rm) + fb);
  if (depth > 40 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, 0.5 * tol, depth + 1) + adaptive_simpson(f, m, b, 0.5 * tol, depth + 1);
}

Criterion elliptic() {
  Criterion r(9, "elliptic kernel");
  std::mt19937_64 rng(20260);
  std::uniform_real_distribution<double> xs(-50.0, 50.0), ks(0.0, 0.999);
  double id1 = 0.0, id2 = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const double k = ks(rng);
    const JacobiValues v = jacobi_sncndn(xs(rng), EllipticModulus(k));
    id1 = std::max(id1, std::abs(v.sn * v.sn + v.cn * v.cn - 1.0));
    id2 = std::max(id2, std::abs(v.dn * v.dn + k * k * v.sn * v.sn - 1.0));
  }
  double kerr = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double k = 0.1 * i;
    const double q = adaptive_simpson([k](double t) { return 1.0 / std::sqrt(1.0 - k * k * std::sin(t) * std::sin(t)); },
                                      0.0, 0.5 * std::numbers::pi, 1e-14);
    kerr = std::max(kerr, std::abs(complete_k(EllipticModulus(k)) - q));
  }
  r.at_most("max|sn^2+cn^2-1|", id1, 1e-10);
  r.at_most("max|dn^2+k^2 sn^2-1|", id2, 1e-10);
  r.at_most("max|K_agm-K_quad|", kerr, 1e-10);
  return r;
}

Criterion negative_controls() {
  Criterion r(10, "negative controls");
  const TorusCharts t = cmc_torus(2.0, 1.0);
  const ImmersionChart bad = geodesic_inclusion(scale_height(t.line, 1.01));
  const GridSpec g = square_grid(half_period_square(t.circle), 81);
  const Summary s = summarize(analyze(bad, g, certified_options(g, bad)));
  r.at_least("perturbed chart parallelism", s.max_parallelism, 1e-2);
  const FeasibilityVerdict v = check_restrictions(ProfileParams::make(kS, 1.0, 2.0, 0.0));
  r.holds("eps=+1 a<b c=0 rejected citing '" + v.description + "'",
          !v.feasible && v.description.find("(1+b)(a-b) >= b c^2") != std::string::npos);
  return r;
}

std::set<int> parse_ids(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known_red;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--known-red" && i + 1 < argc) {
      known_red = parse_ids(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--known-red ID[,ID...]]\n";
      return 2;
    }
  }

  const std::vector<std::function<Criterion()>> all = {example1, prop4, example2, phi0, torus, round_trip,
                                                       holomorphy, curvature_bounds, elliptic, negative_controls};
  std::set<int> failed;
  for (size_t i = 0; i < all.size(); ++i) {
    Criterion c(static_cast<int>(i + 1), "criterion");
    try {
      c = all[i]();
    } catch (const std::exception& e) {
      c.holds(std::string("threw: ") + e.what(), false);
    }
    std::cout << c.line() << std::endl;
    if (!c.pass()) failed.insert(c.id());
  }

  std::cout << "summary: " << all.size() - failed.size() << "/" << all.size() << " criteria pass";
  if (!known_red.empty()) {
    std::cout << "; known red:";
    for (int id : known_red) std::cout << ' ' << id;
  }
  std::cout << std::endl;
  if (failed == known_red) return 0;
  for (int id : known_red) {
    if (!failed.count(id)) std::cout << "criterion " << id << " is listed as known red but passes\n";
  }
  return 1;
}
