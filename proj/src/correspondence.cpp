// SPDX-License-Identifier: Apache-2.0
#include "pmc/correspondence.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>

#include "pmc/errors.hpp"

namespace pmc {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
const cplx kI(0.0, 1.0);

size_t at(const GridSpec& g, int i, int k) { return static_cast<size_t>(k) * g.nx + i; }

void require_grid(const GridSpec& g, int min_nodes, const char* who) {
  if (g.nx < min_nodes || g.ny < min_nodes) {
    throw DomainError(std::string(who) + ": grid needs at least " + std::to_string(min_nodes) + " nodes per side");
  }
  if (!(g.domain.width() > 0.0 && g.domain.height() > 0.0)) throw DomainError(std::string(who) + ": empty domain");
}

bool same_grid(const GridSpec& a, const GridSpec& b) {
  return a.nx == b.nx && a.ny == b.ny && a.domain.x0 == b.domain.x0 && a.domain.x1 == b.domain.x1 &&
         a.domain.y0 == b.domain.y0 && a.domain.y1 == b.domain.y1;
}

// Fourth-order first derivative of samples f[0..n) at index i, one-sided near
// the ends. `get(m)` returns the m-th sample.
template <class T, class Get>
T d1(Get get, int i, int n, double h) {
  if (i == 0) return (-25.0 * get(0) + 48.0 * get(1) - 36.0 * get(2) + 16.0 * get(3) - 3.0 * get(4)) / (12.0 * h);
  if (i == 1) return (-3.0 * get(0) - 10.0 * get(1) + 18.0 * get(2) - 6.0 * get(3) + get(4)) / (12.0 * h);
  if (i == n - 2) {
    return -(-3.0 * get(n - 1) - 10.0 * get(n - 2) + 18.0 * get(n - 3) - 6.0 * get(n - 4) + get(n - 5)) / (12.0 * h);
  }
  if (i == n - 1) {
    return -(-25.0 * get(n - 1) + 48.0 * get(n - 2) - 36.0 * get(n - 3) + 16.0 * get(n - 4) - 3.0 * get(n - 5)) /
           (12.0 * h);
  }
  return (get(i - 2) - 8.0 * get(i - 1) + 8.0 * get(i + 1) - get(i + 2)) / (12.0 * h);
}

template <class T>
std::vector<T> diff_x(const std::vector<T>& f, const GridSpec& g) {
  std::vector<T> out(f.size());
  for (int k = 0; k < g.ny; ++k)
    for (int i = 0; i < g.nx; ++i) out[at(g, i, k)] = d1<T>([&](int m) { return f[at(g, m, k)]; }, i, g.nx, g.hx());
  return out;
}

template <class T>
std::vector<T> diff_y(const std::vector<T>& f, const GridSpec& g) {
  std::vector<T> out(f.size());
  for (int k = 0; k < g.ny; ++k)
    for (int i = 0; i < g.nx; ++i) out[at(g, i, k)] = d1<T>([&](int m) { return f[at(g, i, m)]; }, k, g.ny, g.hy());
  return out;
}

// Fourth-order Laplacian at an interior node (two nodes from every edge).
double laplacian(const std::vector<double>& f, const GridSpec& g, int i, int k) {
  auto d2 = [](double a, double b, double c, double d, double e, double h) {
    return (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h);
  };
  return d2(f[at(g, i - 2, k)], f[at(g, i - 1, k)], f[at(g, i, k)], f[at(g, i + 1, k)], f[at(g, i + 2, k)], g.hx()) +
         d2(f[at(g, i, k - 2)], f[at(g, i, k - 1)], f[at(g, i, k)], f[at(g, i, k + 1)], f[at(g, i, k + 2)], g.hy());
}

// Cumulative integral along one grid line with the four-point rule on each
// cell (fourth order, one-sided in the end cells).
template <class Get>
std::vector<double> cumulative(Get g, int n, double h) {
  std::vector<double> out(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    double cell;
    if (n < 4) {
      cell = 0.5 * h * (g(i) + g(i + 1));
    } else if (i == 0) {
      cell = h * (9.0 * g(0) + 19.0 * g(1) - 5.0 * g(2) + g(3)) / 24.0;
    } else if (i == n - 2) {
      cell = h * (g(n - 4) - 5.0 * g(n - 3) + 19.0 * g(n - 2) + 9.0 * g(n - 1)) / 24.0;
    } else {
      cell = h * (-g(i - 1) + 13.0 * g(i) + 13.0 * g(i + 1) - g(i + 2)) / 24.0;
    }
    out[i + 1] = out[i] + cell;
  }
  return out;
}

// Potential of the gradient field (gx, gy), zero at node 0.
std::vector<double> integrate_gradient(const std::vector<double>& gx, const std::vector<double>& gy, const GridSpec& g,
                                       bool x_first) {
  std::vector<double> f(gx.size(), 0.0);
  if (x_first) {
    const auto row = cumulative([&](int m) { return gx[at(g, m, 0)]; }, g.nx, g.hx());
    for (int i = 0; i < g.nx; ++i) {
      const auto col = cumulative([&](int m) { return gy[at(g, i, m)]; }, g.ny, g.hy());
      for (int k = 0; k < g.ny; ++k) f[at(g, i, k)] = row[i] + col[k];
    }
  } else {
    const auto col = cumulative([&](int m) { return gy[at(g, 0, m)]; }, g.ny, g.hy());
    for (int k = 0; k < g.ny; ++k) {
      const auto row = cumulative([&](int m) { return gx[at(g, m, k)]; }, g.nx, g.hx());
      for (int i = 0; i < g.nx; ++i) f[at(g, i, k)] = col[k] + row[i];
    }
  }
  return f;
}

bool interior(const GridSpec& g, int i, int k) { return i >= 2 && k >= 2 && i < g.nx - 2 && k < g.ny - 2; }

}  // namespace

std::vector<IdentityResidual> pmc_data_residuals(const PmcFrenetData& d) {
  require_grid(d.grid, 5, "pmc_data_residuals");
  const GridSpec& g = d.grid;
  const double e = d.eps.sign(), h = d.hnorm;
  std::vector<ResidualAccumulator> acc;
  for (const char* nm : {"gamma_modulus", "integrability_c", "integrability_f", "integrability_gamma"}) {
    acc.emplace_back(nm);
  }
  for (int j = 0; j < 2; ++j) {
    const auto cx = diff_x(d.C[j], g), cy = diff_y(d.C[j], g);
    const auto fx = diff_x(d.f[j], g), fy = diff_y(d.f[j], g);
    const auto gx = diff_x(d.gamma[j], g), gy = diff_y(d.gamma[j], g);
    for (int k = 0; k < g.ny; ++k) {
      for (int i = 0; i < g.nx; ++i) {
        if (!interior(g, i, k)) continue;
        const size_t n = at(g, i, k);
        const double e2u = std::exp(2.0 * d.u[n]), eu = std::exp(d.u[n]);
        const double C = d.C[j][n];
        const cplx gm = d.gamma[j][n], f = d.f[j][n];
        const cplx c_z = 0.5 * cplx(cx[n], -cy[n]);
        const cplx f_zbar = 0.5 * (fx[n] + kI * fy[n]);
        const cplx g_zbar = 0.5 * (gx[n] + kI * gy[n]);
        acc[0].add(std::norm(gm), e2u * (1.0 - C * C) / 2.0, e2u / 2.0);
        acc[1].add(c_z, 2.0 * kI / e2u * f * std::conj(gm) - kI * h * gm / kSqrt2, h * eu);
        acc[2].add(f_zbar, kI * e * e2u * C * gm / 4.0, e2u * eu / 4.0);
        acc[3].add(g_zbar, -kI * h * C * e2u / kSqrt2, h * e2u / kSqrt2);
      }
    }
  }
  std::vector<IdentityResidual> out;
  for (const auto& a : acc) out.push_back(a.finish());
  return out;
}

std::vector<IdentityResidual> cmc_data_residuals(const CmcFrenetData& d) {
  require_grid(d.grid, 5, "cmc_data_residuals");
  const GridSpec& g = d.grid;
  const double e = d.eps.sign(), H = d.H;
  std::vector<ResidualAccumulator> acc;
  for (const char* nm : {"eta_modulus", "integrability_p", "integrability_nu", "integrability_eta"}) {
    acc.emplace_back(nm);
  }
  const auto ex = diff_x(d.eta, g), ey = diff_y(d.eta, g);
  const auto px = diff_x(d.p, g), py = diff_y(d.p, g);
  const auto nx = diff_x(d.nu, g), ny = diff_y(d.nu, g);
  for (int k = 0; k < g.ny; ++k) {
    for (int i = 0; i < g.nx; ++i) {
      if (!interior(g, i, k)) continue;
      const size_t n = at(g, i, k);
      const double e2u = std::exp(2.0 * d.u[n]), eu = std::exp(d.u[n]);
      const cplx eta_z = 0.5 * cplx(ex[n], -ey[n]);
      const cplx p_zbar = 0.5 * (px[n] + kI * py[n]);
      const cplx nu_z = 0.5 * cplx(nx[n], -ny[n]);
      acc[0].add(std::norm(eta_z), e2u / 4.0 * (1.0 - d.nu[n] * d.nu[n]), e2u / 4.0);
      acc[1].add(p_zbar, e * e2u / 2.0 * d.nu[n] * eta_z, e2u * eu / 2.0);
      acc[2].add(nu_z, -H * eta_z - 2.0 / e2u * d.p[n] * std::conj(eta_z), H * eu);
      acc[3].add(0.25 * laplacian(d.eta, g, i, k), e2u / 2.0 * H * d.nu[n], e2u * H / 2.0);
    }
  }
  std::vector<IdentityResidual> out;
  for (const auto& a : acc) out.push_back(a.finish());
  return out;
}

PmcFrenetData extract_pmc_data(const ImmersionChart& chart, const GridSpec& grid, double parallel_tol) {
  if (!chart.target.is_product()) throw UsageError("extract_pmc_data expects a chart into a product target");
  require_grid(grid, 5, "extract_pmc_data");
  const SurfaceInvariants inv = analyze(chart, grid);
  const Summary s = summarize(inv);
  if (s.max_parallelism > parallel_tol) {
    throw ConsistencyError("chart '" + chart.family + "' is not PMC: parallelism residual " +
                           std::to_string(s.max_parallelism));
  }
  const double mean = 0.5 * (s.min_hnorm + s.max_hnorm);
  if (s.max_hnorm - s.min_hnorm > 1e-6 * mean) {
    throw ConsistencyError("chart '" + chart.family + "' has non-constant |H|");
  }
  PmcFrenetData d;
  d.grid = grid;
  d.eps = chart.eps;
  d.hnorm = mean;
  for (const PointGeometry& g : inv.pts) {
    d.u.push_back(g.u);
    for (int j = 0; j < 2; ++j) {
      d.C[j].push_back(g.C[j]);
      d.gamma[j].push_back(g.gamma[j]);
      d.f[j].push_back(g.f[j]);
    }
  }
  return d;
}

CmcFrenetData extract_cmc_data(const ImmersionChart& chart, const GridSpec& grid) {
  if (chart.target.is_product()) throw UsageError("extract_cmc_data expects a chart into M^2(eps) x R or x S^1");
  require_grid(grid, 5, "extract_cmc_data");
  AnalysisOptions opt;
  opt.stencils = false;
  const SurfaceInvariants inv = analyze(chart, grid, opt);
  const AbreschRosenberg ar = abresch_rosenberg(inv);  // also rejects non-CMC charts
  CmcFrenetData d;
  d.grid = grid;
  d.eps = chart.eps;
  d.H = ar.hnorm;
  std::vector<double> raw;
  for (const PointGeometry& g : inv.pts) {
    d.u.push_back(g.u);
    d.nu.push_back(g.nu);
    d.p.push_back(g.p_hopf);
    raw.push_back(g.height);
  }
  // Unwrap circle heights along the x-line, then up the columns.
  d.eta = raw;
  if (chart.target.kind == TargetKind::kFactorTimesCircle) {
    const double period = 2.0 * std::numbers::pi * chart.target.radius;
    auto step = [period](double from, double to) { return std::remainder(to - from, period); };
    for (int i = 1; i < grid.nx; ++i) {
      d.eta[at(grid, i, 0)] = d.eta[at(grid, i - 1, 0)] + step(raw[at(grid, i - 1, 0)], raw[at(grid, i, 0)]);
    }
    for (int i = 0; i < grid.nx; ++i) {
      for (int k = 1; k < grid.ny; ++k) {
        d.eta[at(grid, i, k)] = d.eta[at(grid, i, k - 1)] + step(raw[at(grid, i, k - 1)], raw[at(grid, i, k)]);
      }
    }
  }
  return d;
}

CmcFrenetData pmc_to_cmc(const PmcFrenetData& d, int j, double eta_tol) {
  if (j != 1 && j != 2) throw UsageError("pmc_to_cmc: j must be 1 or 2");
  require_grid(d.grid, 5, "pmc_to_cmc");
  const int m = j - 1;
  CmcFrenetData c;
  c.grid = d.grid;
  c.eps = d.eps;
  c.H = d.hnorm;
  c.u = d.u;
  c.nu = d.C[m];
  std::vector<double> gx(d.size()), gy(d.size());
  for (size_t n = 0; n < d.size(); ++n) {
    c.p.push_back(kSqrt2 * d.f[m][n]);
    gx[n] = -kSqrt2 * d.gamma[m][n].imag();
    gy[n] = -kSqrt2 * d.gamma[m][n].real();
  }
  c.eta = integrate_gradient(gx, gy, d.grid, true);
  const auto other = integrate_gradient(gx, gy, d.grid, false);
  double top = 0.0;
  for (size_t n = 0; n < d.size(); ++n) {
    c.eta_path_defect = std::max(c.eta_path_defect, std::abs(c.eta[n] - other[n]));
    top = std::max(top, std::abs(c.eta[n]));
  }
  if (c.eta_path_defect > eta_tol * (1.0 + top)) {
    throw ConsistencyError("pmc_to_cmc: eta depends on the integration path (defect " +
                           std::to_string(c.eta_path_defect) + "); the data are not integrable");
  }
  return c;
}

PmcFrenetData cmc_to_pmc(const CmcFrenetData& d1, const CmcFrenetData& d2, double tol) {
  if (!same_grid(d1.grid, d2.grid)) throw UsageError("cmc_to_pmc: the two data sets live on different grids");
  if (d1.eps.sign() != d2.eps.sign()) throw UsageError("cmc_to_pmc: the two data sets have different eps");
  require_grid(d1.grid, 5, "cmc_to_pmc");
  if (std::abs(d1.H - d2.H) > tol * std::max(1.0, std::abs(d1.H))) {
    throw UsageError("cmc_to_pmc: mean curvatures differ (" + std::to_string(d1.H) + " vs " + std::to_string(d2.H) +
                     ")");
  }
  for (size_t n = 0; n < d1.size(); ++n) {
    if (std::abs(d1.u[n] - d2.u[n]) > tol * (1.0 + std::abs(d1.u[n]))) {
      throw UsageError("cmc_to_pmc: the induced metrics differ");
    }
  }
  PmcFrenetData p;
  p.grid = d1.grid;
  p.eps = d1.eps;
  p.hnorm = d1.H;
  p.u = d1.u;
  const CmcFrenetData* src[2] = {&d1, &d2};
  for (int j = 0; j < 2; ++j) {
    const CmcFrenetData& d = *src[j];
    const auto ex = diff_x(d.eta, d.grid), ey = diff_y(d.eta, d.grid);
    p.C[j] = d.nu;
    for (size_t n = 0; n < d.size(); ++n) {
      const cplx eta_z = 0.5 * cplx(ex[n], -ey[n]);
      p.gamma[j].push_back(-kI * kSqrt2 * eta_z);
      p.f[j].push_back(d.p[n] / kSqrt2);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Reconstruction.

namespace {

// Second fundamental form data at a node: for each normal n_k,
// sigma_xx = e^{2u} m_k + Re s_k / 2, sigma_yy = e^{2u} m_k - Re s_k / 2,
// sigma_xy = -Im s_k / 2, where m_k = <H, n_k> and s_k = 4 <sigma(d_z, d_z), n_k>.
struct NodeData {
  double u = 0.0, ux = 0.0, uy = 0.0;
  std::array<double, 2> mean{};
  std::array<cplx, 2> s{};
};

// Point, Phi_x, Phi_y, then the normals.
using State = std::array<Vec6, 5>;

struct Frenet {
  Target target;
  Epsilon eps;
  int normals = 1;

  int factors() const { return target.is_product() ? 2 : 1; }

  // Normal component of the derivative of a tangent field w in direction v,
  // coming from the quadric factors: -eps <v_f, w_f> x_f.
  Vec6 quadric(const Vec6& point, const Vec6& v, const Vec6& w) const {
    Vec6 out = Vec6::Zero();
    for (int f = 0; f < factors(); ++f) {
      const Vec3 vf = v.segment<3>(3 * f), wf = w.segment<3>(3 * f);
      out.segment<3>(3 * f) = -eps.sign() * inner3(vf, wf, eps) * point.segment<3>(3 * f);
    }
    return out;
  }

  double sig(const NodeData& d, int a, int b, int k) const {
    const double e2u = std::exp(2.0 * d.u);
    if (a == 0 && b == 0) return e2u * d.mean[k] + 0.5 * d.s[k].real();
    if (a == 1 && b == 1) return e2u * d.mean[k] - 0.5 * d.s[k].real();
    return -0.5 * d.s[k].imag();
  }

  // Second derivative Phi_ab.
  Vec6 second(const State& st, const NodeData& d, int a, int b) const {
    const Vec6& tx = st[1];
    const Vec6& ty = st[2];
    Vec6 out;
    if (a == 0 && b == 0) {
      out = d.ux * tx - d.uy * ty;
    } else if (a == 1 && b == 1) {
      out = -d.ux * tx + d.uy * ty;
    } else {
      out = d.uy * tx + d.ux * ty;
    }
    for (int k = 0; k < normals; ++k) out += sig(d, a, b, k) * st[3 + k];
    return out + quadric(st[0], st[1 + a], st[1 + b]);
  }

  State derivative(const State& st, const NodeData& d, int dir) const {
    State out{};
    out[0] = st[1 + dir];
    out[1] = second(st, d, dir, 0);
    out[2] = second(st, d, dir, 1);
    const double em2u = std::exp(-2.0 * d.u);
    for (int k = 0; k < normals; ++k) {
      out[3 + k] = -em2u * (sig(d, dir, 0, k) * st[1] + sig(d, dir, 1, k) * st[2]) +
                   quadric(st[0], st[1 + dir], st[3 + k]);
    }
    return out;
  }

  // Puts the point back on the target and the frame back to Gram matrix
  // diag(e^{2u}, e^{2u}, 1, ...). Returns the size of the correction.
  double project(State& st, double u) const {
    double moved = 0.0;
    const State before = st;
    for (int f = 0; f < factors(); ++f) {
      Vec3 x = st[0].segment<3>(3 * f);
      const double q = inner3(x, x, eps);
      x *= std::sqrt(eps.sign() / q);
      st[0].segment<3>(3 * f) = x;
    }
    const int m = 2 + normals;
    const double eu = std::exp(u);
    Eigen::MatrixXd V(6, m);
    for (int c = 0; c < m; ++c) {
      Vec6 v = tangent_projection(target, eps, st[0], st[1 + c]);
      V.col(c) = (c < 2) ? Vec6(v / eu) : v;
    }
    Eigen::MatrixXd G(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) G(r, c) = ambient_inner(target, eps, V.col(r), V.col(c));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::MatrixXd W = V * es.operatorInverseSqrt();
    for (int c = 0; c < m; ++c) st[1 + c] = (c < 2) ? Vec6(eu * W.col(c)) : Vec6(W.col(c));
    for (int c = 0; c < 1 + m; ++c) moved = std::max(moved, (st[c] - before[c]).norm());
    return moved;
  }
};

State axpy(const State& s, double h, const State& k, int count) {
  State out = s;
  for (int c = 0; c < count; ++c) out[c] += h * k[c];
  return out;
}

// One RK4 step of length `step` (which may be negative) in direction `dir`,
// with data at the start, midpoint and end.
State rk4(const Frenet& fr, const State& s, const NodeData& d0, const NodeData& dm, const NodeData& d1, int dir,
          double step) {
  const int count = 3 + fr.normals;
  const State k1 = fr.derivative(s, d0, dir);
  const State k2 = fr.derivative(axpy(s, 0.5 * step, k1, count), dm, dir);
  const State k3 = fr.derivative(axpy(s, 0.5 * step, k2, count), dm, dir);
  const State k4 = fr.derivative(axpy(s, step, k3, count), d1, dir);
  State out = s;
  for (int c = 0; c < count; ++c) out[c] += step / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  return out;
}

struct Sweep {
  std::vector<State> states;  // on the output grid
  double max_projection = 0.0;
};

// Integrates over the even nodes of the data grid from the centre node,
// x-line first (or column first) and then the transverse lines.
Sweep sweep(const Frenet& fr, const std::vector<NodeData>& data, const GridSpec& dg, const GridSpec& og,
            const State& init, int ic, int kc, bool x_first) {
  Sweep out;
  out.states.assign(static_cast<size_t>(og.nx) * og.ny, State{});
  auto node = [&](int i, int k) -> const NodeData& { return data[at(dg, i, k)]; };
  auto walk = [&](int i0, int k0, int dir, int sgn, int steps) {
    // dir 0 moves in x, 1 in y; output indices start at (i0, k0).
    int i = i0, k = k0;
    State s = out.states[at(og, i, k)];
    for (int n = 0; n < steps; ++n) {
      const int di = (dir == 0) ? sgn : 0, dk = (dir == 1) ? sgn : 0;
      const double step = sgn * 2.0 * (dir == 0 ? dg.hx() : dg.hy());
      const NodeData& a = node(2 * i, 2 * k);
      const NodeData& m = node(2 * i + di, 2 * k + dk);
      const NodeData& b = node(2 * i + 2 * di, 2 * k + 2 * dk);
      s = rk4(fr, s, a, m, b, dir, step);
      out.max_projection = std::max(out.max_projection, fr.project(s, b.u));
      i += di;
      k += dk;
      out.states[at(og, i, k)] = s;
    }
  };
  out.states[at(og, ic, kc)] = init;
  const int first = x_first ? 0 : 1, second = 1 - first;
  auto count = [&](int dir, int sgn, int from) {
    const int n = (dir == 0) ? og.nx : og.ny;
    return sgn > 0 ? n - 1 - from : from;
  };
  const int c0 = x_first ? ic : kc;
  walk(ic, kc, first, +1, count(first, +1, c0));
  walk(ic, kc, first, -1, count(first, -1, c0));
  const int lines = (first == 0) ? og.nx : og.ny;
  const int c1 = x_first ? kc : ic;
  for (int l = 0; l < lines; ++l) {
    const int i = (first == 0) ? l : ic, k = (first == 0) ? kc : l;
    walk(i, k, second, +1, count(second, +1, c1));
    walk(i, k, second, -1, count(second, -1, c1));
  }
  return out;
}

// Chart sampled on the nodes of a grid: positions and first derivatives from
// the integration, second derivatives by fourth-order differences of the
// first derivatives, cubic interpolation of positions between nodes.
ImmersionChart sampled_chart(const std::string& family, const Target& target, Epsilon eps, const GridSpec& og,
                             const std::vector<State>& st) {
  auto nodes = std::make_shared<std::vector<ChartJet>>(st.size());
  for (int k = 0; k < og.ny; ++k) {
    for (int i = 0; i < og.nx; ++i) {
      ChartJet& j = (*nodes)[at(og, i, k)];
      j.p = st[at(og, i, k)][0];
      j.dx = st[at(og, i, k)][1];
      j.dy = st[at(og, i, k)][2];
      const Vec6 txx = d1<Vec6>([&](int m) { return st[at(og, m, k)][1]; }, i, og.nx, og.hx());
      const Vec6 tyx = d1<Vec6>([&](int m) { return st[at(og, m, k)][2]; }, i, og.nx, og.hx());
      const Vec6 txy = d1<Vec6>([&](int m) { return st[at(og, i, m)][1]; }, k, og.ny, og.hy());
      const Vec6 tyy = d1<Vec6>([&](int m) { return st[at(og, i, m)][2]; }, k, og.ny, og.hy());
      j.dxx = txx;
      j.dyy = tyy;
      j.dxy = 0.5 * (txy + tyx);
    }
  }
  ImmersionChart c;
  c.family = family;
  c.target = target;
  c.eps = eps;
  c.domain = og.domain;
  c.pad = 0.0;
  const GridSpec g = og;
  auto locate = [g](double v, double v0, double h, int n, const char* axis) {
    const double t = (v - v0) / h;
    const double r = std::round(t);
    if (r < -1e-9 || r > n - 1 + 1e-9) throw DomainError(std::string("reconstructed chart: ") + axis + " out of range");
    return std::pair<double, int>{t, static_cast<int>(r)};
  };
  c.jet = [nodes, g, locate](double x, double y) {
    const auto [tx, i] = locate(x, g.domain.x0, g.hx(), g.nx, "x");
    const auto [ty, k] = locate(y, g.domain.y0, g.hy(), g.ny, "y");
    if (std::abs(tx - i) > 1e-6 || std::abs(ty - k) > 1e-6) {
      throw DomainError("reconstructed chart has jets only at its grid nodes");
    }
    return (*nodes)[at(g, i, k)];
  };
  c.eval = [nodes, g](double x, double y) {
    const double tx = (x - g.domain.x0) / g.hx(), ty = (y - g.domain.y0) / g.hy();
    if (tx < -1e-9 || ty < -1e-9 || tx > g.nx - 1 + 1e-9 || ty > g.ny - 1 + 1e-9) {
      throw DomainError("reconstructed chart: point outside the grid");
    }
    const int i0 = std::clamp(static_cast<int>(std::floor(tx)) - 1, 0, g.nx - 4);
    const int k0 = std::clamp(static_cast<int>(std::floor(ty)) - 1, 0, g.ny - 4);
    auto lagrange = [](double t, int base, int m) {
      double w = 1.0;
      for (int q = 0; q < 4; ++q)
        if (q != m) w *= (t - (base + q)) / static_cast<double>(m - q);
      return w;
    };
    Vec6 v = Vec6::Zero();
    for (int a = 0; a < 4; ++a) {
      const double wx = lagrange(tx, i0, a);
      for (int b = 0; b < 4; ++b) v += wx * lagrange(ty, k0, b) * (*nodes)[at(g, i0 + a, k0 + b)].p;
    }
    return v;
  };
  return c;
}

GridSpec output_grid(const GridSpec& dg) {
  if (dg.nx % 2 == 0 || dg.ny % 2 == 0) {
    throw DomainError("reconstruction needs an odd number of data nodes per side (RK4 midpoints)");
  }
  if (dg.nx < 9 || dg.ny < 9) throw DomainError("reconstruction needs at least 9 data nodes per side");
  return GridSpec{(dg.nx + 1) / 2, (dg.ny + 1) / 2, dg.domain};
}

GridSpec shrink(const GridSpec& g, int rings) {
  return GridSpec{g.nx - 2 * rings, g.ny - 2 * rings,
                  Domain{g.domain.x0 + rings * g.hx(), g.domain.x1 - rings * g.hx(), g.domain.y0 + rings * g.hy(),
                         g.domain.y1 - rings * g.hy()}};
}

void gate(const std::vector<IdentityResidual>& res, double limit, const char* who) {
  for (const IdentityResidual& r : res) {
    if (r.normalized > limit) {
      throw ConsistencyError(std::string(who) + ": data residual " + r.name + " = " + std::to_string(r.normalized) +
                             " exceeds " + std::to_string(limit));
    }
  }
}

Reconstruction finish(const Frenet& fr, const std::vector<NodeData>& nd, const GridSpec& dg, const State& init,
                      const std::string& family) {
  const GridSpec og = output_grid(dg);
  const int ic = og.nx / 2, kc = og.ny / 2;
  State s0 = init;
  fr.project(s0, nd[at(dg, 2 * ic, 2 * kc)].u);
  const Sweep a = sweep(fr, nd, dg, og, s0, ic, kc, true);
  const Sweep b = sweep(fr, nd, dg, og, s0, ic, kc, false);
  Reconstruction r;
  r.grid = og;
  r.interior = shrink(og, 2);
  r.max_step_projection = std::max(a.max_projection, b.max_projection);
  for (size_t n = 0; n < a.states.size(); ++n) {
    r.loop_closure = std::max(r.loop_closure, (a.states[n][0] - b.states[n][0]).norm());
  }
  r.chart = sampled_chart(family, fr.target, fr.eps, og, a.states);
  r.chart.notes.push_back("integrated x-line first from the centre node");
  return r;
}

}  // namespace

Reconstruction integrate_cmc_frenet(const CmcFrenetData& d, const ReconstructionOptions& opt) {
  gate(cmc_data_residuals(d), opt.residual_gate, "integrate_cmc_frenet");
  if (!(d.H > 0.0)) throw PreconditionError("integrate_cmc_frenet: H must be positive");
  const GridSpec& g = d.grid;
  const auto ux = diff_x(d.u, g), uy = diff_y(d.u, g);
  const auto ex = diff_x(d.eta, g), ey = diff_y(d.eta, g);
  std::vector<NodeData> nd(d.size());
  for (size_t n = 0; n < d.size(); ++n) {
    nd[n].u = d.u[n];
    nd[n].ux = ux[n];
    nd[n].uy = uy[n];
    nd[n].mean[0] = d.H;
    nd[n].s[0] = 4.0 * d.p[n];
  }
  Frenet fr{Target::line(), d.eps, 1};

  // Base frame at ((0,0,1), eta): the unit tangents and the normal have
  // vertical components (eta_x e^{-u}, eta_y e^{-u}, nu).
  const GridSpec og = output_grid(g);
  const size_t b = at(g, 2 * (og.nx / 2), 2 * (og.ny / 2));
  const double eu = std::exp(d.u[b]);
  Eigen::Vector3d r3(ex[b] / eu, ey[b] / eu, d.nu[b]);
  r3.normalize();
  Eigen::Vector3d seed = Eigen::Vector3d::Unit(0);
  if (std::abs(r3[0]) > 0.8) seed = Eigen::Vector3d::Unit(1);
  const Eigen::Vector3d r1 = (seed - seed.dot(r3) * r3).normalized();
  const Eigen::Vector3d r2 = r3.cross(r1);
  Eigen::Matrix3d R;
  R.row(0) = r1;
  R.row(1) = r2;
  R.row(2) = r3;
  auto column = [&R](int c) {
    Vec6 v = Vec6::Zero();
    v[0] = R(0, c);
    v[1] = R(1, c);
    v[3] = R(2, c);
    return v;
  };
  State init{};
  init[0] << 0.0, 0.0, 1.0, d.eta[b], 0.0, 0.0;
  init[1] = eu * column(0);
  init[2] = eu * column(1);
  init[3] = column(2);
  return finish(fr, nd, g, init, "reconstructed_cmc");
}

Reconstruction integrate_pmc_frenet(const PmcFrenetData& d, const ReconstructionOptions& opt) {
  gate(pmc_data_residuals(d), opt.residual_gate, "integrate_pmc_frenet");
  if (!(d.hnorm > 0.0)) throw PreconditionError("integrate_pmc_frenet: |H| must be positive");
  const GridSpec& g = d.grid;
  const auto ux = diff_x(d.u, g), uy = diff_y(d.u, g);
  std::vector<NodeData> nd(d.size());
  // Normals: n_0 = Htilde / |H|, n_1 = H / |H|; sigma(d_z, d_z) = f_1 xi + f_2 conj(xi)
  // with xi = (n_1 - i n_0) / sqrt2.
  for (size_t n = 0; n < d.size(); ++n) {
    nd[n].u = d.u[n];
    nd[n].ux = ux[n];
    nd[n].uy = uy[n];
    nd[n].mean = {0.0, d.hnorm};
    nd[n].s[0] = 2.0 * kSqrt2 * kI * (d.f[1][n] - d.f[0][n]);
    nd[n].s[1] = 2.0 * kSqrt2 * (d.f[0][n] + d.f[1][n]);
  }
  Frenet fr{Target::product(), d.eps, 2};

  // J_1, J_2 in the frame (e1, e2, n_0, n_1) from
  //   J_1 Phi_z = i C_1 Phi_z + gamma_1 xi,        J_1 xi = -2 e^{-2u} conj(gamma_1) Phi_z - i C_1 xi,
  //   J_2 Phi_z = i C_2 Phi_z + gamma_2 conj(xi),  J_2 xi = -2 e^{-2u} gamma_2 Phi_zbar + i C_2 xi.
  const GridSpec og = output_grid(g);
  const size_t b = at(g, 2 * (og.nx / 2), 2 * (og.ny / 2));
  const double eu = std::exp(d.u[b]);
  using CM = Eigen::Matrix4cd;
  using CV = Eigen::Vector4cd;
  const CV z = CV(1.0, -kI, 0.0, 0.0) / kSqrt2;  // Phi_z = e^u z / sqrt2
  const CV xi = CV(0.0, 0.0, -kI, 1.0) / kSqrt2;
  const cplx g1 = kSqrt2 * d.gamma[0][b] / eu, g2 = kSqrt2 * d.gamma[1][b] / eu;
  const double c1 = d.C[0][b], c2 = d.C[1][b];
  CM basis;
  basis << z, z.conjugate(), xi, xi.conjugate();
  auto structure = [&](const CV& jz, const CV& jxi) {
    CM img;
    img << jz, jz.conjugate(), jxi, jxi.conjugate();
    const CM m = img * basis.inverse();
    if (m.imag().cwiseAbs().maxCoeff() > 1e-6) {
      throw ConsistencyError("integrate_pmc_frenet: data do not define a real complex structure");
    }
    return Eigen::Matrix4d(m.real());
  };
  const Eigen::Matrix4d M1 = structure(kI * c1 * z + g1 * xi, -std::conj(g1) * z - kI * c1 * xi);
  const Eigen::Matrix4d M2 = structure(kI * c2 * z + g2 * xi.conjugate(), -g2 * z.conjugate() + kI * c2 * xi);
  const Eigen::Matrix4d I4 = Eigen::Matrix4d::Identity();
  if ((M1 * M1 + I4).cwiseAbs().maxCoeff() > 1e-4 || (M2 * M2 + I4).cwiseAbs().maxCoeff() > 1e-4 ||
      (M1 * M2 - M2 * M1).cwiseAbs().maxCoeff() > 1e-4) {
    throw ConsistencyError("integrate_pmc_frenet: data violate the frame relations of J_1, J_2");
  }
  // J_1 J_2 is -1 on the first factor and +1 on the second.
  auto unit_in = [&](const Eigen::Matrix4d& P) {
    int best = 0;
    for (int c = 1; c < 4; ++c)
      if (P.col(c).norm() > P.col(best).norm()) best = c;
    return Eigen::Vector4d(P.col(best).normalized());
  };
  const Eigen::Vector4d w1 = unit_in(0.5 * (I4 - M1 * M2));
  const Eigen::Vector4d w2 = unit_in(0.5 * (I4 + M1 * M2));
  Eigen::Matrix4d G;  // columns: images of a1, a2 = J a1, b1, b2 = J b1 in frame coordinates
  G.col(0) = w1;
  G.col(1) = M1 * w1;
  G.col(2) = w2;
  G.col(3) = M1 * w2;
  // Frame vector c has coordinates G(c, r) on the basis (a1, a2, b1, b2).
  auto frame = [&G](int c) {
    Vec6 v = Vec6::Zero();
    v[0] = G(c, 0);
    v[1] = G(c, 1);
    v[3] = G(c, 2);
    v[4] = G(c, 3);
    return v;
  };
  State init{};
  init[0] << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0;
  init[1] = eu * frame(0);
  init[2] = eu * frame(1);
  init[3] = frame(2);
  init[4] = frame(3);
  return finish(fr, nd, g, init, "reconstructed_pmc");
}

// ---------------------------------------------------------------------------
// Alignment and congruence.

namespace {

struct NodeSample {
  Vec6 p, dx, dy;
};

NodeSample sample(const ImmersionChart& c, const GridSpec& g, int i, int k, bool reflect) {
  const double x = g.x(i);
  const double y = reflect ? g.y(g.ny - 1 - k) : g.y(k);
  const ChartJet j = sample_jet(c, x, y, std::min(g.hx(), g.hy()));
  return {j.p, j.dx, reflect ? Vec6(-j.dy) : j.dy};
}

// Columns p, v, J v for the factor point p and tangent v.
Eigen::Matrix3d factor_frame(const Vec3& p, const Vec3& v, Epsilon eps, double orientation) {
  Eigen::Matrix3d m;
  m.col(0) = p;
  m.col(1) = v;
  m.col(2) = orientation * rotate_tangent(p, v, eps);
  return m;
}

}  // namespace

Alignment align_charts(const ImmersionChart& a, const ImmersionChart& b, const GridSpec& grid, bool reflect) {
  if (a.target.kind != b.target.kind || a.eps.sign() != b.eps.sign()) {
    throw UsageError("align_charts: charts have different targets");
  }
  if (a.target.kind == TargetKind::kFactorTimesCircle) {
    throw UsageError("align_charts: circle targets are compared on their universal cover; use a line chart");
  }
  require_grid(grid, 2, "align_charts");
  const int factors = a.target.is_product() ? 2 : 1;
  const Eigen::Matrix3d D = Eigen::Vector3d(1.0, 1.0, a.eps.sign()).asDiagonal();

  // Node where the factor frames of `a` are best conditioned.
  std::vector<NodeSample> sa, sb;
  for (int k = 0; k < grid.ny; ++k) {
    for (int i = 0; i < grid.nx; ++i) {
      sa.push_back(sample(a, grid, i, k, false));
      sb.push_back(sample(b, grid, i, k, reflect));
    }
  }
  Alignment out;
  std::array<Eigen::Matrix3d, 2> L;
  // Each factor map is fixed by a point, a tangent vector there and its
  // J-rotation; the sign in front of J picks orientation-preserving or
  // reversing maps, and the better of the two is kept.
  for (int f = 0; f < factors; ++f) {
    size_t best = 0;
    bool use_x = true;
    double best_len = -1.0;
    for (size_t n = 0; n < sa.size(); ++n) {
      for (bool along_x : {true, false}) {
        const Vec3 v = (along_x ? sa[n].dx : sa[n].dy).segment<3>(3 * f);
        const double len = inner3(v, v, a.eps);
        if (len > best_len) {
          best_len = len;
          best = n;
          use_x = along_x;
        }
      }
    }
    if (best_len < 1e-12) throw PreconditionError("align_charts: a factor of the chart is constant");
    const Vec3 pa = sa[best].p.segment<3>(3 * f), pb = sb[best].p.segment<3>(3 * f);
    const Vec3 va = (use_x ? sa[best].dx : sa[best].dy).segment<3>(3 * f);
    const Vec3 vb = (use_x ? sb[best].dx : sb[best].dy).segment<3>(3 * f);
    double best_dist = std::numeric_limits<double>::infinity();
    for (double orientation : {1.0, -1.0}) {
      const Eigen::Matrix3d cand =
          factor_frame(pb, vb, a.eps, orientation) * factor_frame(pa, va, a.eps, 1.0).inverse();
      double dist = 0.0;
      for (size_t n = 0; n < sa.size(); ++n) {
        dist = std::max(dist, (cand * sa[n].p.segment<3>(3 * f) - sb[n].p.segment<3>(3 * f)).norm());
      }
      if (dist < best_dist) {
        best_dist = dist;
        L[f] = cand;
      }
    }
    out.isometry_defect = std::max(out.isometry_defect, (L[f].transpose() * D * L[f] - D).cwiseAbs().maxCoeff());
  }
  // Height: t -> s t + c with s fixed by the first derivatives.
  double s = 1.0, c = 0.0;
  if (!a.target.is_product()) {
    double dot = 0.0;
    for (size_t n = 0; n < sa.size(); ++n) dot += sa[n].dx[3] * sb[n].dx[3] + sa[n].dy[3] * sb[n].dy[3];
    s = (dot < 0.0) ? -1.0 : 1.0;
    for (size_t n = 0; n < sa.size(); ++n) c += sb[n].p[3] - s * sa[n].p[3];
    c /= static_cast<double>(sa.size());
  }
  for (size_t n = 0; n < sa.size(); ++n) {
    Vec6 mapped = Vec6::Zero();
    for (int f = 0; f < factors; ++f) mapped.segment<3>(3 * f) = L[f] * sa[n].p.segment<3>(3 * f);
    if (!a.target.is_product()) mapped[3] = s * sa[n].p[3] + c;
    out.distance = std::max(out.distance, (mapped - sb[n].p).norm());
  }
  return out;
}

CongruenceVerdict weak_congruence_check(const ImmersionChart& a, const ImmersionChart& b, const GridSpec& grid,
                                        double tol) {
  CongruenceVerdict v;
  auto metric_gap = [&](bool reflect) {
    double gap = 0.0, top = 0.0;
    for (int k = 0; k < grid.ny; ++k) {
      for (int i = 0; i < grid.nx; ++i) {
        const NodeSample p = sample(a, grid, i, k, false), q = sample(b, grid, i, k, reflect);
        const double ea = ambient_inner(a.target, a.eps, p.dx, p.dx);
        const double eb = ambient_inner(b.target, b.eps, q.dx, q.dx);
        gap = std::max(gap, std::abs(ea - eb));
        top = std::max(top, ea);
      }
    }
    return gap / top;
  };
  const double g_direct = metric_gap(false), g_reflect = metric_gap(true);
  v.metric_gap = std::min(g_direct, g_reflect);
  if (v.metric_gap > tol) {
    v.reason = "induced metrics differ (relative gap " + std::to_string(v.metric_gap) + ")";
    return v;
  }
  auto ok = [tol](const Alignment& al) { return al.distance <= tol && al.isometry_defect <= tol; };
  if (g_direct <= tol) v.direct = align_charts(a, b, grid, false);
  else v.direct.distance = std::numeric_limits<double>::infinity();
  if (g_reflect <= tol) v.reflected = align_charts(a, b, grid, true);
  else v.reflected.distance = std::numeric_limits<double>::infinity();
  v.congruent = ok(v.direct);
  v.weakly_congruent = v.congruent || ok(v.reflected);
  if (v.congruent) {
    v.reason = "congruent";
  } else if (v.weakly_congruent) {
    v.reason = "weakly congruent through y -> -y";
  } else {
    v.reason = "no isometry aligns the charts within tolerance";
  }
  return v;
}

}  // namespace pmc
