// SPDX-License-Identifier: Apache-2.0
//
// Pointwise and grid-level surface geometry of immersion charts: conformal
// factor, mean curvature vector and its rotation, Kaehler functions,
// curvature scalars, Frenet scalars and Hopf coefficients for product
// targets, and the Abresch-Rosenberg data for targets M^2(eps) x R / S^1.
//
// Conventions (z = x + i y):
//   Phi_z  = (Phi_x - i Phi_y) / 2,   Phi_zz = (Phi_xx - Phi_yy - 2 i Phi_xy) / 4
//   xi     = (H - i Htilde) / (sqrt(2) |H|), paired with the bilinear complex
//            extension of the ambient metric.
//   {e1, e2, Htilde/|H|, H/|H|} is positively oriented for pi_1^* omega ^ pi_2^* omega.
#pragma once

#include <array>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "pmc/chart.hpp"

namespace pmc {

using cplx = std::complex<double>;

/// Jet of a chart at (x, y). Uses the analytic jet when present and
/// `prefer_analytic` is set; otherwise centred differences with step h.
/// Throws DomainError when the stencil leaves the evaluable region.
ChartJet sample_jet(const ImmersionChart& chart, double x, double y, double h, bool prefer_analytic = true);

/// Centred second-order differences of chart.eval (9 evaluations).
ChartJet numeric_jet(const ImmersionChart& chart, double x, double y, double h);

/// Riemann tensor of the target (sum of the factor tensors) on R^6 vectors.
double ambient_curvature(const Target& t, Epsilon eps, const Vec6& a, const Vec6& b, const Vec6& c, const Vec6& d);

struct PointGeometry {
  double x = 0.0, y = 0.0;
  Vec6 p, dx, dy;
  double u = 0.0;
  double conformal_defect = 0.0;

  Vec6 e1, e2;                   // orthonormal tangent frame, e1 along Phi_x
  std::vector<Vec6> normals;     // orthonormal normal frame inside the target
  std::array<Vec6, 3> sigma;     // second fundamental form on (xx, xy, yy)
  Vec6 H = Vec6::Zero();
  double hnorm = 0.0;            // |H|
  double k_gauss = 0.0;          // intrinsic curvature from the Gauss equation

  // Product targets.
  Vec6 Htilde = Vec6::Zero();
  std::array<double, 2> C{};
  std::array<cplx, 2> gamma{}, f{};
  std::array<cplx, 2> theta{};       // 2 sqrt2 |H| f_j + (eps/2) gamma_j^2
  std::array<cplx, 2> theta_def{};   // 2<Phi_zz, H +- iHt> + (eps/4|H|^2)<J_j Phi_z, H +- iHt>^2
  std::array<cplx, 2> theta_alt{};   // 2<Phi_zz, H +- iHt> - (eps/|H|^2)<J_j Phi_z, Ht>^2
  double xi_defect = 0.0;            // |<J1 Phi_z, xi>|, |<J2 Phi_z, conj xi>| relative to e^u
  double kbar = 0.0, kbar_perp = 0.0;                 // from C_j
  double kbar_tensor = 0.0, kbar_perp_tensor = 0.0;   // from the curvature tensor
  std::array<std::array<double, 2>, 2> X{};  // coefficients of tan(J_j Htilde) on (Phi_x, Phi_y)
  std::array<double, 2> jht_normal_defect{};  // |nor(J_1 Ht) - C_1 H|, |nor(J_2 Ht) + C_2 H|, over |H|

  // Targets M^2(eps) x R or x S^1.
  Vec6 N = Vec6::Zero();  // H / |H|
  double nu = 0.0;        // <N, vertical>
  cplx eta_z{};           // <Phi_z, vertical>
  cplx p_hopf{};          // <Phi_zz, N>
  cplx theta_ar{};        // |H| p - (eps/2) eta_z^2
  double height = 0.0;    // line coordinate, or r * angle on the circle
};

/// Full pointwise analysis. Throws PreconditionError when |H| < 1e-10.
PointGeometry point_geometry(const ImmersionChart& chart, const ChartJet& jet, double x, double y);

struct GridSpec {
  int nx = 81;
  int ny = 81;
  Domain domain;
  double hx() const { return domain.width() / (nx - 1); }
  double hy() const { return domain.height() / (ny - 1); }
  double x(int i) const { return domain.x0 + hx() * i; }
  double y(int k) const { return domain.y0 + hy() * k; }
};

struct AnalysisOptions {
  double fd_step = 1e-3;        // stencil step for K, gradients, Laplacians, parallelism
  bool analytic_jets = true;    // use chart.jet when present
  double jet_step = 1e-3;       // step for numeric jets
  bool stencils = true;         // false: pointwise data only, stencil values left zero
  bool fourth_order = false;    // five-point differences (samples at +-fd_step and +-2 fd_step)
};

/// Quantities that need a 5-point stencil around each grid point.
struct StencilValues {
  double K = 0.0;                   // -e^{-2u} Laplacian(u)
  double parallelism = 0.0;         // max_i |(d_i H)^normal| / (|Phi_i| |H|)
  std::array<double, 2> grad_c2{};  // |grad C_j|^2
  std::array<double, 2> lap_c{};    // Laplacian C_j
  std::array<double, 2> div_x{};    // div X_j
  std::array<double, 2> grad_c_x{}; // <grad C_j, X_j>
  std::array<cplx, 2> c_z{}, f_zbar{}, gamma_zbar{};
  // M^2 x R data.
  cplx p_zbar{}, nu_z{};
  double eta_lap = 0.0;             // eta_{z zbar}
  double hnorm_grad = 0.0;          // |grad |H|| relative to |H|
};

struct SurfaceInvariants {
  GridSpec grid;
  Target target;
  Epsilon eps;
  AnalysisOptions options;
  std::vector<PointGeometry> pts;   // index k * nx + i
  std::vector<StencilValues> stencil;

  const PointGeometry& at(int i, int k) const { return pts[static_cast<size_t>(k) * grid.nx + i]; }
  const StencilValues& st(int i, int k) const { return stencil[static_cast<size_t>(k) * grid.nx + i]; }
  size_t size() const { return pts.size(); }
};

SurfaceInvariants analyze(const ImmersionChart& chart, const GridSpec& grid, const AnalysisOptions& opt = {});

/// max over the interior of |d/dzbar field| by centred differences.
/// Throws DomainError below 5 x 5 points.
double max_dzbar(const std::vector<cplx>& field, int nx, int ny, double hx, double hy);

/// max_dzbar divided by
/// (max |field| + floor). Throws DomainError below 5 x 5 points.
double holomorphy_residual(const std::vector<cplx>& field, int nx, int ny, double hx, double hy,
                           double floor = 1e-3);

std::vector<cplx> theta_field(const SurfaceInvariants& inv, int j);

struct IdentityResidual {
  std::string name;
  double max_abs = 0.0;     // max |lhs - rhs|
  double scale = 0.0;       // normalising scale
  double normalized = 0.0;  // max_abs / scale
};

/// Running max of |lhs - rhs|, normalised at the end by
/// (max |lhs|, |rhs| + the largest natural unit of the equation + 1e-12).
class ResidualAccumulator {
 public:
  explicit ResidualAccumulator(std::string name) { r_.name = std::move(name); }
  void add(cplx lhs, cplx rhs, double unit);
  IdentityResidual finish() const;

 private:
  IdentityResidual r_;
  double side_ = 0.0;
  double unit_ = 0.0;
};

/// Pointwise identities of PMC surfaces (product targets) or CMC surfaces
/// (other targets), evaluated on the grid and normalised.
std::vector<IdentityResidual> identity_residuals(const SurfaceInvariants& inv);

const IdentityResidual& find_residual(const std::vector<IdentityResidual>& all, const std::string& name);

struct Summary {
  double max_conformal_defect = 0.0;
  double max_parallelism = 0.0;
  double min_hnorm = 0.0, max_hnorm = 0.0;
  double max_c_gap = 0.0;            // max |C_1 - C_2|
  double max_kbar_gap = 0.0;         // two-path agreement for Kbar and Kbar_perp
  double max_theta_gap = 0.0;        // agreement of the three Hopf formulas
  double max_xi_defect = 0.0;
  double max_curvature_excess = 0.0; // max of K - (|H|^2 + (1+eps)/2)
};

Summary summarize(const SurfaceInvariants& inv);

struct TorusIntegrals {
  double area = 0.0;
  std::array<double, 2> int_c{};
  double deg_phi = 0.0;
  double deg_psi = 0.0;
};

/// Periodic trapezoid quadrature of C_j dA and the Jacobian degrees over the
/// fundamental domain of a doubly periodic product chart.
TorusIntegrals torus_integrals(const ImmersionChart& chart, int n = 128);

struct AbreschRosenberg {
  std::vector<cplx> theta;
  double holomorphy = 0.0;
  double hnorm = 0.0;
  double hnorm_variation = 0.0;
};

/// Abresch-Rosenberg coefficient field of a chart into M^2(eps) x R or x S^1.
/// Throws PreconditionError when |H| varies by more than `hnorm_tol`
/// (loosen it for integrated charts, whose |H| carries discretisation error).
AbreschRosenberg abresch_rosenberg(const SurfaceInvariants& inv, double hnorm_tol = 1e-6);

}  // namespace pmc
