// SPDX-License-Identifier: Apache-2.0
//
// Frenet data of PMC surfaces in M^2(eps) x M^2(eps) and of CMC surfaces in
// M^2(eps) x R, the maps between them, and reconstruction of immersions from
// data by integrating the Frenet systems along grid lines.
//
// Data live on the nodes of a GridSpec (index k * nx + i). Reconstruction
// uses RK4 with step 2h and the odd data nodes as midpoints, so a data grid of
// n nodes yields a reconstructed chart on the (n + 1) / 2 even nodes; grids
// must therefore have an odd number of nodes in each direction.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "pmc/chart.hpp"
#include "pmc/diffgeo.hpp"

namespace pmc {

struct PmcFrenetData {
  GridSpec grid;
  Epsilon eps;
  double hnorm = 0.0;  // |H|
  std::vector<double> u;
  std::array<std::vector<double>, 2> C;
  std::array<std::vector<cplx>, 2> gamma, f;

  size_t size() const { return u.size(); }
};

struct CmcFrenetData {
  GridSpec grid;
  Epsilon eps;
  double H = 0.0;
  std::vector<double> u, nu, eta;
  std::vector<cplx> p;
  /// |eta(x-line first) - eta(column first)| when eta came from path
  /// integration; zero when sampled from a chart.
  double eta_path_defect = 0.0;

  size_t size() const { return u.size(); }
};

/// Integrability residuals of the PMC Frenet system on the data grid
/// (fourth-order differences, interior nodes): gamma_modulus,
/// integrability_c, integrability_f, integrability_gamma.
std::vector<IdentityResidual> pmc_data_residuals(const PmcFrenetData& d);

/// Integrability residuals of the CMC Frenet system: eta_modulus,
/// integrability_p, integrability_nu, integrability_eta.
std::vector<IdentityResidual> cmc_data_residuals(const CmcFrenetData& d);

/// Samples (u, C_j, gamma_j, f_j, |H|) of a chart into a product target.
/// Throws ConsistencyError when the parallelism residual exceeds
/// `parallel_tol` or |H| varies by more than 1e-6 (relative).
PmcFrenetData extract_pmc_data(const ImmersionChart& chart, const GridSpec& grid, double parallel_tol = 1e-4);

/// Samples (u, nu, p, eta, H) of a chart into M^2(eps) x R or x S^1. Heights
/// on the circle are unwrapped along the integration tree.
CmcFrenetData extract_cmc_data(const ImmersionChart& chart, const GridSpec& grid);

/// nu = C_j, p = sqrt2 f_j, H = |H|, eta integrated from
/// eta_x = -sqrt2 Im gamma_j, eta_y = -sqrt2 Re gamma_j with eta = 0 at node 0.
/// Throws ConsistencyError when the two integration orders disagree by more
/// than eta_tol * (1 + max |eta|).
CmcFrenetData pmc_to_cmc(const PmcFrenetData& d, int j, double eta_tol = 1e-6);

/// C_j = nu_j, gamma_j = -i sqrt2 (eta_j)_z, f_j = p_j / sqrt2.
/// Throws UsageError for mismatched grids, eps, u or H.
PmcFrenetData cmc_to_pmc(const CmcFrenetData& d1, const CmcFrenetData& d2, double tol = 1e-8);

struct Reconstruction {
  ImmersionChart chart;
  GridSpec grid;           // nodes of the reconstructed chart
  GridSpec interior;       // grid minus two boundary rings, where five-point stencils fit
  double loop_closure = 0.0;   // max distance between the two integration orders
  double max_step_projection = 0.0;  // largest correction applied by the per-step projection
};

struct ReconstructionOptions {
  double residual_gate = 1e-3;   // refuse data whose integrability residuals exceed this
};

/// Integrates the CMC Frenet system from a canonical base frame at the centre
/// node. The chart has jets only at its nodes (first derivatives from the
/// integrated frame, second derivatives from fourth-order differences of it).
Reconstruction integrate_cmc_frenet(const CmcFrenetData& d, const ReconstructionOptions& opt = {});

/// Same for the PMC Frenet system; the initial frame is placed so that J_1 and
/// J_2 act on it as the data prescribe.
Reconstruction integrate_pmc_frenet(const PmcFrenetData& d, const ReconstructionOptions& opt = {});

struct Alignment {
  double distance = 0.0;          // max pointwise distance after alignment
  double isometry_defect = 0.0;   // how far the fitted factor maps are from isometries
};

/// Fits the ambient isometry taking chart a to chart b from the point and
/// first-order frame at one well-conditioned node, then measures the
/// pointwise distance over the grid. With `reflect`, b is precomposed with
/// the reflection y -> y0 + y1 - y of the grid rectangle.
Alignment align_charts(const ImmersionChart& a, const ImmersionChart& b, const GridSpec& grid, bool reflect = false);

struct CongruenceVerdict {
  double metric_gap = 0.0;         // max relative gap of the conformal factors (best of both)
  Alignment direct, reflected;
  bool congruent = false;          // direct alignment within tol
  bool weakly_congruent = false;   // direct or reflected alignment within tol
  std::string reason;
};

/// Charts into M^2(eps) x R (or two product charts) on a common grid.
CongruenceVerdict weak_congruence_check(const ImmersionChart& a, const ImmersionChart& b, const GridSpec& grid,
                                        double tol = 1e-3);

}  // namespace pmc
