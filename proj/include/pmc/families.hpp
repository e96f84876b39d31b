// SPDX-License-Identifier: Apache-2.0
//
// Constructors for the explicit PMC surfaces in M^2(eps) x M^2(eps) and CMC
// surfaces in M^2(eps) x R (or x S^1) studied by the library.
#pragma once

#include <memory>

#include "pmc/chart.hpp"
#include "pmc/curves.hpp"
#include "pmc/profile_ode.hpp"

namespace pmc {

inline constexpr Domain kUnitSquare{-1.0, 1.0, -1.0, 1.0};

/// Curvature of the level circle x3 = height (sphere: |height| < 1,
/// hyperbolic plane: height > 1).
double circle_curvature_from_height(Epsilon eps, double height);
/// Curvature of the hypercycle x1 = offset in H^2.
double hypercycle_curvature_from_offset(double offset);

/// (alpha(x), beta(y)) with unit-speed curves of constant curvatures.
/// Throws PreconditionError for two geodesics when `require_pmc` is set.
ImmersionChart product_of_curves(Epsilon eps, double k_alpha, double k_beta, Domain d = kUnitSquare,
                                 bool require_pmc = true);

/// Profile h to use for (eps, a, b, c) on a domain: the closed form when the
/// parameters are in its regime, otherwise an ODE solution through h(0)=0
/// (or the first admissible h0 found by scanning) covering `span`.
std::shared_ptr<const ProfileFunction> default_profile(const ProfileParams& prm, double x0, double x1);

/// The invariant PMC family driven by a profile h. `pad` extends the
/// evaluable region beyond `d` (for stencils).
ImmersionChart pmc_profile_family(const ProfileParams& prm, std::shared_ptr<const ProfileFunction> h,
                                  Domain d = kUnitSquare, double pad = 0.1);
ImmersionChart pmc_profile_family(const ProfileParams& prm, const ProfileSolution& h, Domain d = kUnitSquare,
                                  double pad = 0.1);

/// The surface Phi_0 with vanishing Hopf differentials, 0 < |H| < 1/2.
ImmersionChart pmc_phi0(double hnorm, Domain d = kUnitSquare, double pad = 0.1);

/// The CMC family in M^2(eps) x R driven by a profile with eps(a-h^2) > b.
ImmersionChart cmc_profile_family(const ProfileParams& prm, std::shared_ptr<const ProfileFunction> h,
                                  Domain d = kUnitSquare, double pad = 0.1);
ImmersionChart cmc_profile_family(const ProfileParams& prm, const ProfileSolution& h, Domain d = kUnitSquare,
                                  double pad = 0.1);

/// Psi_lambda in H^2 x R (H = 1/2).
ImmersionChart cmc_psi_lambda(double lambda, Domain d = kUnitSquare, double pad = 0.1);

/// Leite's CMC plane in H^2 x R, 0 < H < 1/2, on (-pi/2, pi/2) x R.
ImmersionChart cmc_leite(double hvalue, Domain d = kUnitSquare, double pad = 0.1);

struct TorusCharts {
  ImmersionChart circle;  // into S^2 x S^1(r), doubly periodic
  ImmersionChart line;    // the same surface in S^2 x R
  double kappa = 0.0;
  double radius = 0.0;
  Periods periods;
};

/// The CMC tori for 0 < b < a, on one fundamental domain.
TorusCharts cmc_torus(double a, double b);

/// Composes a chart in M^2(eps) x R with the totally geodesic inclusion
/// into M^2(eps) x M^2(eps). Charts into S^2 x S^1(1) are included through
/// the equator of the second factor.
ImmersionChart geodesic_inclusion(const ImmersionChart& src);

/// Multiplies the height coordinate of a chart into M^2(eps) x R.
ImmersionChart scale_height(const ImmersionChart& src, double factor);

}  // namespace pmc
