// SPDX-License-Identifier: Apache-2.0
//
// The profile equation (h')^2 = p(h) q(h) with
//   p(t) = a - t^2,
//   q(t) = -(1 + eps b) t^2 + 2 eps b c t - eps b (1 + c^2) + a,
// which generates the invariant PMC and CMC families.
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pmc/ambient.hpp"

namespace pmc {

struct ProfileParams {
  Epsilon eps;
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;

  /// Throws DomainError unless b > 0.
  static ProfileParams make(Epsilon eps, double a, double b, double c);
};

double profile_p(const ProfileParams& prm, double t);
double profile_q(const ProfileParams& prm, double t);
/// p(t) q(t) and its derivative in t.
double profile_pq(const ProfileParams& prm, double t);
double profile_pq_derivative(const ProfileParams& prm, double t);

enum class RestrictionClause {
  kSphere,              // eps=+1: (1+b)(a-b) >= b c^2
  kHyperbolicSteep,     // eps=-1, b>1: b c^2 >= (b-1)(a+b)
  kHyperbolicCritical,  // eps=-1, b=1: c != 0 or a <= -1
  kUnconstrained,       // eps=-1, b<1: no restriction is imposed
};

struct FeasibilityVerdict {
  bool feasible = false;
  RestrictionClause clause = RestrictionClause::kSphere;
  std::string description;
};

FeasibilityVerdict check_restrictions(const ProfileParams& prm);

/// f, f', f'' of a function of one variable at a point.
struct Univariate {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

struct ProfileSolution {
  ProfileParams params;
  double step = 0.0;          // output grid spacing
  int substeps = 1;           // internal RK4 steps per output step
  std::vector<double> x;
  std::vector<double> h;
  std::vector<double> hprime;
  bool nonconstant = true;
  bool truncated_left = false;
  bool truncated_right = false;
  double drift = 0.0;         // max |h'^2 - p q| over the samples

  double x_min() const { return x.front(); }
  double x_max() const { return x.back(); }
};

struct SolveOptions {
  double drift_tol = 1e-8;
  int max_halvings = 12;
};

/// Integrates h'' = (pq)'(h)/2 with h(0)=h0, h'(0)=sign0 sqrt(p q (h0)) over
/// [x0, x1] (x0 <= 0 <= x1) on a uniform grid of spacing `step`.
ProfileSolution solve_profile(const ProfileParams& prm, double h0 = 0.0, int sign0 = +1,
                              double x0 = -1.0, double x1 = 1.0, double step = 1e-2,
                              const SolveOptions& opt = {});

/// Anything that can act as the profile h(x) of a family.
class ProfileFunction {
 public:
  virtual ~ProfileFunction() = default;
  virtual Univariate at(double x) const = 0;
  virtual double x_min() const = 0;
  virtual double x_max() const = 0;
  virtual const ProfileParams& params() const = 0;
  virtual std::string describe() const = 0;
};

/// Dense evaluation of a ProfileSolution: one RK4 step from the nearest node.
class SampledProfile final : public ProfileFunction {
 public:
  explicit SampledProfile(ProfileSolution sol);
  Univariate at(double x) const override;
  double x_min() const override { return sol_.x_min(); }
  double x_max() const override { return sol_.x_max(); }
  const ProfileParams& params() const override { return sol_.params; }
  std::string describe() const override { return "ode"; }
  const ProfileSolution& solution() const { return sol_; }

 private:
  ProfileSolution sol_;
};

enum class ClosedFormKind { kSinhFamily, kSnFamily, kTanFamily };

/// Exact solutions:
///   sinh: eps=-1, b=1, c=0, a<=-1:  h = sqrt(-a) sinh(sqrt(-(1+a)) x)
///   sn:   eps=+1, c=0, 0<b<a:       h = sqrt((a-b)/(1+b)) sn(sqrt(a(1+b)) x)
///   tan:  eps=-1, a=-1, c=0, b<1:   h = tan(sqrt(1-b) x)
std::shared_ptr<const ProfileFunction> closed_form(ClosedFormKind kind, const ProfileParams& prm);

/// Period of the sn-family profile, 4 K(kappa) / sqrt(a(1+b)).
double sn_family_period(const ProfileParams& prm);

/// F(x) = int_{x0}^{x} g(h(t)) dt for a profile h, tabulated with Gauss-Legendre
/// cells and completed on the partial cell. `g` returns g(h) and dg/dh.
class ProfileIntegral {
 public:
  using Integrand = std::function<std::pair<double, double>(double h)>;
  ProfileIntegral(std::shared_ptr<const ProfileFunction> profile, Integrand g, double x0,
                  double cell = 1e-2);

  /// F, F' = g(h), F'' = g'(h) h'.
  Univariate at(double x) const;

 private:
  double integrate_cell(double a, double b) const;
  std::shared_ptr<const ProfileFunction> profile_;
  Integrand g_;
  double x0_;
  double cell_;
  std::vector<double> nodes_;  // x0 + k cell, covering [x_min, x_max]
  std::vector<double> table_;  // F at nodes_
  int origin_ = 0;             // index of x0 in nodes_
};

}  // namespace pmc
