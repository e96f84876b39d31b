// SPDX-License-Identifier: Apache-2.0
#include "pmc/profile_ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pmc/elliptic.hpp"
#include "pmc/errors.hpp"

namespace pmc {

namespace {

constexpr double kParamTol = 1e-12;
constexpr double kBlowUp = 1e8;

struct State {
  double h;
  double hp;
};

State rk4_step(const ProfileParams& prm, State s, double dx) {
  auto acc = [&](double h) { return 0.5 * profile_pq_derivative(prm, h); };
  const double k1h = s.hp, k1p = acc(s.h);
  const double k2h = s.hp + 0.5 * dx * k1p, k2p = acc(s.h + 0.5 * dx * k1h);
  const double k3h = s.hp + 0.5 * dx * k2p, k3p = acc(s.h + 0.5 * dx * k2h);
  const double k4h = s.hp + dx * k3p, k4p = acc(s.h + dx * k3h);
  return {s.h + dx / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h),
          s.hp + dx / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)};
}

bool admissible(const ProfileParams& prm, double h) {
  return std::isfinite(h) && std::abs(h) < kBlowUp && prm.eps.sign() * profile_p(prm, h) > 0.0;
}

double drift_of(const ProfileParams& prm, double h, double hp) {
  const double pq = profile_pq(prm, h);
  return std::abs(hp * hp - pq) / std::max(1.0, std::abs(pq));
}

// One-directional march of n output steps; stops before the first
// inadmissible sample.
struct March {
  std::vector<State> states;
  bool truncated = false;
};

March march(const ProfileParams& prm, State s0, double dx, int n, int substeps) {
  March m;
  m.states.push_back(s0);
  const double sub = dx / substeps;
  State s = s0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < substeps; ++k) s = rk4_step(prm, s, sub);
    if (!admissible(prm, s.h) || !std::isfinite(s.hp)) {
      m.truncated = true;
      break;
    }
    m.states.push_back(s);
  }
  return m;
}

ProfileSolution assemble(const ProfileParams& prm, double step, int substeps, const March& back,
                         const March& fwd) {
  ProfileSolution sol;
  sol.params = prm;
  sol.step = step;
  sol.substeps = substeps;
  const int nb = static_cast<int>(back.states.size()) - 1;
  for (int i = nb; i >= 1; --i) {
    sol.x.push_back(-i * step);
    sol.h.push_back(back.states[i].h);
    sol.hprime.push_back(back.states[i].hp);
  }
  for (std::size_t i = 0; i < fwd.states.size(); ++i) {
    sol.x.push_back(static_cast<double>(i) * step);
    sol.h.push_back(fwd.states[i].h);
    sol.hprime.push_back(fwd.states[i].hp);
  }
  sol.truncated_left = back.truncated;
  sol.truncated_right = fwd.truncated;
  for (std::size_t i = 0; i < sol.x.size(); ++i) {
    sol.drift = std::max(sol.drift, drift_of(prm, sol.h[i], sol.hprime[i]));
  }
  return sol;
}

}  // namespace

ProfileParams ProfileParams::make(Epsilon eps, double a, double b, double c) {
  if (!(b > 0.0)) throw DomainError("profile parameter b must be positive");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw DomainError("profile parameters must be finite");
  }
  return ProfileParams{eps, a, b, c};
}

double profile_p(const ProfileParams& prm, double t) { return prm.a - t * t; }

double profile_q(const ProfileParams& prm, double t) {
  const double e = prm.eps.sign();
  return -(1.0 + e * prm.b) * t * t + 2.0 * e * prm.b * prm.c * t - e * prm.b * (1.0 + prm.c * prm.c) +
         prm.a;
}

double profile_pq(const ProfileParams& prm, double t) { return profile_p(prm, t) * profile_q(prm, t); }

double profile_pq_derivative(const ProfileParams& prm, double t) {
  const double e = prm.eps.sign();
  const double dp = -2.0 * t;
  const double dq = -2.0 * (1.0 + e * prm.b) * t + 2.0 * e * prm.b * prm.c;
  return dp * profile_q(prm, t) + profile_p(prm, t) * dq;
}

FeasibilityVerdict check_restrictions(const ProfileParams& prm) {
  if (!(prm.b > 0.0)) throw DomainError("profile parameter b must be positive");
  const double a = prm.a, b = prm.b, c = prm.c;
  FeasibilityVerdict v;
  if (prm.eps.is_sphere()) {
    v.clause = RestrictionClause::kSphere;
    v.feasible = (1.0 + b) * (a - b) >= b * c * c - kParamTol;
    v.description = "(1+b)(a-b) >= b c^2";
  } else if (b > 1.0 + kParamTol) {
    v.clause = RestrictionClause::kHyperbolicSteep;
    v.feasible = b * c * c >= (b - 1.0) * (a + b) - kParamTol;
    v.description = "b c^2 >= (b-1)(a+b)";
  } else if (std::abs(b - 1.0) <= kParamTol) {
    v.clause = RestrictionClause::kHyperbolicCritical;
    v.feasible = std::abs(c) > kParamTol || a <= -1.0 + kParamTol;
    v.description = "c != 0 or a <= -1";
  } else {
    v.clause = RestrictionClause::kUnconstrained;
    v.feasible = true;
    v.description = "unconstrained (eps=-1, b<1)";
  }
  return v;
}

ProfileSolution solve_profile(const ProfileParams& prm, double h0, int sign0, double x0, double x1,
                              double step, const SolveOptions& opt) {
  if (!(step > 0.0)) throw DomainError("solve_profile: step must be positive");
  if (!(x0 <= 0.0 && 0.0 <= x1)) throw DomainError("solve_profile: span must contain 0");
  if (sign0 != 1 && sign0 != -1) throw DomainError("solve_profile: sign0 must be +1 or -1");
  if (!admissible(prm, h0)) throw DomainError("solve_profile: eps(a - h0^2) must be positive");
  const double pq0 = profile_pq(prm, h0);
  const double scale = std::max(1.0, std::abs(prm.a) * std::abs(prm.a));
  if (pq0 < -1e-12 * scale) throw DomainError("solve_profile: p(h0) q(h0) < 0");

  const int n_fwd = static_cast<int>(std::floor(x1 / step + 1e-9));
  const int n_back = static_cast<int>(std::floor(-x0 / step + 1e-9));

  // A double root of p q is an equilibrium of the second-order form.
  if (std::abs(pq0) <= 1e-14 * scale && std::abs(profile_pq_derivative(prm, h0)) <= 1e-12 * scale) {
    March back, fwd;
    back.states.assign(static_cast<std::size_t>(n_back) + 1, State{h0, 0.0});
    fwd.states.assign(static_cast<std::size_t>(n_fwd) + 1, State{h0, 0.0});
    ProfileSolution sol = assemble(prm, step, 1, back, fwd);
    sol.nonconstant = false;
    return sol;
  }

  const State s0{h0, sign0 * std::sqrt(std::max(pq0, 0.0))};
  int substeps = 1;
  auto run = [&](int sub) {
    return assemble(prm, step, sub, march(prm, s0, -step, n_back, sub), march(prm, s0, step, n_fwd, sub));
  };
  ProfileSolution coarse = run(substeps);
  for (int halving = 0; halving < opt.max_halvings; ++halving) {
    ProfileSolution fine = run(2 * substeps);
    double richardson = 0.0;
    const std::size_t n = std::min(coarse.h.size(), fine.h.size());
    // Align on x = 0, which both grids contain.
    const auto zero_c = static_cast<std::ptrdiff_t>(std::find(coarse.x.begin(), coarse.x.end(), 0.0) - coarse.x.begin());
    const auto zero_f = static_cast<std::ptrdiff_t>(std::find(fine.x.begin(), fine.x.end(), 0.0) - fine.x.begin());
    for (std::size_t i = 0; i < n; ++i) {
      const std::ptrdiff_t jc = static_cast<std::ptrdiff_t>(i) - zero_f + zero_c;
      if (jc < 0 || jc >= static_cast<std::ptrdiff_t>(coarse.h.size())) continue;
      richardson = std::max(richardson, std::abs(fine.h[i] - coarse.h[static_cast<std::size_t>(jc)]) /
                                            std::max(1.0, std::abs(fine.h[i])));
    }
    substeps *= 2;
    coarse = std::move(fine);
    if (coarse.drift <= opt.drift_tol && richardson <= opt.drift_tol) break;
  }
  coarse.nonconstant = true;
  return coarse;
}

SampledProfile::SampledProfile(ProfileSolution sol) : sol_(std::move(sol)) {
  if (sol_.x.empty()) throw DomainError("empty profile solution");
}

Univariate SampledProfile::at(double x) const {
  const double lo = sol_.x_min(), hi = sol_.x_max();
  if (x < lo - 1e-12 || x > hi + 1e-12) throw DomainError("profile evaluated outside its span");
  const auto i = static_cast<std::size_t>(
      std::clamp(std::lround((x - lo) / sol_.step), 0L, static_cast<long>(sol_.x.size()) - 1));
  State s{sol_.h[i], sol_.hprime[i]};
  const double dx = x - sol_.x[i];
  if (sol_.nonconstant && dx != 0.0) {
    const double sub = sol_.step / sol_.substeps;
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(dx) / sub)));
    for (int k = 0; k < n; ++k) s = rk4_step(sol_.params, s, dx / n);
  }
  return {s.h, s.hp, 0.5 * profile_pq_derivative(sol_.params, s.h)};
}

namespace {

class ClosedProfile final : public ProfileFunction {
 public:
  ClosedProfile(ClosedFormKind kind, const ProfileParams& prm) : kind_(kind), prm_(prm) {
    const double e = prm.eps.sign();
    switch (kind) {
      case ClosedFormKind::kSinhFamily:
        if (!(e < 0 && std::abs(prm.b - 1.0) <= kParamTol && std::abs(prm.c) <= kParamTol &&
              prm.a <= -1.0 + kParamTol)) {
          throw DomainError("sinh family needs eps=-1, b=1, c=0, a<=-1");
        }
        amp_ = std::sqrt(-prm.a);
        omega_ = std::sqrt(std::max(0.0, -(1.0 + prm.a)));
        break;
      case ClosedFormKind::kSnFamily:
        if (!(e > 0 && std::abs(prm.c) <= kParamTol && prm.b < prm.a)) {
          throw DomainError("sn family needs eps=+1, c=0, 0<b<a");
        }
        amp_ = std::sqrt((prm.a - prm.b) / (1.0 + prm.b));
        omega_ = std::sqrt(prm.a * (1.0 + prm.b));
        modulus_ = EllipticModulus(std::sqrt((prm.a - prm.b) / (prm.a * (1.0 + prm.b))));
        break;
      case ClosedFormKind::kTanFamily:
        if (!(e < 0 && std::abs(prm.a + 1.0) <= kParamTol && std::abs(prm.c) <= kParamTol && prm.b < 1.0)) {
          throw DomainError("tan family needs eps=-1, a=-1, c=0, 0<b<1");
        }
        amp_ = 1.0;
        omega_ = std::sqrt(1.0 - prm.b);
        break;
    }
  }

  Univariate at(double x) const override {
    const double t = omega_ * x;
    switch (kind_) {
      case ClosedFormKind::kSinhFamily: {
        const double s = std::sinh(t), c = std::cosh(t);
        return {amp_ * s, amp_ * omega_ * c, amp_ * omega_ * omega_ * s};
      }
      case ClosedFormKind::kSnFamily: {
        const JacobiValues j = jacobi_sncndn(t, modulus_);
        const double m = modulus_.parameter();
        return {amp_ * j.sn, amp_ * omega_ * j.cn * j.dn,
                -amp_ * omega_ * omega_ * j.sn * (j.dn * j.dn + m * j.cn * j.cn)};
      }
      case ClosedFormKind::kTanFamily: {
        if (std::abs(t) >= 0.5 * std::numbers::pi) throw DomainError("tan family evaluated outside |x| < pi/(2w)");
        const double h = std::tan(t), s2 = 1.0 + h * h;
        return {h, omega_ * s2, 2.0 * omega_ * omega_ * h * s2};
      }
    }
    return {};
  }

  double x_min() const override { return -x_max(); }
  double x_max() const override {
    if (kind_ == ClosedFormKind::kTanFamily) return 0.5 * std::numbers::pi / omega_;
    return std::numeric_limits<double>::infinity();
  }
  const ProfileParams& params() const override { return prm_; }
  std::string describe() const override {
    switch (kind_) {
      case ClosedFormKind::kSinhFamily: return "sinh";
      case ClosedFormKind::kSnFamily: return "sn";
      case ClosedFormKind::kTanFamily: return "tan";
    }
    return "";
  }

 private:
  ClosedFormKind kind_;
  ProfileParams prm_;
  double amp_ = 0.0;
  double omega_ = 0.0;
  EllipticModulus modulus_{0.0};
};

}  // namespace

std::shared_ptr<const ProfileFunction> closed_form(ClosedFormKind kind, const ProfileParams& prm) {
  return std::make_shared<ClosedProfile>(kind, prm);
}

double sn_family_period(const ProfileParams& prm) {
  if (!(prm.eps.is_sphere() && prm.b < prm.a && prm.b > 0.0)) throw DomainError("sn family needs eps=+1, 0<b<a");
  const EllipticModulus m(std::sqrt((prm.a - prm.b) / (prm.a * (1.0 + prm.b))));
  return 4.0 * complete_k(m) / std::sqrt(prm.a * (1.0 + prm.b));
}

namespace {
// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};
}  // namespace

ProfileIntegral::ProfileIntegral(std::shared_ptr<const ProfileFunction> profile, Integrand g, double x0,
                                 double cell)
    : profile_(std::move(profile)), g_(std::move(g)), x0_(x0), cell_(cell) {
  if (!(cell > 0.0)) throw DomainError("ProfileIntegral: cell must be positive");
  double lo = profile_->x_min(), hi = profile_->x_max();
  // Unbounded closed forms: tabulate lazily around x0 over a generous window.
  constexpr double kWindow = 64.0;
  if (!std::isfinite(lo)) lo = x0 - kWindow;
  if (!std::isfinite(hi)) hi = x0 + kWindow;
  if (x0 < lo || x0 > hi) throw DomainError("ProfileIntegral: base point outside the profile span");
  const int n_lo = static_cast<int>(std::floor((x0 - lo) / cell));
  const int n_hi = static_cast<int>(std::floor((hi - x0) / cell));
  origin_ = n_lo;
  nodes_.resize(static_cast<std::size_t>(n_lo + n_hi + 1));
  table_.assign(nodes_.size(), 0.0);
  for (int k = -n_lo; k <= n_hi; ++k) nodes_[static_cast<std::size_t>(k + n_lo)] = x0 + k * cell;
  for (int k = origin_ + 1; k < static_cast<int>(nodes_.size()); ++k) {
    table_[k] = table_[k - 1] + integrate_cell(nodes_[k - 1], nodes_[k]);
  }
  for (int k = origin_ - 1; k >= 0; --k) {
    table_[k] = table_[k + 1] - integrate_cell(nodes_[k], nodes_[k + 1]);
  }
}

double ProfileIntegral::integrate_cell(double a, double b) const {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    s += kGlWeights[i] * g_(profile_->at(mid + half * kGlNodes[i]).f).first;
  }
  return s * half;
}

Univariate ProfileIntegral::at(double x) const {
  if (x < nodes_.front() - cell_ || x > nodes_.back() + cell_) {
    throw DomainError("ProfileIntegral evaluated outside its table");
  }
  const long k = std::clamp(std::lround((x - nodes_.front()) / cell_), 0L, static_cast<long>(nodes_.size()) - 1);
  const double F = table_[static_cast<std::size_t>(k)] + integrate_cell(nodes_[static_cast<std::size_t>(k)], x);
  const Univariate h = profile_->at(x);
  const auto [g, dg] = g_(h.f);
  return {F, g, dg * h.df};
}

}  // namespace pmc
