// SPDX-License-Identifier: Apache-2.0
#include "pmc/elliptic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "pmc/errors.hpp"

namespace pmc {

namespace {

constexpr int kMaxAgmSteps = 32;
constexpr double kAgmTol = 1e-15;

}  // namespace

EllipticModulus::EllipticModulus(double kappa) : kappa_(kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0)) {
    throw DomainError("elliptic modulus must lie in [0, 1), got " + std::to_string(kappa));
  }
}

double complete_k(const EllipticModulus& m) {
  double a = 1.0;
  double b = std::sqrt(1.0 - m.parameter());
  for (int n = 0; n < kMaxAgmSteps && std::abs(a - b) >= kAgmTol * a; ++n) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return std::numbers::pi / (2.0 * a);
}

JacobiValues jacobi_sncndn(double x, const EllipticModulus& m) {
  const double mm = m.parameter();
  const double period = 4.0 * complete_k(m);
  // Reduce into [-2K, 2K).
  x = std::fmod(x, period);
  if (x >= 0.5 * period) x -= period;
  if (x < -0.5 * period) x += period;

  if (mm == 0.0) return {std::sin(x), std::cos(x), 1.0};

  // Descending AGM; a[n], c[n] kept for the backward amplitude recursion.
  std::array<double, kMaxAgmSteps + 1> a{};
  std::array<double, kMaxAgmSteps + 1> c{};
  a[0] = 1.0;
  double b = std::sqrt(1.0 - mm);
  c[0] = std::sqrt(mm);
  int n = 0;
  while (n < kMaxAgmSteps && std::abs(c[n]) >= kAgmTol) {
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    ++n;
  }
  double phi = std::ldexp(a[n] * x, n);
  for (int k = n; k > 0; --k) {
    phi = 0.5 * (phi + std::asin(c[k] / a[k] * std::sin(phi)));
  }
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  return {sn, cn, std::sqrt(1.0 - mm * sn * sn)};
}

}  // namespace pmc
