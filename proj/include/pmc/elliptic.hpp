// SPDX-License-Identifier: Apache-2.0
//
// Complete elliptic integral of the first kind and the Jacobi functions
// sn, cn, dn, via the arithmetic-geometric mean. The modulus is kappa (not the
// parameter m = kappa^2).
#pragma once

namespace pmc {

/// Elliptic modulus kappa in [0, 1).
class EllipticModulus {
 public:
  explicit EllipticModulus(double kappa);
  double kappa() const { return kappa_; }
  double parameter() const { return kappa_ * kappa_; }

 private:
  double kappa_;
};

/// K(kappa) = int_0^{pi/2} dt / sqrt(1 - kappa^2 sin^2 t).
double complete_k(const EllipticModulus& m);

struct JacobiValues {
  double sn;
  double cn;
  double dn;
};

/// sn, cn, dn at x. The argument is reduced modulo 4K first.
JacobiValues jacobi_sncndn(double x, const EllipticModulus& m);

}  // namespace pmc
