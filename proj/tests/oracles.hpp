#pragma once

// Test-only reference computations. Each oracle follows a route that is
// independent of the library implementation it checks.

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

/// K_nu(x) = 1/2 int_0^inf z^{nu-1} exp(-x/2 (z + 1/z)) dz, evaluated after
/// the substitution z = e^t as int_0^inf exp(-x cosh t) cosh(nu t) dt.
/// Returns e^x K_nu(x) to stay representable.
inline double scaled_bessel_k_quadrature(double nu, double x) {
  auto integrand = [&](double t) {
    const double v = -x * (std::cosh(t) - 1.0) + nu * t;
    const double w = -x * (std::cosh(t) - 1.0) - nu * t;
    return 0.5 * (std::exp(v) + std::exp(w));
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

inline double bessel_k_quadrature(double nu, double x) { return std::exp(-x) * scaled_bessel_k_quadrature(nu, x); }

/// log K_nu(x) = log (1/2) int_R exp(-x cosh t + nu t) dt, shifted to the
/// integrand's peak t* = asinh(nu/x) so large orders neither overflow nor
/// underflow.
inline double log_bessel_k_quadrature(double nu, double x) {
  const double ts = std::asinh(nu / x);
  const double peak = -x * std::cosh(ts) + nu * ts;
  const double cs = std::cosh(ts);
  // x sinh t* = nu, so the shifted exponent is -x cosh t* (cosh u - 1) - nu (sinh u - u)
  // unit-width variable: u = w v with w^-2 = x cosh t*, the curvature at the peak
  const double w = 1.0 / std::sqrt(x * cs);
  auto integrand = [&](double v) {
    const double u = w * v;
    const double f = -x * cs * (std::cosh(u) - 1.0) - nu * (std::sinh(u) - u);
    return std::isnan(f) ? 0.0 : std::exp(f);  // inf - inf in the far tails, where the integrand is 0
  };
  boost::math::quadrature::sinh_sinh<double> integrator;
  return peak + std::log(0.5 * w * integrator.integrate(integrand, 1e-14));
}

/// Truncated series psi_1(z) = sum_k 1/(z+k)^2 with n terms plus the
/// Euler-Maclaurin tail 1/(z+n) + 1/(2 (z+n)^2) + 1/(6 (z+n)^3).
inline double trigamma_series(double z, long n = 1000000) {
  long double s = 0.0L;
  for (long k = n - 1; k >= 0; --k) {
    const long double w = z + static_cast<long double>(k);
    s += 1.0L / (w * w);
  }
  const long double w = z + static_cast<long double>(n);
  s += 1.0L / w + 1.0L / (2.0L * w * w) + 1.0L / (6.0L * w * w * w);
  return static_cast<double>(s);
}

/// Bisection on a strictly decreasing function.
template <class F>
double bisect_decreasing(F f, double target, double lo, double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Adaptive Gauss-Kronrod integral over [a, b] (b may be infinite).
template <class F>
double integrate(F f, double a, double b, double tol = 1e-11) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol);
}

/// GHSST density written out term by term on the natural scale, with the
/// Bessel function from quadrature. Valid while K stays representable.
inline double ghsst_density_direct(double nu, double tau, double xi, double sc, double y) {
  const double d = y - xi;
  const double s = std::sqrt(sc * sc + d * d);
  const double j = (nu + 1.0) / 2.0;
  const double num = std::pow(2.0, (1.0 - nu) / 2.0) * std::pow(sc, nu) * std::pow(std::abs(tau), j) *
                     bessel_k_quadrature(j, std::abs(tau) * s) * std::exp(tau * d);
  const double den = std::tgamma(nu / 2.0) * std::sqrt(std::numbers::pi) * std::pow(s, j);
  return num / den;
}

/// Student-t density with nu degrees of freedom, location xi and scale sc
/// (the GHSST tau -> 0 limit).
inline double scaled_t_density(double nu, double xi, double sc, double y) {
  const double z = (y - xi) / sc;
  return std::tgamma((nu + 1.0) / 2.0) / (std::tgamma(nu / 2.0) * std::sqrt(std::numbers::pi) * sc) *
         std::pow(1.0 + z * z, -(nu + 1.0) / 2.0);
}

}  // namespace oracle
