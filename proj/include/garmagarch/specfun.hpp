#pragma once

// Real-argument special functions used by the distribution families:
// log-gamma, polygamma of orders 0..3 and inverses, and the modified Bessel
// function of the third kind K_nu(x) in plain and log-scaled form.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "garmagarch/errors.hpp"

namespace garmagarch::specfun {

/// Order m of the polygamma function psi_m, the (m+1)-th derivative of log Gamma.
class PolygammaOrder {
 public:
  constexpr explicit PolygammaOrder(int m) : m_(m) {
    if (m < 0 || m > 3) throw DomainError("polygamma order must be in [0, 3], got " + std::to_string(m));
  }
  [[nodiscard]] constexpr int value() const noexcept { return m_; }

 private:
  int m_;
};

namespace detail {

inline void require_positive(double z, const char* fn) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw DomainError(std::string(fn) + ": argument must be positive and finite, got " + std::to_string(z));
  }
}

// B_2 .. B_20
inline constexpr std::array<double, 10> kBernoulli = {
    1.0 / 6.0,         -1.0 / 30.0,   1.0 / 42.0,          -1.0 / 30.0,         5.0 / 66.0,
    -691.0 / 2730.0,   7.0 / 6.0,     -3617.0 / 510.0,     43867.0 / 798.0,     -174611.0 / 330.0};

inline constexpr double kShiftThreshold = 10.0;

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Asymptotic expansion of psi_m(w), valid for w >= kShiftThreshold.
inline double polygamma_asymptotic(int m, double w) {
  const double inv = 1.0 / w;
  const double inv2 = inv * inv;
  if (m == 0) {
    double sum = 0.0;
    double pw = inv2;
    for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
      sum += kBernoulli[k - 1] / (2.0 * k) * pw;
      pw *= inv2;
    }
    return std::log(w) - 0.5 * inv - sum;
  }
  // (-1)^{m+1} [ (m-1)!/w^m + m!/(2 w^{m+1}) + sum_k B_2k (2k+m-1)!/(2k)! / w^{2k+m} ]
  const double wm = std::pow(inv, m);
  double coeff = factorial(m - 1);
  double series = coeff * wm + 0.5 * factorial(m) * wm * inv;
  double pw = wm * inv2;
  // ratio (2k+m-1)!/(2k)! built incrementally
  double ratio = 1.0;
  for (int j = 1; j <= m - 1; ++j) ratio *= (2 + j);  // k = 1: (m+1)!/2! = prod_{j=1}^{m-1} (2+j)
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    series += kBernoulli[k - 1] * ratio * pw;
    pw *= inv2;
    // advance ratio from k to k+1: multiply by (2k+m)(2k+m+1) / ((2k+1)(2k+2))
    const double kk = static_cast<double>(k);
    ratio *= (2.0 * kk + m) * (2.0 * kk + m + 1.0) / ((2.0 * kk + 1.0) * (2.0 * kk + 2.0));
  }
  return (m % 2 == 1) ? series : -series;
}

}  // namespace detail

/// Natural log of Gamma(z) for z > 0.
inline double log_gamma(double z) {
  detail::require_positive(z, "log_gamma");
  return boost::math::lgamma(z);
}

/// psi_m(z) for m in 0..3 and z > 0: shifts z upward by the recurrence until
/// z >= 10 and finishes with the asymptotic expansion.
inline double polygamma(PolygammaOrder order, double z) {
  detail::require_positive(z, "polygamma");
  const int m = order.value();
  // psi_m(z) = psi_m(z + n) - (-1)^m m! sum_{k<n} (z+k)^{-(m+1)}
  double shift = 0.0;
  double w = z;
  while (w < detail::kShiftThreshold) {
    shift += std::pow(w, -(m + 1));
    w += 1.0;
  }
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  return detail::polygamma_asymptotic(m, w) - sign * detail::factorial(m) * shift;
}

inline double digamma(double z) { return polygamma(PolygammaOrder{0}, z); }
inline double trigamma(double z) { return polygamma(PolygammaOrder{1}, z); }
inline double tetragamma(double z) { return polygamma(PolygammaOrder{2}, z); }
inline double pentagamma(double z) { return polygamma(PolygammaOrder{3}, z); }

/// Unique c > 0 with trigamma(c) = v.
///
/// Newton iteration on 1/trigamma, which is close to linear on (0, inf) and
/// convex near zero, seeded at 0.5 + 1/v so the iterates approach the root
/// monotonically. Falls back to bisection in log(c) if Newton stalls.
inline double inv_trigamma(double v) {
  detail::require_positive(v, "inv_trigamma");
  const double tol = 1e-10 * std::max(1.0, v);
  double c = 0.5 + 1.0 / v;
  for (int it = 0; it < 200; ++it) {
    const double tri = trigamma(c);
    const double step = tri * (1.0 - tri / v) / tetragamma(c);
    c += step;
    if (!(c > 0.0) || !std::isfinite(c)) break;
    if (std::abs(step) <= 1e-15 * c) {
      if (std::abs(trigamma(c) - v) <= tol) return c;
      break;
    }
  }
  // Bisection on log c; trigamma is strictly decreasing.
  double lo = std::log(1e-300);
  double hi = std::log(1e300);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double val = trigamma(std::exp(mid));
    if (val > v) lo = mid; else hi = mid;
    if (hi - lo < 1e-15) break;
  }
  c = std::exp(0.5 * (lo + hi));
  if (std::abs(trigamma(c) - v) > tol) {
    throw NumericalError("inv_trigamma: no convergence for v=" + std::to_string(v));
  }
  return c;
}

/// Unique z > 0 with digamma(z) = x.
inline double inv_digamma(double x) {
  if (!std::isfinite(x)) throw DomainError("inv_digamma: argument must be finite");
  constexpr double euler = std::numbers::egamma;
  double z = (x >= -2.22) ? std::exp(x) + 0.5 : -1.0 / (x + euler);
  for (int it = 0; it < 100; ++it) {
    const double step = (digamma(z) - x) / trigamma(z);
    double next = z - step;
    if (!(next > 0.0)) next = 0.5 * z;  // stay in the domain
    const bool done = std::abs(next - z) <= 1e-15 * next;
    z = next;
    if (done) return z;
  }
  if (std::abs(digamma(z) - x) > 1e-10 * std::max(1.0, std::abs(x))) {
    throw NumericalError("inv_digamma: no convergence for x=" + std::to_string(x));
  }
  return z;
}

/// log K_nu(x) together with K_{nu-1}(x)/K_nu(x), the ratio needed for
/// d/dx log K_nu(x) = -K_{nu-1}/K_nu - nu/x.
struct LogBesselK {
  double log_value;
  double lower_ratio;
};

namespace detail {

// 1/Gamma(z) = sum_{k>=1} c_k z^k  (Abramowitz & Stegun 6.1.34)
inline constexpr std::array<double, 26> kRecipGamma = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001};

// Temme's gamma helpers for |mu| <= 1/2:
//   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu),  gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
struct TemmeGammas {
  double gam1, gam2, gampl, gammi;
};

inline TemmeGammas temme_gammas(double mu) {
  // 1/Gamma(1+x) = sum_{k>=1} c_k x^{k-1}
  double even = 0.0;  // sum over odd k (even powers)
  double odd = 0.0;   // sum over even k (odd powers), divided by mu
  double pw = 1.0;
  for (std::size_t k = 1; k <= kRecipGamma.size(); k += 2) {
    even += kRecipGamma[k - 1] * pw;
    if (k < kRecipGamma.size()) odd += kRecipGamma[k] * pw;
    pw *= mu * mu;
  }
  TemmeGammas g{};
  g.gam1 = -odd;
  g.gam2 = even;
  g.gampl = g.gam2 - mu * g.gam1;  // 1/Gamma(1+mu)
  g.gammi = g.gam2 + mu * g.gam1;  // 1/Gamma(1-mu)
  return g;
}

/// Orders at or above this use the uniform asymptotic expansion; the first
/// omitted term is O(nu^-5), below 1e-12 relative here.
inline constexpr double kDebyeOrder = 100.0;

/// log K_nu(x) by the uniform large-order expansion through u_4, nu > 0.
inline double log_bessel_k_debye(double nu, double x) {
  const double z = x / nu;
  const double s = std::sqrt(1.0 + z * z);
  const double t = 1.0 / s;
  const double t2 = t * t;
  const double eta = s + std::log(z / (1.0 + s));
  const double u1 = t * (3.0 - 5.0 * t2) / 24.0;
  const double u2 = t2 * (81.0 + t2 * (-462.0 + t2 * 385.0)) / 1152.0;
  const double u3 = t * t2 * (30375.0 + t2 * (-369603.0 + t2 * (765765.0 - t2 * 425425.0))) / 414720.0;
  const double u4 =
      t2 * t2 *
      (4465125.0 + t2 * (-94121676.0 + t2 * (349922430.0 + t2 * (-446185740.0 + t2 * 185910725.0)))) /
      39813120.0;
  const double iv = 1.0 / nu;
  const double series = 1.0 + iv * (-u1 + iv * (u2 + iv * (-u3 + iv * u4)));
  return 0.5 * std::log(std::numbers::pi / (2.0 * nu)) - nu * eta - 0.25 * std::log1p(z * z) + std::log(series);
}

}  // namespace detail

/// log K_nu(x) for x > 0 and any finite real order.
///
/// Temme's series (x < 2) or Steed's continued fraction (x >= 2) give
/// K_mu and K_{mu+1} for the fractional base order |mu| <= 1/2; forward
/// recurrence in ratio form reaches the requested order without overflow.
/// Orders of at least detail::kDebyeOrder use the uniform asymptotic
/// expansion, so the cost stays bounded as the order grows.
inline LogBesselK log_bessel_k_with_ratio(double order, double x) {
  detail::require_positive(x, "bessel_k");
  if (!std::isfinite(order)) throw DomainError("bessel_k: order must be finite");
  constexpr double eps = 1e-16;
  constexpr double pi = std::numbers::pi;
  const double nu = std::abs(order);
  if (nu >= detail::kDebyeOrder) {
    const double log_k = detail::log_bessel_k_debye(nu, x);
    // K_{-nu} = K_nu; the "lower" neighbour of a negative order is K_{nu+1}.
    const double neighbour = order < 0.0 ? nu + 1.0 : nu - 1.0;
    return {log_k, std::exp(detail::log_bessel_k_debye(neighbour, x) - log_k)};
  }
  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;

  double log_kmu;
  double ratio;  // K_{mu+1} / K_mu
  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = pi * mu;
    const double fact = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
    const auto g = detail::temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (int i = 1; i < 10000; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    log_kmu = std::log(sum);
    ratio = sum1 * xi2 / sum;
  } else {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i < 100000; ++i) {
      a -= 2 * i;
      c = -a * c / (i + 1.0);
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < eps) break;
    }
    h = a1 * h;
    log_kmu = 0.5 * std::log(pi / (2.0 * x)) - x - std::log(s);
    ratio = (mu + x + 0.5 - h) * xi;
  }

  // Ratio form of K_{v+1} = K_{v-1} + (2v/x) K_v.
  double log_k = log_kmu;
  double lower = ratio - 2.0 * mu * xi;  // K_{mu-1}/K_mu
  for (int i = 1; i <= nl; ++i) {
    log_k += std::log(ratio);
    lower = 1.0 / ratio;
    ratio = (mu + i) * xi2 + 1.0 / ratio;
  }
  // K_{-nu} = K_nu; for negative orders the "lower" neighbour is K_{-nu-1} = K_{nu+1}.
  if (order < 0.0) lower = ratio;
  return {log_k, lower};
}

/// log K_nu(x); safe from overflow and underflow.
inline double log_bessel_k(double order, double x) { return log_bessel_k_with_ratio(order, x).log_value; }

/// K_nu(x). Throws std::overflow_error when the value is not representable;
/// callers needing extreme arguments use log_bessel_k.
inline double bessel_k(double order, double x) {
  const double lk = log_bessel_k(order, x);
  if (lk > std::log(std::numeric_limits<double>::max())) {
    throw std::overflow_error("bessel_k: K_" + std::to_string(order) + "(" + std::to_string(x) +
                              ") overflows; use log_bessel_k");
  }
  return std::exp(lk);
}

}  // namespace garmagarch::specfun
