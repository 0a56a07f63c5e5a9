#pragma once

// Distribution families: y-link h, mean/variance links (g, V), inversion
// from (mu_t, sigma_t^2) to the time-varying parameter gamma_t, densities,
// CDFs and samplers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "garmagarch/errors.hpp"
#include "garmagarch/model.hpp"
#include "garmagarch/random.hpp"
#include "garmagarch/specfun.hpp"

namespace garmagarch {

/// Time-varying distribution parameter gamma_t:
///   log-Gamma  (first, second) = (c_t shape, eta_t conditional mean of y_t)
///   logit-Beta (first, second) = (a_t, b_t)
///   GHSST      (first, second) = (xi_t location, varsigma_t scale)
struct TimeVaryingParam {
  double first = 0.0;
  double second = 0.0;
};

/// Conditional mean and variance of h(y_t).
struct MomentPair {
  double mean = 0.0;
  double variance = 1.0;
};

/// Log density of one observation plus its partial derivatives with respect
/// to the conditional moments (mu_t, sigma_t^2), holding phi fixed. For an
/// M-GARMA baseline gamma_t depends on mu_t only and d_variance is zero.
struct PointScore {
  TimeVaryingParam gamma;
  double log_density = 0.0;
  double d_mean = 0.0;
  double d_variance = 0.0;
};

namespace detail {

inline double logit(double y) { return std::log(y) - std::log1p(-y); }

[[noreturn]] inline void support_error(const Family& f, double y) {
  const char* what = f.tag() == FamilyTag::log_gamma  ? "y > 0"
                     : f.tag() == FamilyTag::logit_beta ? "0 < y < 1"
                                                        : "finite y";
  throw DomainError(std::string(to_string(f.tag())) + ": observation " + std::to_string(y) + " outside support (" +
                    what + ")");
}

inline void check_support(const Family& f, double y) {
  switch (f.tag()) {
    case FamilyTag::log_gamma:
      if (!(y > 0.0) || !std::isfinite(y)) support_error(f, y);
      break;
    case FamilyTag::logit_beta:
      if (!(y > 0.0 && y < 1.0)) support_error(f, y);
      break;
    case FamilyTag::ghsst:
      if (!std::isfinite(y)) support_error(f, y);
      break;
  }
}

inline void check_moments(const MomentPair& mp) {
  if (!(mp.variance > 0.0) || !std::isfinite(mp.variance) || !std::isfinite(mp.mean)) {
    throw DomainError("moment pair must have finite mean and positive finite variance");
  }
}

// --- logit-Beta inversion --------------------------------------------------

// Solve psi(a) - psi(tau - a) = mu for a in (0, tau); the left side is
// strictly increasing in a. Bracketed Newton on x = logit(a / tau).
inline double solve_beta_fixed_precision(double mu, double tau_sum) {
  using specfun::digamma;
  using specfun::trigamma;
  auto resid = [&](double x) {
    const double frac = 1.0 / (1.0 + std::exp(-x));
    const double a = tau_sum * frac;
    const double b = tau_sum * (1.0 - frac);
    return std::pair{digamma(a) - digamma(b) - mu, (trigamma(a) + trigamma(b)) * tau_sum * frac * (1.0 - frac)};
  };
  double lo = -745.0;
  double hi = 36.0;  // a/tau within double range of (0,1)
  double x = std::clamp(mu, lo + 1.0, hi - 1.0);
  for (int it = 0; it < 200; ++it) {
    const auto [r, dr] = resid(x);
    if (r > 0.0) hi = x; else lo = x;
    if (std::abs(r) <= 1e-13 * std::max(1.0, std::abs(mu))) break;
    double next = x - r / dr;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) { x = next; break; }
    x = next;
  }
  const double a = tau_sum / (1.0 + std::exp(-x));
  if (!(a > 0.0 && a < tau_sum)) throw NumericalError("logit_beta M-GARMA: mean " + std::to_string(mu) + " unreachable");
  return a;
}

struct BetaSolveResult {
  double a, b;
  bool ok;
};

// Newton on (log a, log b) with analytic Jacobian, damped on the scaled residual.
inline BetaSolveResult solve_beta_newton(double mu, double var, double la, double lb) {
  using specfun::digamma;
  using specfun::tetragamma;
  using specfun::trigamma;
  auto eval = [&](double x, double y, double& r1, double& r2) {
    const double a = std::exp(x), b = std::exp(y);
    r1 = digamma(a) - digamma(b) - mu;
    r2 = trigamma(a) + trigamma(b) - var;
  };
  auto merit = [&](double r1, double r2) { return r1 * r1 + (r2 / var) * (r2 / var); };
  double r1, r2;
  eval(la, lb, r1, r2);
  double m = merit(r1, r2);
  for (int it = 0; it < 100; ++it) {
    if (std::abs(r1) <= 1e-12 * std::max(1.0, std::abs(mu)) && std::abs(r2) <= 1e-12 * std::max(1.0, var)) {
      return {std::exp(la), std::exp(lb), true};
    }
    const double a = std::exp(la), b = std::exp(lb);
    const double j11 = trigamma(a) * a, j12 = -trigamma(b) * b;
    const double j21 = tetragamma(a) * a, j22 = tetragamma(b) * b;
    const double det = j11 * j22 - j12 * j21;
    if (!std::isfinite(det) || det == 0.0) break;
    double dx = -(j22 * r1 - j12 * r2) / det;
    double dy = -(-j21 * r1 + j11 * r2) / det;
    const double big = std::max(std::abs(dx), std::abs(dy));
    if (big > 2.0) { dx *= 2.0 / big; dy *= 2.0 / big; }
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      double n1, n2;
      const double nx = la + step * dx, ny = lb + step * dy;
      if (nx > -700.0 && nx < 700.0 && ny > -700.0 && ny < 700.0) {
        eval(nx, ny, n1, n2);
        const double nm = merit(n1, n2);
        if (std::isfinite(nm) && nm < m) {
          la = nx; lb = ny; r1 = n1; r2 = n2; m = nm;
          moved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  const bool ok = std::abs(r1) <= 1e-10 * std::max(1.0, std::abs(mu)) && std::abs(r2) <= 1e-10 * std::max(1.0, var);
  return {std::exp(la), std::exp(lb), ok};
}

// Fallback: bisection on log b of sigma^2 = psi_1(psi^{-1}[mu + psi(b)]) + psi_1(b),
// strictly decreasing in b.
inline BetaSolveResult solve_beta_nested(double mu, double var) {
  using specfun::digamma;
  using specfun::trigamma;
  auto a_of = [&](double b) { return specfun::inv_digamma(mu + digamma(b)); };
  auto var_of = [&](double lb) {
    const double b = std::exp(lb);
    return trigamma(a_of(b)) + trigamma(b);
  };
  double lo = -30.0, hi = 30.0;
  while (var_of(lo) < var && lo > -600.0) lo -= 30.0;
  while (var_of(hi) > var && hi < 600.0) hi += 30.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (var_of(mid) > var) lo = mid; else hi = mid;
  }
  const double b = std::exp(0.5 * (lo + hi));
  return {a_of(b), b, true};
}

}  // namespace detail

/// y-link h: log (log-Gamma), logit (logit-Beta), identity (GHSST).
inline double y_link(const Family& family, double y) {
  detail::check_support(family, y);
  switch (family.tag()) {
    case FamilyTag::log_gamma: return std::log(y);
    case FamilyTag::logit_beta: return detail::logit(y);
    case FamilyTag::ghsst: return y;
  }
  return y;
}

/// (g_phi(gamma), V_phi(gamma)): mean and variance of h(Y) under f(.|gamma, phi).
inline MomentPair mean_var_links(const Family& family, const TimeVaryingParam& g) {
  using specfun::digamma;
  using specfun::trigamma;
  switch (family.tag()) {
    case FamilyTag::log_gamma: {
      const double c = g.first, eta = g.second;
      return {std::log(eta) + digamma(c) - std::log(c), trigamma(c)};
    }
    case FamilyTag::logit_beta:
      return {digamma(g.first) - digamma(g.second), trigamma(g.first) + trigamma(g.second)};
    case FamilyTag::ghsst: {
      const double nu = family.nu(), tau = family.tau();
      const double s2 = g.second * g.second;
      return {g.first + tau * s2 / (nu - 2.0),
              s2 / (nu - 2.0) + 2.0 * tau * tau * s2 * s2 / ((nu - 2.0) * (nu - 2.0) * (nu - 4.0))};
    }
  }
  return {};
}

/// Inverts the mean/variance links: the unique gamma with
/// mean_var_links(family, gamma) == mp. M-GARMA baselines use mp.mean only.
inline TimeVaryingParam solve_gamma(const Family& family, const MomentPair& mp) {
  using specfun::digamma;
  if (family.variant() == Variant::m_garma) {
    if (!std::isfinite(mp.mean)) throw DomainError("moment pair must have a finite mean");
    if (family.tag() == FamilyTag::log_gamma) {
      const double c = family.fixed();
      return {c, std::exp(mp.mean + std::log(c) - digamma(c))};
    }
    const double a = detail::solve_beta_fixed_precision(mp.mean, family.fixed());
    return {a, family.fixed() - a};
  }
  detail::check_moments(mp);
  switch (family.tag()) {
    case FamilyTag::log_gamma: {
      const double c = specfun::inv_trigamma(mp.variance);
      const double eta = std::exp(mp.mean + std::log(c) - digamma(c));
      if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw NumericalError("log_gamma: eta not representable for mean " + std::to_string(mp.mean));
      }
      return {c, eta};
    }
    case FamilyTag::logit_beta: {
      const double em = std::exp(std::clamp(mp.mean, -30.0, 30.0));
      const double a0 = (1.0 + em) / mp.variance;
      const double b0 = (1.0 + 1.0 / em) / mp.variance;
      auto res = detail::solve_beta_newton(mp.mean, mp.variance, std::log(a0), std::log(b0));
      if (!res.ok) {
        res = detail::solve_beta_nested(mp.mean, mp.variance);
        // polish
        auto pol = detail::solve_beta_newton(mp.mean, mp.variance, std::log(res.a), std::log(res.b));
        if (pol.ok) res = pol;
        const auto back = mean_var_links(family, {res.a, res.b});
        if (!(std::abs(back.mean - mp.mean) <= 1e-9 * std::max(1.0, std::abs(mp.mean)) &&
              std::abs(back.variance - mp.variance) <= 1e-9 * std::max(1.0, mp.variance))) {
          throw NumericalError("logit_beta: no (a, b) for mean " + std::to_string(mp.mean) + ", variance " +
                               std::to_string(mp.variance));
        }
      }
      return {res.a, res.b};
    }
    case FamilyTag::ghsst: {
      const double nu = family.nu(), tau = family.tau();
      // Positive root of the quadratic in varsigma^2, rationalized so that
      // tau -> 0 reduces smoothly to varsigma^2 = (nu - 2) sigma^2.
      const double u = 8.0 * tau * tau * mp.variance / (nu - 4.0);
      const double s2 = 2.0 * (nu - 2.0) * mp.variance / (std::sqrt(1.0 + u) + 1.0);
      return {mp.mean - tau * s2 / (nu - 2.0), std::sqrt(s2)};
    }
  }
  return {};
}

/// log f(y | gamma, phi).
inline double log_density(const Family& family, const TimeVaryingParam& g, double y) {
  detail::check_support(family, y);
  switch (family.tag()) {
    case FamilyTag::log_gamma: {
      const double c = g.first, eta = g.second;
      return c * std::log(c / eta) + (c - 1.0) * std::log(y) - c * y / eta - specfun::log_gamma(c);
    }
    case FamilyTag::logit_beta: {
      const double a = g.first, b = g.second;
      return specfun::log_gamma(a + b) - specfun::log_gamma(a) - specfun::log_gamma(b) + (a - 1.0) * std::log(y) +
             (b - 1.0) * std::log1p(-y);
    }
    case FamilyTag::ghsst: {
      const double nu = family.nu(), tau = family.tau();
      const double j = 0.5 * (nu + 1.0);
      const double d = y - g.first;
      const double sc = g.second;
      const double s2 = sc * sc + d * d;
      const double base = -specfun::log_gamma(0.5 * nu) - 0.5 * std::log(std::numbers::pi);
      if (std::abs(tau) < 1e-8) {
        // symmetric limit: scaled Student-t
        return base + specfun::log_gamma(j) + nu * std::log(sc) - j * std::log(s2);
      }
      const double s = std::sqrt(s2);
      const double at = std::abs(tau);
      return base + 0.5 * (1.0 - nu) * std::numbers::ln2 + nu * std::log(sc) + j * std::log(at) +
             specfun::log_bessel_k(j, at * s) + tau * d - j * std::log(s);
    }
  }
  return 0.0;
}

/// Log density of y at the gamma solved from mp, with derivatives in (mu, sigma^2).
inline PointScore score(const Family& family, const MomentPair& mp, double y) {
  using specfun::digamma;
  using specfun::tetragamma;
  using specfun::trigamma;
  PointScore out;
  out.gamma = solve_gamma(family, mp);
  switch (family.tag()) {
    case FamilyTag::log_gamma: {
      detail::check_support(family, y);
      const double c = out.gamma.first;
      const double h = std::log(y);
      const double psi = digamma(c);
      const double ratio = std::exp(h + psi - mp.mean);  // y c / eta
      out.log_density = c * (psi - mp.mean) + (c - 1.0) * h - ratio - specfun::log_gamma(c);
      out.d_mean = ratio - c;
      if (family.variant() == Variant::garch) {
        const double tri = trigamma(c);
        out.d_variance = (h - mp.mean + tri * (c - ratio)) / tetragamma(c);
      }
      break;
    }
    case FamilyTag::logit_beta: {
      const double a = out.gamma.first, b = out.gamma.second;
      out.log_density = log_density(family, out.gamma, y);
      const double ly = std::log(y), l1y = std::log1p(-y);
      if (family.variant() == Variant::m_garma) {
        const double eps = ly - l1y - (digamma(a) - digamma(b));
        out.d_mean = eps / (trigamma(a) + trigamma(b));
        break;
      }
      const double psab = digamma(a + b);
      const double ga = psab - digamma(a) + ly;
      const double gb = psab - digamma(b) + l1y;
      const double t1a = trigamma(a), t1b = trigamma(b);
      const double t2a = tetragamma(a), t2b = tetragamma(b);
      const double det = t1a * t2b + t2a * t1b;
      out.d_mean = (t2b * ga - t2a * gb) / det;
      out.d_variance = (t1a * gb + t1b * ga) / det;
      break;
    }
    case FamilyTag::ghsst: {
      detail::check_support(family, y);
      const double nu = family.nu(), tau = family.tau();
      const double j = 0.5 * (nu + 1.0);
      const double sc = out.gamma.second;
      const double d = y - out.gamma.first;
      const double s2 = sc * sc + d * d;
      double dl_dd, dl_dsc;
      if (std::abs(tau) < 1e-8) {
        out.log_density = log_density(family, out.gamma, y);
        dl_dd = -2.0 * j * d / s2;
        dl_dsc = nu / sc - 2.0 * j * sc / s2;
      } else {
        const double s = std::sqrt(s2);
        const double at = std::abs(tau);
        const auto bk = specfun::log_bessel_k_with_ratio(j, at * s);
        out.log_density = -specfun::log_gamma(0.5 * nu) - 0.5 * std::log(std::numbers::pi) +
                          0.5 * (1.0 - nu) * std::numbers::ln2 + nu * std::log(sc) + j * std::log(at) +
                          bk.log_value + tau * d - j * std::log(s);
        const double dlogk = -bk.lower_ratio - j / (at * s);  // d log K / dx
        dl_dd = dlogk * at * d / s + tau - j * d / s2;
        dl_dsc = nu / sc + dlogk * at * sc / s - j * sc / s2;
      }
      // xi = mu - tau sc^2/(nu-2), d = y - xi
      out.d_mean = -dl_dd;
      const double dl_dsc_total = dl_dsc + dl_dd * 2.0 * tau * sc / (nu - 2.0);
      const double dvar_dsc =
          2.0 * sc / (nu - 2.0) + 8.0 * tau * tau * sc * sc * sc / ((nu - 2.0) * (nu - 2.0) * (nu - 4.0));
      out.d_variance = dl_dsc_total / dvar_dsc;
      break;
    }
  }
  return out;
}

/// E[y_t | F_{t-1}] on the observation scale: eta_t, a_t/(a_t+b_t), or mu_t.
inline double fitted_mean(const Family& family, const TimeVaryingParam& g, const MomentPair& mp) {
  switch (family.tag()) {
    case FamilyTag::log_gamma: return g.second;
    case FamilyTag::logit_beta: return g.first / (g.first + g.second);
    case FamilyTag::ghsst: return mp.mean;
  }
  return mp.mean;
}

/// F(y | gamma, phi). GHSST uses adaptive Gauss-Kronrod quadrature of the
/// density on both tails around the location, normalized by their sum.
inline double cdf(const Family& family, const TimeVaryingParam& g, double y) {
  detail::check_support(family, y);
  switch (family.tag()) {
    case FamilyTag::log_gamma: return boost::math::gamma_p(g.first, g.first * y / g.second);
    case FamilyTag::logit_beta: return boost::math::ibeta(g.first, g.second, y);
    case FamilyTag::ghsst: {
      const double xi = g.first, sc = g.second;
      auto dens = [&](double z) { return std::exp(log_density(family, g, xi + sc * z)); };
      using Q = boost::math::quadrature::gauss_kronrod<double, 31>;
      constexpr double inf = std::numeric_limits<double>::infinity();
      const double z = (y - xi) / sc;
      const double left = Q::integrate(dens, -inf, 0.0, 20, 1e-10);
      const double right = Q::integrate(dens, 0.0, inf, 20, 1e-10);
      const double total = left + right;
      if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("ghsst cdf: integration failed");
      if (z <= 0.0) return Q::integrate(dens, -inf, z, 20, 1e-10) / total;
      return 1.0 - Q::integrate(dens, z, inf, 20, 1e-10) / total;
    }
  }
  return 0.0;
}

/// One draw from f(. | gamma, phi).
///   log-Gamma: y = (eta/c) G, G ~ Gamma(c, 1), built on the log scale.
///   logit-Beta: logit(y) = log G_a - log G_b.
///   GHSST: y = xi + tau W + sqrt(W) Z, W ~ InvGamma(nu/2, varsigma^2/2), Z ~ N(0,1).
inline double sample(const Family& family, const TimeVaryingParam& g, Rng& rng) {
  switch (family.tag()) {
    case FamilyTag::log_gamma: {
      const double y = std::exp(std::log(g.second / g.first) + rng.log_gamma_variate(g.first));
      return std::clamp(y, std::numeric_limits<double>::min(), std::numeric_limits<double>::max());
    }
    case FamilyTag::logit_beta: {
      const double h = rng.log_gamma_variate(g.first) - rng.log_gamma_variate(g.second);
      double y = 1.0 / (1.0 + std::exp(-h));
      if (y >= 1.0) y = std::nextafter(1.0, 0.0);
      if (y <= 0.0) y = std::numeric_limits<double>::min();
      return y;
    }
    case FamilyTag::ghsst: {
      const double w = 0.5 * g.second * g.second / rng.gamma(0.5 * family.nu());
      return g.first + family.tau() * w + std::sqrt(w) * rng.normal();
    }
  }
  return 0.0;
}

}  // namespace garmagarch
