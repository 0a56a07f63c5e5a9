#pragma once

// Residual diagnostics: portmanteau tests, Jarque-Bera, RSS on the
// observation scale and probability-integral-transform (P-P) data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "garmagarch/engine.hpp"
#include "garmagarch/errors.hpp"
#include "garmagarch/family.hpp"
#include "garmagarch/model.hpp"

namespace garmagarch {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df = 0.0;
  bool available = true;
  std::string note;
};

namespace detail {

inline double chi2_upper(double stat, double df) {
  const boost::math::chi_squared dist(df);
  return std::clamp(boost::math::cdf(boost::math::complement(dist, std::max(stat, 0.0))), 0.0, 1.0);
}

}  // namespace detail

/// Ljung-Box Q(m) = T(T+2) sum_{j=1}^m rho_j^2/(T-j) on max(1, m - k) degrees of freedom.
inline TestResult ljung_box(std::span<const double> x, std::size_t m, std::size_t fitted_df = 0) {
  if (m < 1) throw ConfigError("ljung_box: lag must be at least 1");
  const std::size_t T = x.size();
  if (T <= m + 1) throw DataError("ljung_box: need more than lag + 1 observations");
  TestResult r;
  r.df = static_cast<double>(m > fitted_df + 1 ? m - fitted_df : 1);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(T);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) {
    r.available = false;
    r.note = "series has zero variance";
    r.statistic = std::numeric_limits<double>::quiet_NaN();
    r.p_value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double n = static_cast<double>(T);
  double q = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    double cj = 0.0;
    for (std::size_t t = j; t < T; ++t) cj += (x[t] - mean) * (x[t - j] - mean);
    const double rho = cj / c0;
    q += rho * rho / (n - static_cast<double>(j));
  }
  r.statistic = n * (n + 2.0) * q;
  r.p_value = detail::chi2_upper(r.statistic, r.df);
  return r;
}

/// Ljung-Box on squared standardized residuals.
inline TestResult mcleod_li(std::span<const double> standardized, std::size_t m, std::size_t fitted_df = 0) {
  std::vector<double> sq(standardized.size());
  for (std::size_t t = 0; t < sq.size(); ++t) sq[t] = standardized[t] * standardized[t];
  return ljung_box(sq, m, fitted_df);
}

/// JB = T (S^2/6 + (K-3)^2/24) with moment-based skewness S and kurtosis K, on chi^2_2.
inline TestResult jarque_bera(std::span<const double> x) {
  const std::size_t T = x.size();
  if (T < 8) throw DataError("jarque_bera: need at least 8 observations");
  const double n = static_cast<double>(T);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  TestResult r;
  r.df = 2.0;
  if (!(m2 > 0.0)) {
    r.available = false;
    r.note = "series has zero variance";
    r.statistic = std::numeric_limits<double>::quiet_NaN();
    r.p_value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  r.statistic = n * (skew * skew / 6.0 + (kurt - 3.0) * (kurt - 3.0) / 24.0);
  r.p_value = detail::chi2_upper(r.statistic, 2.0);
  return r;
}

/// sum_t (y_t - yhat_t)^2 (the sum itself, not its root).
inline double rss(std::span<const double> y, std::span<const double> fitted) {
  if (y.size() != fitted.size()) throw DataError("rss: series and fitted values differ in length");
  double s = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) s += (y[t] - fitted[t]) * (y[t] - fitted[t]);
  return s;
}

struct PpData {
  std::vector<double> uniform;   // (i - 0.5)/T
  std::vector<double> empirical; // sorted nu_t
  std::vector<double> nu;        // nu_t in time order, NaN where the CDF failed
  std::vector<std::size_t> failed;
  bool degenerate = false;
};

/// nu_t = F(y_t | gamma_t) and the P-P pairs ((i-0.5)/T, nu_(i)).
inline PpData pp_data(const Family& family, const FilterOutput& out, std::span<const double> y) {
  if (out.gamma.size() != y.size()) throw DataError("pp_data: filter output and series differ in length");
  PpData pp;
  pp.nu.resize(y.size());
  std::vector<double> ok;
  ok.reserve(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    try {
      pp.nu[t] = std::clamp(cdf(family, out.gamma[t], y[t]), 0.0, 1.0);
      ok.push_back(pp.nu[t]);
    } catch (const NumericalError&) {
      pp.nu[t] = std::numeric_limits<double>::quiet_NaN();
      pp.failed.push_back(t);
    } catch (const std::domain_error&) {
      pp.nu[t] = std::numeric_limits<double>::quiet_NaN();
      pp.failed.push_back(t);
    }
  }
  std::sort(ok.begin(), ok.end());
  const double n = static_cast<double>(ok.size());
  for (std::size_t i = 0; i < ok.size(); ++i) {
    pp.uniform.push_back((static_cast<double>(i) + 0.5) / n);
    pp.empirical.push_back(ok[i]);
  }
  pp.degenerate = !ok.empty() && ok.front() == ok.back();
  return pp;
}

/// Kolmogorov-Smirnov distance of a sample from U(0,1).
inline double ks_uniform_distance(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max({d, static_cast<double>(i + 1) / n - u[i], u[i] - static_cast<double>(i) / n});
  }
  return d;
}

/// Observation-scale conditional means: eta_t, a_t/(a_t+b_t) or mu_t.
inline std::vector<double> fitted_means(const Family& family, const FilterOutput& out) {
  std::vector<double> m(out.mu.size());
  for (std::size_t t = 0; t < m.size(); ++t) {
    m[t] = fitted_mean(family, out.gamma[t], {out.mu[t], out.sigma2[t]});
  }
  return m;
}

struct DiagnosticsReport {
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double rss = 0.0;
  TestResult jb;
  std::map<std::size_t, TestResult> q;
  std::map<std::size_t, TestResult> q2;
  PpData pp;
  /// Degrees-of-freedom convention used for q and q2.
  std::string df_note;
};

/// Full diagnostic battery at theta. Q(m) uses the standardized residuals
/// eps_t/sigma_t with m minus the ARMA coefficient count degrees of freedom;
/// Q^2(m) uses their squares with m minus the GARCH coefficient count; both floor at 1.
inline DiagnosticsReport diagnose(const ModelSpec& spec, const ParamVector& theta, const PreparedSeries& data,
                                  std::span<const std::size_t> lags, const InitPolicy& init = {}) {
  const auto out = filter(spec, theta, data, init);
  const Family f = theta.family(spec);
  DiagnosticsReport rep;
  rep.loglik = out.total();
  const double n = static_cast<double>(data.size());
  const double k = static_cast<double>(spec.parameter_count());
  rep.aic = (-2.0 * rep.loglik + 2.0 * k) / n;
  rep.bic = (-2.0 * rep.loglik + k * std::log(n)) / n;
  rep.rss = rss(data.y, fitted_means(f, out));
  std::vector<double> e(data.size());
  for (std::size_t t = 0; t < e.size(); ++t) e[t] = out.eps[t] / std::sqrt(out.sigma2[t]);
  rep.jb = jarque_bera(e);
  const std::size_t arma_df = spec.orders.p + spec.orders.q;
  const std::size_t garch_df = spec.has_variance_recursion() ? spec.orders.r + spec.orders.s : 0;
  for (std::size_t m : lags) {
    rep.q[m] = ljung_box(e, m, arma_df);
    rep.q2[m] = mcleod_li(e, m, garch_df);
  }
  rep.df_note = "Q(m): df = max(1, m - (p+q)); Q2(m): df = max(1, m - (r+s))";
  rep.pp = pp_data(f, out, data.y);
  return rep;
}

}  // namespace garmagarch
