#pragma once

// Conditional maximum likelihood, quasi-Gaussian estimation, pseudo-ML for
// the invariant parameters, and Hessian-based standard errors.
//
// Optimization runs in an unconstrained u-space:
//   ARMA coefficients, GHSST tau      identity
//   omega, alpha_i, beta_j            exp(u)
//   GHSST nu                          4 + exp(u)
//   M-GARMA c or tau_sum              exp(u)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "garmagarch/engine.hpp"
#include "garmagarch/errors.hpp"
#include "garmagarch/model.hpp"
#include "garmagarch/optimize.hpp"

namespace garmagarch {

enum class Method { mle, gmle, gmle_pseudo };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::mle: return "mle";
    case Method::gmle: return "gmle";
    case Method::gmle_pseudo: return "gmle+pseudo";
  }
  return "?";
}

inline Method method_from_string(std::string_view s) {
  if (s == "mle") return Method::mle;
  if (s == "gmle") return Method::gmle;
  if (s == "gmle+pseudo" || s == "gmle_pseudo") return Method::gmle_pseudo;
  throw ConfigError("unknown estimator '" + std::string(s) + "' (expected mle, gmle or gmle+pseudo)");
}

struct FitConfig {
  std::size_t starts = 3;
  OptimOptions optim;
  bool compute_se = true;
  InitPolicy init;
};

struct StandardErrors {
  std::vector<double> se;
  bool available = false;
  std::string diagnostic;
  double asymmetry = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> hessian;  // row-major, symmetrized
};

struct FitReport {
  ModelSpec spec;
  Method method = Method::mle;
  ParamVector theta;
  std::vector<std::string> names;
  StandardErrors se;
  std::optional<double> loglik;
  std::optional<double> aic;
  std::optional<double> bic;
  std::optional<double> gmle_q;
  bool converged = false;
  std::size_t iterations = 0;
  std::string message;
  std::size_t T = 0;
};

/// AIC = (-2 loglik + 2k)/T and BIC = (-2 loglik + k log T)/T.
inline std::pair<double, double> information_criteria(double loglik, std::size_t k, std::size_t T) {
  const double n = static_cast<double>(T);
  const double kk = static_cast<double>(k);
  return {(-2.0 * loglik + 2.0 * kk) / n, (-2.0 * loglik + kk * std::log(n)) / n};
}

namespace detail {

enum class Transform { identity, exp, exp_plus_four };

inline std::vector<Transform> transforms(const ModelSpec& spec, bool with_invariant) {
  std::vector<Transform> tr(spec.arma_count(), Transform::identity);
  tr.insert(tr.end(), spec.garch_count(), Transform::exp);
  if (with_invariant) {
    if (spec.variant == Variant::m_garma) {
      tr.push_back(Transform::exp);
    } else if (spec.family == FamilyTag::ghsst) {
      tr.push_back(Transform::exp_plus_four);
      tr.push_back(Transform::identity);
    }
  }
  return tr;
}

inline double to_natural(Transform t, double u) {
  switch (t) {
    case Transform::identity: return u;
    case Transform::exp: return std::exp(u);
    case Transform::exp_plus_four: return 4.0 + std::exp(u);
  }
  return u;
}

inline double to_unconstrained(Transform t, double x) {
  switch (t) {
    case Transform::identity: return x;
    case Transform::exp: return std::log(std::max(x, 1e-300));
    case Transform::exp_plus_four: return std::log(std::max(x - 4.0, 1e-300));
  }
  return x;
}

inline double jacobian(Transform t, double x) {
  switch (t) {
    case Transform::identity: return 1.0;
    case Transform::exp: return x;
    case Transform::exp_plus_four: return x - 4.0;
  }
  return 1.0;
}

/// Maps an objective on natural parameters to u-space.
template <class F>
auto in_u_space(const std::vector<Transform>& tr, F natural) {
  return [tr, natural](const std::vector<double>& u) {
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      x[i] = to_natural(tr[i], u[i]);
      if (!std::isfinite(x[i])) throw DomainError("parameter overflow");
    }
    ValueGrad vg = natural(x);
    for (std::size_t i = 0; i < u.size(); ++i) vg.grad[i] *= jacobian(tr[i], x[i]);
    return vg;
  };
}

inline std::vector<double> to_u(const std::vector<Transform>& tr, const std::vector<double>& x) {
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = to_unconstrained(tr[i], x[i]);
  return u;
}

inline std::vector<double> to_x(const std::vector<Transform>& tr, const std::vector<double>& u) {
  std::vector<double> x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) x[i] = to_natural(tr[i], u[i]);
  return x;
}

/// Autocovariances gamma_0..gamma_p of h (biased).
inline std::vector<double> autocovariances(const PreparedSeries& data, std::size_t p) {
  std::vector<double> acv(p + 1, 0.0);
  const std::size_t T = data.size();
  for (std::size_t k = 0; k <= p && k < T; ++k) {
    double s = 0.0;
    for (std::size_t t = k; t < T; ++t) s += (data.h[t] - data.h_mean) * (data.h[t - k] - data.h_mean);
    acv[k] = s / static_cast<double>(T);
  }
  return acv;
}

/// Yule-Walker AR(p) coefficients and innovation variance.
inline std::pair<std::vector<double>, double> yule_walker(const PreparedSeries& data, std::size_t p) {
  const auto acv = autocovariances(data, p);
  if (p == 0 || !(acv[0] > 0.0)) return {std::vector<double>(p, 0.0), std::max(acv[0], 1e-8)};
  Eigen::MatrixXd R(p, p);
  Eigen::VectorXd r(p);
  for (std::size_t i = 0; i < p; ++i) {
    r(static_cast<Eigen::Index>(i)) = acv[i + 1];
    for (std::size_t j = 0; j < p; ++j) {
      R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acv[i > j ? i - j : j - i];
    }
  }
  Eigen::VectorXd phi = R.ldlt().solve(r);
  std::vector<double> out(phi.data(), phi.data() + p);
  double sum = 0.0;
  for (double v : out) sum += v;
  if (std::abs(sum) > 0.98) {
    for (double& v : out) v *= 0.98 / std::abs(sum);
  }
  double v = acv[0];
  for (std::size_t i = 0; i < p; ++i) v -= out[i] * acv[i + 1];
  return {out, std::max(v, 1e-8 * acv[0])};
}

inline ParamVector arma_start(const ModelSpec& spec, const PreparedSeries& data, std::vector<double> ar,
                              std::vector<double> ma, double innovation_var) {
  const auto& o = spec.orders;
  ar.resize(o.p, 0.0);
  ma.resize(o.q, 0.0);
  ParamVector th;
  th.ar = ar;
  th.ma = ma;
  double s = 0.0;
  for (double a : ar) s += a;
  th.phi0 = data.h_mean * (1.0 - s);
  if (spec.has_variance_recursion()) {
    th.alpha.assign(o.r, o.r ? 0.05 / static_cast<double>(o.r) : 0.0);
    th.beta.assign(o.s, o.s ? 0.9 / static_cast<double>(o.s) : 0.0);
    th.omega = innovation_var * (1.0 - th.persistence());
  }
  return th;
}

inline void check_length(const ModelSpec& spec, const PreparedSeries& data) {
  if (data.size() <= spec.parameter_count()) {
    throw DataError("series length " + std::to_string(data.size()) + " does not exceed the parameter count " +
                    std::to_string(spec.parameter_count()));
  }
}

}  // namespace detail

/// Hessian of a function by central differences of its gradient, step
/// max(1e-5, 1e-5 |x_i|). Coordinates whose backward point would cross
/// lower_bounds[i] use a forward difference.
template <class Grad>
std::pair<std::vector<double>, double> hessian_from_gradient(Grad&& grad, const std::vector<double>& x,
                                                             const std::vector<double>& lower_bounds) {
  const std::size_t n = x.size();
  std::vector<double> H(n * n, 0.0);
  std::optional<std::vector<double>> g0;
  for (std::size_t j = 0; j < n; ++j) {
    const double h = std::max(1e-5, 1e-5 * std::abs(x[j]));
    auto xp = x;
    xp[j] += h;
    const auto gp = grad(xp);
    std::vector<double> gm;
    double denom = 2.0 * h;
    if (x[j] - h > lower_bounds[j]) {
      auto xm = x;
      xm[j] -= h;
      gm = grad(xm);
    } else {
      if (!g0) g0 = grad(x);
      gm = *g0;
      denom = h;
    }
    for (std::size_t i = 0; i < n; ++i) H[i * n + j] = (gp[i] - gm[i]) / denom;
  }
  // asymmetry on the scale-free (correlation) scale |H_ij - H_ji| / sqrt(|H_ii H_jj|)
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = H[i * n + j], b = H[j * n + i];
      const double scale = std::sqrt(std::abs(H[i * n + i] * H[j * n + j]));
      asym = std::max(asym, std::abs(a - b) / (scale > 0.0 ? scale : 1.0));
      H[i * n + j] = H[j * n + i] = 0.5 * (a + b);
    }
  }
  return {H, asym};
}

/// se_i = sqrt([(-H)^{-1}]_ii) for a symmetrized Hessian H of a log-likelihood.
inline StandardErrors se_from_hessian(std::vector<double> H, std::size_t n, double asymmetry) {
  StandardErrors out;
  out.asymmetry = asymmetry;
  out.hessian = H;
  Eigen::MatrixXd negH(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) negH(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = -H[i * n + j];
  }
  if (!negH.allFinite()) {
    out.diagnostic = "Hessian has non-finite entries";
    return out;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(negH);
  if (llt.info() != Eigen::Success) {
    out.diagnostic = "negative Hessian is not positive definite";
    return out;
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(negH.rows(), negH.cols()));
  out.se.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (!(v > 0.0)) {
      out.diagnostic = "non-positive variance on the diagonal";
      out.se.clear();
      return out;
    }
    out.se[i] = std::sqrt(v);
  }
  out.available = true;
  return out;
}

/// Standard errors from the inverse negative Hessian of the log-likelihood,
/// the Hessian taken by differencing the analytic gradient on the natural scale.
inline StandardErrors information_se(const ModelSpec& spec, const ParamVector& theta, const PreparedSeries& data,
                                     const InitPolicy& init = {}) {
  const auto x = theta.flatten(spec);
  std::vector<double> lower(x.size(), -std::numeric_limits<double>::infinity());
  const auto tr = detail::transforms(spec, true);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (tr[i] == detail::Transform::exp) lower[i] = 0.0;
    if (tr[i] == detail::Transform::exp_plus_four) lower[i] = 4.0;
  }
  try {
    auto [H, asym] = hessian_from_gradient(
        [&](const std::vector<double>& z) {
          return loglik_with_gradient(spec, ParamVector::unflatten(spec, z), data, init, 1e-4).grad;
        },
        x, lower);
    return se_from_hessian(std::move(H), x.size(), asym);
  } catch (const NumericalError& e) {
    StandardErrors out;
    out.diagnostic = std::string("Hessian evaluation failed: ") + e.what();
    return out;
  } catch (const DomainError& e) {
    StandardErrors out;
    out.diagnostic = std::string("Hessian evaluation failed: ") + e.what();
    return out;
  }
}

/// Maximizes sum_t log f(y_t | gamma_t(phi), phi) over phi with mu_t and
/// sigma^2_t fixed at the filtered values of theta's recursion part.
/// Families without invariant parameters return an empty vector.
inline std::vector<double> fit_pseudo_ml_phi(const ModelSpec& spec, const ParamVector& recursion,
                                             const PreparedSeries& data, const InitPolicy& init = {}) {
  if (spec.invariant_size() == 0) return {};
  const double T = static_cast<double>(data.size());
  std::vector<double> mu, s2;
  {
    FilterOutput path;
    ParamVector th = recursion;
    th.invariant.clear();
    detail::run_recursion(spec, th, data, init, [](std::size_t, double, double, double) { return PointTerm{}; },
                          nullptr, &path);
    mu = std::move(path.mu);
    s2 = std::move(path.sigma2);
  }
  std::vector<detail::Transform> tr;
  std::vector<std::vector<double>> starts;
  double mean_e2 = 0.0, mean_mu = 0.0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    mean_e2 += (data.h[t] - mu[t]) * (data.h[t] - mu[t]);
    mean_mu += mu[t];
  }
  mean_e2 /= T;
  mean_mu /= T;
  if (spec.variant == Variant::m_garma) {
    tr = {detail::Transform::exp};
    double start;
    if (spec.family == FamilyTag::log_gamma) {
      start = specfun::inv_trigamma(std::max(mean_e2, 1e-8));
    } else {
      const auto g = solve_gamma(Family::logit_beta(), {mean_mu, std::max(mean_e2, 1e-8)});
      start = g.first + g.second;
    }
    starts = {{start}, {start * 0.5}, {start * 2.0}};
  } else {
    tr = {detail::Transform::exp_plus_four, detail::Transform::identity};
    starts = {{8.0, 0.0}, {5.5, -0.3}, {15.0, 0.3}};
  }
  auto objective = [&](const std::vector<double>& x) {
    const double fd = 1e-5;
    auto val = [&](const std::vector<double>& z) {
      return -pseudo_loglik(Family(spec.family, spec.variant, z), mu, s2, data) / T;
    };
    ValueGrad vg{val(x), std::vector<double>(x.size())};
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double h = fd * std::max(1.0, std::abs(x[k]));
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      if (tr[k] == detail::Transform::exp && xm[k] <= 0.0) xm[k] = x[k] * 0.5;
      if (tr[k] == detail::Transform::exp_plus_four && xm[k] <= 4.0) xm[k] = 4.0 + (x[k] - 4.0) * 0.5;
      vg.grad[k] = (val(xp) - val(xm)) / (xp[k] - xm[k]);
    }
    return vg;
  };
  auto fu = detail::in_u_space(tr, objective);
  OptimOptions opt;
  opt.grad_tol = 1e-8;
  OptimResult best;
  for (const auto& s : starts) {
    auto r = bfgs_minimize(fu, detail::to_u(tr, s), opt);
    if (r.value < best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value)) throw NumericalError("pseudo-ML for the invariant parameters failed");
  return detail::to_x(tr, best.x);
}

namespace detail {

inline FitReport finish_report(const ModelSpec& spec, Method method, ParamVector theta, const PreparedSeries& data,
                               const FitConfig& cfg, bool converged, std::size_t iterations, std::string message) {
  FitReport rep;
  rep.spec = spec;
  rep.method = method;
  rep.theta = std::move(theta);
  rep.names = spec.parameter_names();
  rep.converged = converged;
  rep.iterations = iterations;
  rep.message = std::move(message);
  rep.T = data.size();
  if (rep.theta.invariant.size() == spec.invariant_size()) {
    try {
      rep.loglik = loglik(spec, rep.theta, data, cfg.init);
      const auto [aic, bic] = information_criteria(*rep.loglik, spec.parameter_count(), data.size());
      rep.aic = aic;
      rep.bic = bic;
    } catch (const NumericalError&) {
    }
    if (cfg.compute_se && converged && rep.loglik) rep.se = information_se(spec, rep.theta, data, cfg.init);
    if (!converged) rep.se.diagnostic = "fit did not converge";
  }
  return rep;
}

}  // namespace detail

/// Quasi-Gaussian estimate: minimizes Q_T over the ARMA and GARCH
/// coefficients. Method::gmle_pseudo adds the pseudo-ML step for phi.
inline FitReport fit_gmle(const ModelSpec& spec, const PreparedSeries& data, const FitConfig& cfg = {},
                          Method method = Method::gmle) {
  spec.validate();
  detail::check_length(spec, data);
  const auto& o = spec.orders;
  const auto tr = detail::transforms(spec, false);
  auto objective = detail::in_u_space(tr, [&](const std::vector<double>& x) {
    return gaussian_criterion(spec, ParamVector::unflatten(spec, x), data, cfg.init);
  });

  const auto [yw, yw_var] = detail::yule_walker(data, o.p);
  std::vector<ParamVector> starts;
  starts.push_back(detail::arma_start(spec, data, yw, {}, yw_var));
  {
    std::vector<double> ar(o.p, 0.0), ma(o.q, 0.0);
    if (o.p) ar[0] = 0.8;
    if (o.q) ma[0] = -0.3;
    starts.push_back(detail::arma_start(spec, data, ar, ma, data.h_var * (1.0 - (o.p ? 0.64 : 0.0))));
  }
  starts.push_back(detail::arma_start(spec, data, {}, {}, data.h_var));
  if (cfg.starts == 1) starts.resize(1);

  OptimResult best;
  for (const auto& s : starts) {
    auto r = bfgs_minimize(objective, detail::to_u(tr, s.flatten(spec)), cfg.optim);
    if (std::isfinite(r.value) && (!std::isfinite(best.value) || (r.converged && !best.converged) ||
                                   (r.converged == best.converged && r.value < best.value))) {
      best = std::move(r);
    }
  }
  if (!std::isfinite(best.value)) {
    FitReport rep;
    rep.spec = spec;
    rep.method = method;
    rep.names = spec.parameter_names();
    rep.message = "quasi-Gaussian criterion not finite at any start";
    rep.T = data.size();
    return rep;
  }
  ParamVector theta = ParamVector::unflatten(spec, detail::to_x(tr, best.x));
  if (spec.invariant_size() > 0 && method == Method::gmle_pseudo) {
    theta.invariant = fit_pseudo_ml_phi(spec, theta, data, cfg.init);
  }
  auto rep = detail::finish_report(spec, method, std::move(theta), data, cfg, best.converged, best.iterations,
                                   best.message);
  rep.gmle_q = best.value;
  return rep;
}

/// Conditional maximum likelihood with multi-start: the GMLE point (phi by
/// pseudo-ML), a perturbation of it, and a Yule-Walker moment start.
inline FitReport fit_mle(const ModelSpec& spec, const PreparedSeries& data, const FitConfig& cfg = {}) {
  spec.validate();
  detail::check_length(spec, data);
  const double T = static_cast<double>(data.size());
  const auto tr = detail::transforms(spec, true);

  FitConfig gcfg = cfg;
  gcfg.compute_se = false;
  const FitReport gm = fit_gmle(spec, data, gcfg, Method::gmle_pseudo);

  std::vector<ParamVector> starts;
  if (gm.theta.invariant.size() == spec.invariant_size() && gm.gmle_q) starts.push_back(gm.theta);
  if (cfg.starts > 1 && !starts.empty()) {
    ParamVector p = starts.front();
    for (double& a : p.ar) a *= 0.9;
    for (double& d : p.ma) d *= 0.9;
    for (double& a : p.alpha) a = a * 1.5 + 0.01;
    for (double& b : p.beta) b *= 0.9;
    p.omega *= 1.2;
    if (spec.variant == Variant::m_garma) {
      p.invariant[0] *= 1.2;
    } else if (spec.family == FamilyTag::ghsst) {
      p.invariant[0] += 1.0;
      p.invariant[1] *= 0.5;
    }
    starts.push_back(std::move(p));
  }
  if (cfg.starts > 2 || starts.empty()) {
    const auto [yw, yw_var] = detail::yule_walker(data, spec.orders.p);
    ParamVector p = detail::arma_start(spec, data, yw, {}, yw_var);
    try {
      p.invariant = fit_pseudo_ml_phi(spec, p, data, cfg.init);
      starts.push_back(std::move(p));
    } catch (const NumericalError&) {
    } catch (const DomainError&) {
    }
  }
  while (starts.size() > std::max<std::size_t>(cfg.starts, 1)) starts.pop_back();

  auto objective = detail::in_u_space(tr, [&](const std::vector<double>& x) {
    auto vg = loglik_with_gradient(spec, ParamVector::unflatten(spec, x), data, cfg.init);
    vg.value = -vg.value / T;
    for (double& g : vg.grad) g = -g / T;
    return vg;
  });
  OptimResult best;
  for (const auto& s : starts) {
    auto r = bfgs_minimize(objective, detail::to_u(tr, s.flatten(spec)), cfg.optim);
    if (std::isfinite(r.value) && (!std::isfinite(best.value) || (r.converged && !best.converged) ||
                                   (r.converged == best.converged && r.value < best.value))) {
      best = std::move(r);
    }
  }
  if (!std::isfinite(best.value)) {
    FitReport rep;
    rep.spec = spec;
    rep.method = Method::mle;
    rep.names = spec.parameter_names();
    rep.message = "log-likelihood not finite at any start";
    rep.T = data.size();
    return rep;
  }
  return detail::finish_report(spec, Method::mle, ParamVector::unflatten(spec, detail::to_x(tr, best.x)), data, cfg,
                               best.converged, best.iterations, best.message);
}

inline FitReport fit(const ModelSpec& spec, const PreparedSeries& data, Method method, const FitConfig& cfg = {}) {
  return method == Method::mle ? fit_mle(spec, data, cfg) : fit_gmle(spec, data, cfg, method);
}

}  // namespace garmagarch
