#pragma once

// Mean/variance recursions, the conditional log-likelihood and its gradient.
//
//   mu_t      = phi0 + sum_j phi_j h(y_{t-j}) + sum_j delta_j eps_{t-j}
//   sigma^2_t = omega + sum_i alpha_i eps^2_{t-i} + sum_j beta_j sigma^2_{t-j}
//   eps_t     = h(y_t) - mu_t
//
// Derivatives of mu_t and sigma^2_t with respect to the ARMA and GARCH
// coefficients are propagated forward alongside the recursion.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "garmagarch/errors.hpp"
#include "garmagarch/family.hpp"
#include "garmagarch/model.hpp"

namespace garmagarch {

/// Observations together with their y-link transform.
struct PreparedSeries {
  std::vector<double> y;
  std::vector<double> h;
  double h_mean = 0.0;
  double h_var = 0.0;  // biased sample variance

  static PreparedSeries from(FamilyTag tag, std::span<const double> y) {
    // support only depends on the tag; any valid invariant values will do
    const Family f = tag == FamilyTag::ghsst ? Family::ghsst(5.0, 0.0) : Family(tag, Variant::garch, {});
    PreparedSeries s;
    s.y.assign(y.begin(), y.end());
    s.h.reserve(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
      try {
        s.h.push_back(y_link(f, y[t]));
      } catch (const DomainError& e) {
        throw DomainError(std::string(e.what()) + " at index " + std::to_string(t));
      }
    }
    if (!s.h.empty()) {
      for (double v : s.h) s.h_mean += v;
      s.h_mean /= static_cast<double>(s.h.size());
      for (double v : s.h) s.h_var += (v - s.h_mean) * (v - s.h_mean);
      s.h_var /= static_cast<double>(s.h.size());
    }
    return s;
  }

  [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
};

/// Values for t = 1-m, ..., 0, oldest first, each of length m = max lag.
struct Presample {
  std::vector<double> h;
  std::vector<double> eps;
  std::vector<double> eps2;
  std::vector<double> sigma2;
};

/// Pre-sample convention. The default sets eps = 0, eps^2 = sigma^2 to the
/// unconditional variance omega/(1 - sum alpha - sum beta) (the sample
/// variance of h when that sum is >= 1) and h to the sample mean of h.
class InitPolicy {
 public:
  InitPolicy() = default;
  static InitPolicy sample_mean() { return {}; }
  static InitPolicy explicit_values(Presample p) {
    InitPolicy ip;
    ip.values_ = std::move(p);
    return ip;
  }
  [[nodiscard]] const std::optional<Presample>& values() const noexcept { return values_; }

 private:
  std::optional<Presample> values_;
};

struct FilterOutput {
  std::vector<double> mu;
  std::vector<double> sigma2;
  std::vector<double> eps;
  std::vector<TimeVaryingParam> gamma;
  std::vector<double> loglik;

  [[nodiscard]] double total() const {
    double s = 0.0;
    for (double v : loglik) s += v;
    return s;
  }
};

/// Objective value with its gradient in the flat parameter layout.
struct ValueGrad {
  double value = 0.0;
  std::vector<double> grad;
};

/// Contribution of one observation given (mu_t, sigma^2_t).
struct PointTerm {
  double value = 0.0;
  double d_mean = 0.0;
  double d_variance = 0.0;
};

namespace detail {

inline void check_theta_shape(const ModelSpec& spec, const ParamVector& theta) {
  const auto& o = spec.orders;
  if (theta.ar.size() != o.p || theta.ma.size() != o.q) throw ConfigError("ARMA coefficient counts do not match orders");
  if (spec.has_variance_recursion() && (theta.alpha.size() != o.r || theta.beta.size() != o.s)) {
    throw ConfigError("GARCH coefficient counts do not match orders");
  }
}

struct ResolvedPresample {
  Presample values;
  // d(presample variance)/d(omega, alpha_1..r, beta_1..s); shared by eps^2 and sigma^2
  std::vector<double> d_var;
};

inline ResolvedPresample resolve_presample(const ModelSpec& spec, const ParamVector& theta, const PreparedSeries& data,
                                           const InitPolicy& init) {
  const std::size_t m = spec.orders.max_lag();
  ResolvedPresample out;
  out.d_var.assign(spec.garch_count(), 0.0);
  if (init.values()) {
    const auto& v = *init.values();
    if (v.h.size() != m || v.eps.size() != m || v.eps2.size() != m || v.sigma2.size() != m) {
      throw ConfigError("explicit presample must have " + std::to_string(m) + " entries per component");
    }
    out.values = v;
    return out;
  }
  double var = data.h_var;
  if (spec.has_variance_recursion()) {
    const double S = theta.persistence();
    if (S < 1.0) {
      var = theta.omega / (1.0 - S);
      out.d_var[0] = 1.0 / (1.0 - S);
      for (std::size_t k = 1; k < out.d_var.size(); ++k) out.d_var[k] = theta.omega / ((1.0 - S) * (1.0 - S));
    }
  }
  if (!(var > 0.0)) var = 1.0;
  out.values.h.assign(m, data.h_mean);
  out.values.eps.assign(m, 0.0);
  out.values.eps2.assign(m, var);
  out.values.sigma2.assign(m, var);
  return out;
}

/// Runs the recursion, calling term(t, mu_t, sigma2_t, eps_t) for each t.
/// When grad is non-null it receives d(sum of term values)/d(theta_arma, theta_garch).
/// For M-GARMA the variance passed to term is NaN.
template <class Term>
double run_recursion(const ModelSpec& spec, const ParamVector& theta, const PreparedSeries& data,
                     const InitPolicy& init, Term&& term, std::vector<double>* grad, FilterOutput* out) {
  check_theta_shape(spec, theta);
  const auto& o = spec.orders;
  const std::size_t m = o.max_lag();
  const std::size_t T = data.size();
  const bool garch = spec.has_variance_recursion();
  const std::size_t na = spec.arma_count();
  const std::size_t K = na + spec.garch_count();
  const auto pre = resolve_presample(spec, theta, data, init);

  // full-length buffers indexed by i = m + t
  const std::size_t N = m + T;
  std::vector<double> h(N), eps(N), eps2(N), sig2(N);
  for (std::size_t i = 0; i < m; ++i) {
    h[i] = pre.values.h[i];
    eps[i] = pre.values.eps[i];
    eps2[i] = pre.values.eps2[i];
    sig2[i] = pre.values.sigma2[i];
  }
  for (std::size_t t = 0; t < T; ++t) h[m + t] = data.h[t];

  const bool want_grad = grad != nullptr;
  std::vector<double> d_eps, d_eps2, d_sig2, d_mu(K), d_s(K);
  if (want_grad) {
    d_eps.assign(N * K, 0.0);
    d_eps2.assign(N * K, 0.0);
    d_sig2.assign(N * K, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < spec.garch_count(); ++k) {
        d_eps2[i * K + na + k] = pre.d_var[k];
        d_sig2[i * K + na + k] = pre.d_var[k];
      }
    }
    grad->assign(K, 0.0);
  }
  if (out) {
    out->mu.resize(T);
    out->sigma2.resize(T);
    out->eps.resize(T);
  }

  double total = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t i = m + t;
    double mu = theta.phi0;
    for (std::size_t j = 1; j <= o.p; ++j) mu += theta.ar[j - 1] * h[i - j];
    for (std::size_t j = 1; j <= o.q; ++j) mu += theta.ma[j - 1] * eps[i - j];
    double s2 = std::numeric_limits<double>::quiet_NaN();
    if (garch) {
      s2 = theta.omega;
      for (std::size_t j = 1; j <= o.r; ++j) s2 += theta.alpha[j - 1] * eps2[i - j];
      for (std::size_t j = 1; j <= o.s; ++j) s2 += theta.beta[j - 1] * sig2[i - j];
      if (!(s2 > 0.0) || !std::isfinite(s2)) {
        throw NumericalError("conditional variance is not positive and finite", t);
      }
    }
    const double e = h[i] - mu;
    eps[i] = e;
    eps2[i] = e * e;
    sig2[i] = s2;
    if (out) {
      out->mu[t] = mu;
      out->sigma2[t] = s2;
      out->eps[t] = e;
    }

    if (want_grad) {
      std::fill(d_mu.begin(), d_mu.end(), 0.0);
      d_mu[0] = 1.0;
      for (std::size_t j = 1; j <= o.p; ++j) d_mu[j] = h[i - j];
      for (std::size_t j = 1; j <= o.q; ++j) {
        d_mu[o.p + j] += eps[i - j];
        const double dj = theta.ma[j - 1];
        const double* de = &d_eps[(i - j) * K];
        for (std::size_t k = 0; k < K; ++k) d_mu[k] += dj * de[k];
      }
      double* de_now = &d_eps[i * K];
      double* de2_now = &d_eps2[i * K];
      for (std::size_t k = 0; k < K; ++k) {
        de_now[k] = -d_mu[k];
        de2_now[k] = -2.0 * e * d_mu[k];
      }
      if (garch) {
        std::fill(d_s.begin(), d_s.end(), 0.0);
        d_s[na] = 1.0;
        for (std::size_t j = 1; j <= o.r; ++j) {
          d_s[na + j] += eps2[i - j];
          const double a = theta.alpha[j - 1];
          const double* d = &d_eps2[(i - j) * K];
          for (std::size_t k = 0; k < K; ++k) d_s[k] += a * d[k];
        }
        for (std::size_t j = 1; j <= o.s; ++j) {
          d_s[na + o.r + j] += sig2[i - j];
          const double b = theta.beta[j - 1];
          const double* d = &d_sig2[(i - j) * K];
          for (std::size_t k = 0; k < K; ++k) d_s[k] += b * d[k];
        }
        std::copy(d_s.begin(), d_s.end(), d_sig2.begin() + static_cast<std::ptrdiff_t>(i * K));
      }
    }

    const PointTerm pt = term(t, mu, s2, e);
    total += pt.value;
    if (want_grad) {
      for (std::size_t k = 0; k < K; ++k) {
        (*grad)[k] += pt.d_mean * d_mu[k] + (garch ? pt.d_variance * d_s[k] : 0.0);
      }
    }
  }
  return total;
}

inline PointTerm family_term(const Family& f, const PreparedSeries& data, std::size_t t, double mu, double s2,
                             TimeVaryingParam* gamma_out) {
  try {
    const auto sc = score(f, {mu, std::isnan(s2) ? 1.0 : s2}, data.y[t]);
    if (gamma_out) *gamma_out = sc.gamma;
    if (!std::isfinite(sc.log_density)) throw NumericalError("log density is not finite", t);
    return {sc.log_density, sc.d_mean, sc.d_variance};
  } catch (const NumericalError& e) {
    if (e.index()) throw;
    throw NumericalError(e.what(), t);
  } catch (const DomainError& e) {
    throw NumericalError(e.what(), t);
  }
}

}  // namespace detail

/// mu_t, sigma^2_t, eps_t, gamma_t and the pointwise log-likelihood. For
/// M-GARMA baselines sigma^2_t is the variance V(gamma_t) implied by the
/// fixed invariant parameter.
inline FilterOutput filter(const ModelSpec& spec, const ParamVector& theta, const PreparedSeries& data,
                           const InitPolicy& init = {}) {
  spec.validate();
  theta.validate(spec);
  const Family f = theta.family(spec);
  FilterOutput out;
  out.gamma.resize(data.size());
  out.loglik.resize(data.size());
  detail::run_recursion(
      spec, theta, data, init,
      [&](std::size_t t, double mu, double s2, double) {
        const auto pt = detail::family_term(f, data, t, mu, s2, &out.gamma[t]);
        out.loglik[t] = pt.value;
        return pt;
      },
      nullptr, &out);
  if (spec.variant == Variant::m_garma) {
    for (std::size_t t = 0; t < data.size(); ++t) out.sigma2[t] = mean_var_links(f, out.gamma[t]).variance;
  }
  return out;
}

inline FilterOutput filter(const ModelSpec& spec, const ParamVector& theta, std::span<const double> y,
                           const InitPolicy& init = {}) {
  return filter(spec, theta, PreparedSeries::from(spec.family, y), init);
}

/// Sum of pointwise log-likelihoods.
inline double loglik(const ModelSpec& spec, const ParamVector& theta, const PreparedSeries& data,
                     const InitPolicy& init = {}) {
  spec.validate();
  theta.validate(spec);
  const Family f = theta.family(spec);
  return detail::run_recursion(
      spec, theta, data, init,
      [&](std::size_t t, double mu, double s2, double) { return detail::family_term(f, data, t, mu, s2, nullptr); },
      nullptr, nullptr);
}

inline double loglik(const ModelSpec& spec, const ParamVector& theta, std::span<const double> y,
                     const InitPolicy& init = {}) {
  return loglik(spec, theta, PreparedSeries::from(spec.family, y), init);
}

/// sum_t log f(y_t | gamma_t(phi), phi) with mu_t and sigma^2_t held fixed.
/// The recursions do not involve phi, so this is also the phi-section of the
/// full log-likelihood.
inline double pseudo_loglik(const Family& f, std::span<const double> mu, std::span<const double> sigma2,
                            const PreparedSeries& data) {
  double total = 0.0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    total += detail::family_term(f, data, t, mu[t], sigma2[t], nullptr).value;
  }
  return total;
}

/// Log-likelihood and its gradient in flat layout. ARMA/GARCH components are
/// propagated analytically; invariant components use central differences of
/// the phi-section with relative step fd_step.
inline ValueGrad loglik_with_gradient(const ModelSpec& spec, const ParamVector& theta, const PreparedSeries& data,
                                      const InitPolicy& init = {}, double fd_step = 1e-6) {
  spec.validate();
  theta.validate(spec);
  const Family f = theta.family(spec);
  ValueGrad vg;
  const bool need_path = !theta.invariant.empty();
  FilterOutput path;
  vg.value = detail::run_recursion(
      spec, theta, data, init,
      [&](std::size_t t, double mu, double s2, double) { return detail::family_term(f, data, t, mu, s2, nullptr); },
      &vg.grad, need_path ? &path : nullptr);
  for (std::size_t k = 0; k < theta.invariant.size(); ++k) {
    const double x = theta.invariant[k];
    const double step = fd_step * std::max(1.0, std::abs(x));
    auto at = [&](double v) {
      auto inv = theta.invariant;
      inv[k] = v;
      return pseudo_loglik(Family(spec.family, spec.variant, inv), path.mu, path.sigma2, data);
    };
    vg.grad.push_back((at(x + step) - at(x - step)) / (2.0 * step));
  }
  return vg;
}

/// Quasi-Gaussian criterion Q_T = (1/T) sum_t (log sigma^2_t + eps_t^2 / sigma^2_t)
/// over the ARMA and GARCH coefficients, with its gradient. For M-GARMA
/// (no variance recursion) sigma^2 is profiled out: Q_T = log(mean eps^2) + 1.
inline ValueGrad gaussian_criterion(const ModelSpec& spec, const ParamVector& theta, const PreparedSeries& data,
                                    const InitPolicy& init = {}) {
  const double T = static_cast<double>(data.size());
  ValueGrad vg;
  if (spec.has_variance_recursion()) {
    if (!(theta.omega > 0.0)) throw DomainError("omega must be strictly positive");
    const double sum = detail::run_recursion(
        spec, theta, data, init,
        [](std::size_t, double, double s2, double e) {
          const double r = e * e / s2;
          return PointTerm{std::log(s2) + r, -2.0 * e / s2, (1.0 - r) / s2};
        },
        &vg.grad, nullptr);
    vg.value = sum / T;
    for (double& g : vg.grad) g /= T;
    return vg;
  }
  const double sse = detail::run_recursion(
      spec, theta, data, init, [](std::size_t, double, double, double e) { return PointTerm{e * e, -2.0 * e, 0.0}; },
      &vg.grad, nullptr);
  vg.value = std::log(sse / T) + 1.0;
  for (double& g : vg.grad) g /= sse;
  return vg;
}

}  // namespace garmagarch
