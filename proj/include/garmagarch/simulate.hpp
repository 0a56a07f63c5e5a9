#pragma once

// Path generation from a GARMA-GARCH or M-GARMA specification, and the
// Monte Carlo study harness.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "garmagarch/engine.hpp"
#include "garmagarch/errors.hpp"
#include "garmagarch/estimate.hpp"
#include "garmagarch/family.hpp"
#include "garmagarch/model.hpp"
#include "garmagarch/random.hpp"

namespace garmagarch {

/// How log-Gamma observations are generated. `direct` draws
/// y ~ Gam(c_t, c_t/eta_t); `innovation` draws eps_t = log G - psi(c_t),
/// G ~ Gamma(c_t, 1), and sets h(y_t) = mu_t + eps_t. Both give the same law.
enum class Construction { direct, innovation };

inline constexpr double kExplosiveVariance = 1e12;

/// Simulated observations with the generator's internal sequences. The
/// presample holds the m values preceding the first kept observation, so
/// filter(..., InitPolicy::explicit_values(presample)) reproduces mu, sigma2, eps.
struct SimulatedPath {
  std::vector<double> y;
  std::vector<double> mu;
  std::vector<double> sigma2;
  std::vector<double> eps;
  Presample presample;
};

inline SimulatedPath simulate_path(const ModelSpec& spec, const ParamVector& theta, std::size_t T,
                                   std::size_t burn_in, Rng& rng, Construction construction = Construction::direct) {
  spec.validate();
  theta.validate(spec);
  const Family f = theta.family(spec);
  const auto& o = spec.orders;
  const std::size_t m = o.max_lag();
  const bool garch = spec.has_variance_recursion();

  double ar_sum = 0.0;
  for (double a : theta.ar) ar_sum += a;
  const double h0 = ar_sum < 1.0 ? theta.phi0 / (1.0 - ar_sum) : 0.0;
  double v0 = 1.0;
  if (garch) {
    const double S = theta.persistence();
    v0 = S < 1.0 ? theta.omega / (1.0 - S) : theta.omega;
  }

  const std::size_t N = m + burn_in + T;
  std::vector<double> y(N, 0.0), h(N, h0), eps(N, 0.0), eps2(N, v0), sig2(N, v0), mus(N, 0.0);
  for (std::size_t i = m; i < N; ++i) {
    double mu = theta.phi0;
    for (std::size_t j = 1; j <= o.p; ++j) mu += theta.ar[j - 1] * h[i - j];
    for (std::size_t j = 1; j <= o.q; ++j) mu += theta.ma[j - 1] * eps[i - j];
    double s2 = 1.0;
    if (garch) {
      s2 = theta.omega;
      for (std::size_t j = 1; j <= o.r; ++j) s2 += theta.alpha[j - 1] * eps2[i - j];
      for (std::size_t j = 1; j <= o.s; ++j) s2 += theta.beta[j - 1] * sig2[i - j];
      if (!(s2 <= kExplosiveVariance)) {
        throw SimulationError("conditional variance exceeded 1e12 at step " + std::to_string(i - m) +
                              "; parameters are likely non-stationary");
      }
    }
    if (!std::isfinite(mu)) {
      throw SimulationError("conditional mean diverged at step " + std::to_string(i - m) +
                            "; parameters are likely non-stationary");
    }
    TimeVaryingParam g;
    try {
      g = solve_gamma(f, {mu, s2});
    } catch (const NumericalError& e) {
      throw SimulationError(std::string("simulation failed at step ") + std::to_string(i - m) + ": " + e.what());
    }
    double yi;
    if (construction == Construction::innovation && f.tag() == FamilyTag::log_gamma) {
      const double e = rng.log_gamma_variate(g.first) - specfun::digamma(g.first);
      yi = std::exp(mu + e);
      yi = std::clamp(yi, std::numeric_limits<double>::min(), std::numeric_limits<double>::max());
    } else {
      yi = sample(f, g, rng);
    }
    y[i] = yi;
    h[i] = y_link(f, yi);
    eps[i] = h[i] - mu;
    eps2[i] = eps[i] * eps[i];
    mus[i] = mu;
    sig2[i] = garch ? s2 : mean_var_links(f, g).variance;
  }

  SimulatedPath out;
  const std::size_t start = m + burn_in;
  out.y.assign(y.begin() + static_cast<std::ptrdiff_t>(start), y.end());
  out.mu.assign(mus.begin() + static_cast<std::ptrdiff_t>(start), mus.end());
  out.sigma2.assign(sig2.begin() + static_cast<std::ptrdiff_t>(start), sig2.end());
  out.eps.assign(eps.begin() + static_cast<std::ptrdiff_t>(start), eps.end());
  auto window = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(start - m),
                               v.begin() + static_cast<std::ptrdiff_t>(start));
  };
  out.presample = {window(h), window(eps), window(eps2), window(sig2)};
  return out;
}

struct SimConfig {
  ModelSpec spec;
  ParamVector theta;
  std::size_t T = 2000;
  std::size_t burn_in = 500;
  std::size_t n_reps = 200;
  std::uint64_t seed = 1;
  /// Estimators run on the true model.
  std::vector<Method> estimators{Method::gmle_pseudo, Method::mle};
  /// Also fit the M-GARMA baseline with orders (p, q, 0, 0).
  bool include_mgarma = true;
  FitConfig fit;
  std::size_t threads = 1;
  /// Largest tolerated fraction of failed or non-converged fits per cell.
  double max_failure_rate = 0.2;

  SimConfig() { fit.starts = 1; }

  void validate() const {
    spec.validate();
    theta.validate(spec);
    if (burn_in < 200) throw ConfigError("burn_in must be at least 200");
    if (n_reps == 0) throw ConfigError("n_reps must be positive");
    if (T <= spec.parameter_count()) throw ConfigError("T must exceed the parameter count");
    if (include_mgarma && spec.variant == Variant::m_garma) throw ConfigError("true model is already M-GARMA");
    if (include_mgarma && spec.family == FamilyTag::ghsst) throw ConfigError("ghsst has no M-GARMA baseline");
  }
};

/// The M-GARMA baseline matching a GARMA-GARCH specification.
inline ModelSpec mgarma_counterpart(const ModelSpec& spec) {
  return {spec.family, Variant::m_garma, {spec.orders.p, spec.orders.q, 0, 0}};
}

/// Named Monte Carlo presets: table1 (log-Gamma) and table2 (logit-Beta),
/// both GARMA(1,1)-GARCH(1,1).
inline SimConfig preset(std::string_view name) {
  SimConfig c;
  if (name == "table1") {
    c.spec = {FamilyTag::log_gamma, Variant::garch, {1, 1, 1, 1}};
    c.theta = {0.0, {0.95}, {-0.65}, 0.02, {0.06}, {0.90}, {}};
  } else if (name == "table2") {
    c.spec = {FamilyTag::logit_beta, Variant::garch, {1, 1, 1, 1}};
    c.theta = {-0.10, {0.90}, {-0.50}, 0.01, {0.45}, {0.45}, {}};
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected table1 or table2)");
  }
  return c;
}

/// One (model, estimator) cell of a study.
struct StudyCell {
  std::string model;  // "garma_garch" or "m_garma"
  Method method = Method::mle;
  std::vector<std::string> names;
  std::vector<std::optional<double>> truth;  // undefined for parameters absent from the DGP
  std::vector<double> mean;
  std::vector<double> rmse;
  std::vector<double> sd;
  std::vector<double> mean_se;
  std::size_t used = 0;
  std::size_t failed = 0;
  /// Per-replication estimates in replication order; empty when the fit failed.
  std::vector<std::vector<double>> estimates;
  std::vector<std::vector<double>> ses;

  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return i;
    }
    return std::nullopt;
  }
};

struct MonteCarloSummary {
  std::size_t T = 0;
  std::size_t n_reps = 0;
  std::uint64_t seed = 0;
  std::vector<StudyCell> cells;

  [[nodiscard]] const StudyCell& cell(std::string_view model, Method method) const {
    for (const auto& c : cells) {
      if (c.model == model && c.method == method) return c;
    }
    throw ConfigError("study has no cell " + std::string(model) + "/" + std::string(to_string(method)));
  }
};

namespace detail {

struct RepFit {
  std::vector<double> estimate;
  std::vector<double> se;
  bool ok = false;
};

struct CellPlan {
  ModelSpec spec;
  Method method;
  std::string model;
};

inline void aggregate(StudyCell& cell, std::span<const RepFit> fits) {
  const std::size_t k = cell.names.size();
  cell.mean.assign(k, 0.0);
  cell.rmse.assign(k, std::numeric_limits<double>::quiet_NaN());
  cell.sd.assign(k, 0.0);
  cell.mean_se.assign(k, 0.0);
  std::size_t se_count = 0;
  for (const auto& f : fits) {
    cell.estimates.push_back(f.ok ? f.estimate : std::vector<double>{});
    cell.ses.push_back(f.ok ? f.se : std::vector<double>{});
    if (!f.ok) {
      ++cell.failed;
      continue;
    }
    ++cell.used;
    for (std::size_t i = 0; i < k; ++i) cell.mean[i] += f.estimate[i];
    if (f.se.size() == k) {
      ++se_count;
      for (std::size_t i = 0; i < k; ++i) cell.mean_se[i] += f.se[i];
    }
  }
  if (cell.used == 0) return;
  const double n = static_cast<double>(cell.used);
  for (std::size_t i = 0; i < k; ++i) {
    cell.mean[i] /= n;
    cell.mean_se[i] = se_count ? cell.mean_se[i] / static_cast<double>(se_count)
                               : std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<double> sq(k, 0.0);
  for (const auto& f : fits) {
    if (!f.ok) continue;
    for (std::size_t i = 0; i < k; ++i) {
      cell.sd[i] += (f.estimate[i] - cell.mean[i]) * (f.estimate[i] - cell.mean[i]);
      if (cell.truth[i]) sq[i] += (f.estimate[i] - *cell.truth[i]) * (f.estimate[i] - *cell.truth[i]);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    cell.sd[i] = cell.used > 1 ? std::sqrt(cell.sd[i] / (n - 1.0)) : 0.0;
    if (cell.truth[i]) cell.rmse[i] = std::sqrt(sq[i] / n);
  }
}

}  // namespace detail

/// Simulates n_reps paths and fits each requested (model, estimator) pair.
/// Replication i draws from the stream derive_seed(seed, i); results are
/// aggregated in replication order, independent of scheduling.
inline MonteCarloSummary run_study(const SimConfig& cfg) {
  cfg.validate();
  std::vector<detail::CellPlan> plans;
  for (Method m : cfg.estimators) plans.push_back({cfg.spec, m, std::string(to_string(cfg.spec.variant))});
  if (cfg.include_mgarma) {
    for (Method m : cfg.estimators) plans.push_back({mgarma_counterpart(cfg.spec), m, "m_garma"});
  }

  std::vector<std::vector<detail::RepFit>> results(plans.size(), std::vector<detail::RepFit>(cfg.n_reps));
  std::vector<std::string> sim_errors(cfg.n_reps);
  auto run_rep = [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, i));
    PreparedSeries data;
    try {
      data = PreparedSeries::from(cfg.spec.family, simulate_path(cfg.spec, cfg.theta, cfg.T, cfg.burn_in, rng).y);
    } catch (const SimulationError& e) {
      sim_errors[i] = e.what();
      return;
    }
    for (std::size_t c = 0; c < plans.size(); ++c) {
      try {
        const auto rep = fit(plans[c].spec, data, plans[c].method, cfg.fit);
        auto& out = results[c][i];
        out.ok = rep.converged && rep.theta.invariant.size() == plans[c].spec.invariant_size();
        if (out.ok) {
          out.estimate = rep.theta.flatten(plans[c].spec);
          if (rep.se.available) out.se = rep.se.se;
        }
      } catch (const NumericalError&) {
      } catch (const DomainError&) {
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, cfg.n_reps));
  if (workers == 1) {
    for (std::size_t i = 0; i < cfg.n_reps; ++i) run_rep(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next++; i < cfg.n_reps; i = next++) run_rep(i);
      }));
    }
    for (auto& f : pool) f.get();
  }

  std::size_t sim_failed = 0;
  for (const auto& e : sim_errors) sim_failed += e.empty() ? 0 : 1;
  if (static_cast<double>(sim_failed) > cfg.max_failure_rate * static_cast<double>(cfg.n_reps)) {
    throw SimulationError("study: " + std::to_string(sim_failed) + " of " + std::to_string(cfg.n_reps) +
                          " simulated paths exploded");
  }

  MonteCarloSummary summary;
  summary.T = cfg.T;
  summary.n_reps = cfg.n_reps;
  summary.seed = cfg.seed;
  const auto truth_flat = cfg.theta.flatten(cfg.spec);
  const auto truth_names = cfg.spec.parameter_names();
  for (std::size_t c = 0; c < plans.size(); ++c) {
    StudyCell cell;
    cell.model = plans[c].model;
    cell.method = plans[c].method;
    cell.names = plans[c].spec.parameter_names();
    for (const auto& name : cell.names) {
      std::optional<double> t;
      for (std::size_t j = 0; j < truth_names.size(); ++j) {
        if (truth_names[j] == name) t = truth_flat[j];
      }
      cell.truth.push_back(t);
    }
    detail::aggregate(cell, results[c]);
    if (static_cast<double>(cell.failed) > cfg.max_failure_rate * static_cast<double>(cfg.n_reps)) {
      throw NumericalError("study: " + std::to_string(cell.failed) + " of " + std::to_string(cfg.n_reps) + " " +
                           cell.model + "/" + std::string(to_string(cell.method)) + " fits failed or did not converge");
    }
    summary.cells.push_back(std::move(cell));
  }
  return summary;
}

}  // namespace garmagarch
