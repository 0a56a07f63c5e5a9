#pragma once

// Unconstrained quasi-Newton minimization (BFGS, inverse-Hessian form) with a
// backtracking Armijo line search. Objectives return a value and gradient;
// a non-finite value or a thrown NumericalError/DomainError is treated as +inf.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "garmagarch/engine.hpp"
#include "garmagarch/errors.hpp"

namespace garmagarch {

struct OptimOptions {
  std::size_t max_iterations = 2000;
  double rel_tol = 1e-9;    // relative objective change, two iterations in a row
  double grad_tol = 1e-6;   // infinity norm of the gradient
  double armijo = 1e-4;
  std::size_t max_backtracks = 60;
  double max_step = 5.0;    // cap on the first trial step length, in u-space
};

struct OptimResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> grad;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::string message;
};

namespace detail {

template <class F>
ValueGrad safe_eval(F& f, const std::vector<double>& x, std::size_t& count) {
  ++count;
  try {
    ValueGrad vg = f(x);
    if (!std::isfinite(vg.value)) return {std::numeric_limits<double>::infinity(), {}};
    for (double g : vg.grad) {
      if (!std::isfinite(g)) return {std::numeric_limits<double>::infinity(), {}};
    }
    return vg;
  } catch (const NumericalError&) {
  } catch (const DomainError&) {
  }
  return {std::numeric_limits<double>::infinity(), {}};
}

inline double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

template <class F>
OptimResult bfgs_minimize(F&& f, std::vector<double> x0, const OptimOptions& opt = {}) {
  const std::size_t n = x0.size();
  OptimResult res;
  res.x = std::move(x0);
  ValueGrad cur = detail::safe_eval(f, res.x, res.evaluations);
  if (!std::isfinite(cur.value)) {
    res.message = "objective not finite at the starting point";
    return res;
  }
  res.value = cur.value;
  res.grad = cur.grad;
  if (n == 0) {
    res.converged = true;
    return res;
  }

  std::vector<double> H(n * n, 0.0);
  auto reset_h = [&](double scale) {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = scale;
  };
  reset_h(1.0);
  bool fresh = true;
  std::size_t small_changes = 0;
  std::vector<double> d(n), xn(n), s(n), y(n), Hy(n);

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    if (detail::inf_norm(res.grad) < opt.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance";
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v -= H[i * n + j] * res.grad[j];
      d[i] = v;
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += d[i] * res.grad[i];
    if (!(slope < 0.0)) {
      // not a descent direction: fall back to steepest descent
      reset_h(1.0);
      fresh = true;
      for (std::size_t i = 0; i < n; ++i) d[i] = -res.grad[i];
      slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += d[i] * res.grad[i];
    }
    double step = 1.0;
    const double dn = detail::inf_norm(d);
    if (dn * step > opt.max_step) step = opt.max_step / dn;

    ValueGrad next;
    bool accepted = false;
    for (std::size_t b = 0; b < opt.max_backtracks; ++b) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + step * d[i];
      next = detail::safe_eval(f, xn, res.evaluations);
      if (std::isfinite(next.value) && next.value <= res.value + opt.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        reset_h(1.0);
        fresh = true;
        continue;
      }
      // no decrease even along steepest descent: at the noise floor of the objective
      res.converged = detail::inf_norm(res.grad) < 1e-3 * std::max(1.0, std::abs(res.value));
      res.message = "line search stalled";
      return res;
    }

    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - res.x[i];
      y[i] = next.grad[i] - res.grad[i];
    }
    const double change = std::abs(next.value - res.value) / std::max(1.0, std::abs(res.value));
    res.x = xn;
    res.value = next.value;
    res.grad = next.grad;

    double sy = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sy += s[i] * y[i];
      yy += y[i] * y[i];
    }
    if (sy > 1e-12 * std::sqrt(yy) * detail::inf_norm(s)) {
      if (fresh) {
        reset_h(sy / yy);
        fresh = false;
      }
      for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) v += H[i * n + j] * y[j];
        Hy[i] = v;
      }
      double yHy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yHy += y[i] * Hy[i];
      const double rho = 1.0 / sy;
      const double c = (1.0 + rho * yHy) * rho;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += c * s[i] * s[j] - rho * (Hy[i] * s[j] + s[i] * Hy[j]);
        }
      }
    }

    small_changes = change < opt.rel_tol ? small_changes + 1 : 0;
    if (small_changes >= 2) {
      res.converged = true;
      res.message = "relative change tolerance";
      ++res.iterations;
      return res;
    }
  }
  res.message = "iteration limit";
  return res;
}

}  // namespace garmagarch
