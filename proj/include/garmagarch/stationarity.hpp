#pragma once

// Sufficient conditions for strict stationarity with a finite fourth moment
// of h(y_t): the operator norm of B_h (and of Phi^h for logit-Beta) below one
// for some h, where B_0 = I and B_k = A' B_{k-1} A + 5 A_1' B_{k-1} A_1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "garmagarch/model.hpp"

namespace garmagarch {

/// Phi: p x p ARMA companion with first row phi.
/// A: n x n GARCH companion, n = max(r, s), first row alpha_i + beta_i (shorter order zero-padded).
/// A1: same size, first row alpha, zeros elsewhere.
struct CompanionPair {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd a;
  Eigen::MatrixXd a1;
};

inline CompanionPair build_companions(const Orders& o, const ParamVector& theta) {
  auto companion = [](std::size_t n, auto coef) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) m(0, static_cast<Eigen::Index>(j)) = coef(j);
    for (std::size_t i = 1; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    return m;
  };
  auto at = [](const std::vector<double>& v, std::size_t j) { return j < v.size() ? v[j] : 0.0; };
  const std::size_t np = std::max<std::size_t>(o.p, 1);
  const std::size_t nr = std::max<std::size_t>({o.r, o.s, 1});
  CompanionPair cp;
  cp.phi = companion(np, [&](std::size_t j) { return at(theta.ar, j); });
  cp.a = companion(nr, [&](std::size_t j) { return at(theta.alpha, j) + at(theta.beta, j); });
  cp.a1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nr));
  for (std::size_t j = 0; j < nr; ++j) cp.a1(0, static_cast<Eigen::Index>(j)) = at(theta.alpha, j);
  return cp;
}

/// B_1, ..., B_{k_max}.
inline std::vector<Eigen::MatrixXd> bk_recursion(const CompanionPair& cp, std::size_t k_max) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(k_max);
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(cp.a.rows(), cp.a.cols());
  for (std::size_t k = 0; k < k_max; ++k) {
    b = cp.a.transpose() * b * cp.a + 5.0 * cp.a1.transpose() * b * cp.a1;
    out.push_back(b);
  }
  return out;
}

/// Largest singular value, from the symmetric eigenproblem of M'M.
inline double operator_norm(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.transpose() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

struct StationarityVerdict {
  bool theory_available = true;
  bool satisfied = false;
  std::optional<std::size_t> h_found;
  std::vector<double> bk_norms;
  std::vector<double> phi_power_norms;  // logit-Beta only
  bool root_check = false;              // all roots of phi(z) outside the unit circle
  double phi_spectral_radius = 0.0;
  std::string message;
};

/// Scans h = 1..h_max. log-Gamma: ||B_h|| < 1 for some h and the AR roots
/// check. logit-Beta: ||B_h|| < 1 and ||Phi^h|| < 1 at a common h. GHSST has
/// no such result and is reported as theory unavailable.
inline StationarityVerdict check_stationarity(const ModelSpec& spec, const ParamVector& theta,
                                              std::size_t h_max = 64) {
  StationarityVerdict v;
  if (spec.family == FamilyTag::ghsst) {
    v.theory_available = false;
    v.message = "no stationarity theory for ghsst";
    return v;
  }
  if (!spec.has_variance_recursion()) {
    v.theory_available = false;
    v.message = "conditions apply to GARMA-GARCH models only";
    return v;
  }
  if (h_max < 1) h_max = 1;
  const auto cp = build_companions(spec.orders, theta);
  Eigen::EigenSolver<Eigen::MatrixXd> es(cp.phi, false);
  v.phi_spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  v.root_check = v.phi_spectral_radius < 1.0;

  const bool need_phi = spec.family == FamilyTag::logit_beta;
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(cp.a.rows(), cp.a.cols());
  Eigen::MatrixXd phik = Eigen::MatrixXd::Identity(cp.phi.rows(), cp.phi.cols());
  for (std::size_t k = 1; k <= h_max; ++k) {
    b = cp.a.transpose() * b * cp.a + 5.0 * cp.a1.transpose() * b * cp.a1;
    const double bn = operator_norm(b);
    v.bk_norms.push_back(bn);
    bool ok = bn < 1.0;
    if (need_phi) {
      phik = phik * cp.phi;
      const double pn = operator_norm(phik);
      v.phi_power_norms.push_back(pn);
      ok = ok && pn < 1.0;
    }
    if (ok) {
      v.h_found = k;
      break;
    }
    if (!std::isfinite(bn) || bn > 1e100) break;
  }
  if (spec.family == FamilyTag::log_gamma) {
    v.satisfied = v.h_found.has_value() && v.root_check;
  } else {
    v.satisfied = v.h_found.has_value();
  }
  if (v.satisfied) {
    v.message = "sufficient condition holds at h = " + std::to_string(*v.h_found);
  } else if (!v.h_found) {
    v.message = "no h <= " + std::to_string(h_max) + " satisfies the norm condition";
  } else {
    v.message = "autoregressive polynomial has a root on or inside the unit circle";
  }
  return v;
}

}  // namespace garmagarch
