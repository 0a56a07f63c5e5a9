#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "garmagarch/errors.hpp"

namespace garmagarch {

enum class FamilyTag { log_gamma, logit_beta, ghsst };

/// `garch`: two time-varying parameters driven by the mean and variance
/// recursions. `m_garma`: the martingalized GARMA baseline with a single
/// time-varying parameter driven by the mean recursion and a fixed
/// invariant parameter (shape c for log-Gamma, precision a+b for logit-Beta).
enum class Variant { garch, m_garma };

inline std::string_view to_string(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::log_gamma: return "log_gamma";
    case FamilyTag::logit_beta: return "logit_beta";
    case FamilyTag::ghsst: return "ghsst";
  }
  return "?";
}

inline FamilyTag family_from_string(std::string_view s) {
  if (s == "log_gamma" || s == "loggamma" || s == "log-gamma") return FamilyTag::log_gamma;
  if (s == "logit_beta" || s == "logitbeta" || s == "logit-beta") return FamilyTag::logit_beta;
  if (s == "ghsst") return FamilyTag::ghsst;
  throw ConfigError("unknown family '" + std::string(s) + "' (expected log_gamma, logit_beta or ghsst)");
}

inline std::string_view to_string(Variant v) { return v == Variant::garch ? "garma_garch" : "m_garma"; }

/// Number of time-invariant parameters for a family/variant pair.
inline std::size_t invariant_count(FamilyTag tag, Variant variant) {
  if (variant == Variant::m_garma) return 1;
  return tag == FamilyTag::ghsst ? 2 : 0;
}

inline std::vector<std::string> invariant_names(FamilyTag tag, Variant variant) {
  if (variant == Variant::m_garma) {
    return {tag == FamilyTag::log_gamma ? "c" : "tau_sum"};
  }
  if (tag == FamilyTag::ghsst) return {"nu", "tau"};
  return {};
}

/// A conditional distribution family together with its time-invariant
/// parameters phi: (nu, tau) for GHSST, c for the log-Gamma M-GARMA
/// baseline, tau_sum = a_t + b_t for the logit-Beta M-GARMA baseline.
class Family {
 public:
  Family(FamilyTag tag, Variant variant, std::vector<double> invariant)
      : tag_(tag), variant_(variant), invariant_(std::move(invariant)) {
    validate();
  }

  static Family log_gamma() { return {FamilyTag::log_gamma, Variant::garch, {}}; }
  static Family logit_beta() { return {FamilyTag::logit_beta, Variant::garch, {}}; }
  static Family ghsst(double nu, double tau) { return {FamilyTag::ghsst, Variant::garch, {nu, tau}}; }
  static Family log_gamma_mgarma(double c) { return {FamilyTag::log_gamma, Variant::m_garma, {c}}; }
  static Family logit_beta_mgarma(double tau_sum) { return {FamilyTag::logit_beta, Variant::m_garma, {tau_sum}}; }

  [[nodiscard]] FamilyTag tag() const noexcept { return tag_; }
  [[nodiscard]] Variant variant() const noexcept { return variant_; }
  [[nodiscard]] std::span<const double> invariant() const noexcept { return invariant_; }

  [[nodiscard]] double nu() const { return invariant_.at(0); }
  [[nodiscard]] double tau() const { return invariant_.at(1); }
  /// Fixed shape c (log-Gamma M-GARMA) or precision a+b (logit-Beta M-GARMA).
  [[nodiscard]] double fixed() const { return invariant_.at(0); }

  [[nodiscard]] std::string name() const {
    return std::string(to_string(tag_)) + (variant_ == Variant::m_garma ? "_m_garma" : "_garma_garch");
  }

 private:
  void validate() const {
    if (invariant_.size() != invariant_count(tag_, variant_)) {
      throw DomainError(name_prefix() + ": expected " + std::to_string(invariant_count(tag_, variant_)) +
                        " invariant parameters, got " + std::to_string(invariant_.size()));
    }
    if (variant_ == Variant::m_garma) {
      if (tag_ == FamilyTag::ghsst) throw DomainError("ghsst has no M-GARMA baseline");
      if (!(invariant_[0] > 0.0) || !std::isfinite(invariant_[0])) {
        throw DomainError(name_prefix() + ": baseline parameter must be positive");
      }
    } else if (tag_ == FamilyTag::ghsst) {
      if (!(invariant_[0] > 4.0) || !std::isfinite(invariant_[0])) {
        throw DomainError("ghsst: nu must exceed 4 for a finite variance, got " + std::to_string(invariant_[0]));
      }
      if (!std::isfinite(invariant_[1])) throw DomainError("ghsst: tau must be finite");
    }
  }

  [[nodiscard]] std::string name_prefix() const { return std::string(to_string(tag_)); }

  FamilyTag tag_;
  Variant variant_;
  std::vector<double> invariant_;
};

/// ARMA orders (p, q) of the mean recursion and GARCH orders (r, s) of the
/// variance recursion.
struct Orders {
  std::size_t p = 0;
  std::size_t q = 0;
  std::size_t r = 0;
  std::size_t s = 0;

  /// Initialization depth m = max(p, q, r, s).
  [[nodiscard]] std::size_t max_lag() const noexcept { return std::max({p, q, r, s}); }

  void validate(Variant variant) const {
    if (p + q == 0 && r + s == 0) throw ConfigError("orders: need p+q >= 1 or r+s >= 1");
    if (variant == Variant::garch && r == 0) {
      throw ConfigError("orders: GARMA-GARCH models need r >= 1");
    }
    if (variant == Variant::m_garma && (r != 0 || s != 0)) {
      throw ConfigError("orders: M-GARMA baselines have no GARCH part (r = s = 0)");
    }
  }

  friend bool operator==(const Orders&, const Orders&) = default;
};

/// Family tag, variant and orders: everything needed to lay out theta.
struct ModelSpec {
  FamilyTag family = FamilyTag::log_gamma;
  Variant variant = Variant::garch;
  Orders orders;

  [[nodiscard]] bool has_variance_recursion() const noexcept { return variant == Variant::garch; }
  [[nodiscard]] std::size_t arma_count() const noexcept { return 1 + orders.p + orders.q; }
  [[nodiscard]] std::size_t garch_count() const noexcept {
    return has_variance_recursion() ? 1 + orders.r + orders.s : 0;
  }
  [[nodiscard]] std::size_t invariant_size() const { return invariant_count(family, variant); }
  /// ARMA plus GARCH coefficients, the parameters of the recursions.
  [[nodiscard]] std::size_t recursion_count() const noexcept { return arma_count() + garch_count(); }
  [[nodiscard]] std::size_t parameter_count() const { return recursion_count() + invariant_size(); }

  /// Names in flat layout order.
  [[nodiscard]] std::vector<std::string> parameter_names() const {
    std::vector<std::string> names{"phi0"};
    for (std::size_t j = 1; j <= orders.p; ++j) names.push_back("phi" + std::to_string(j));
    for (std::size_t j = 1; j <= orders.q; ++j) names.push_back("delta" + std::to_string(j));
    if (has_variance_recursion()) {
      names.emplace_back("omega");
      for (std::size_t j = 1; j <= orders.r; ++j) names.push_back("alpha" + std::to_string(j));
      for (std::size_t j = 1; j <= orders.s; ++j) names.push_back("beta" + std::to_string(j));
    }
    for (auto& n : invariant_names(family, variant)) names.push_back(std::move(n));
    return names;
  }

  void validate() const {
    orders.validate(variant);
    if (variant == Variant::m_garma && family == FamilyTag::ghsst) {
      throw ConfigError("ghsst has no M-GARMA baseline");
    }
  }
};

/// theta = (theta_arma, theta_garch, phi).
struct ParamVector {
  double phi0 = 0.0;
  std::vector<double> ar;     // phi_1..phi_p
  std::vector<double> ma;     // delta_1..delta_q
  double omega = 1.0;
  std::vector<double> alpha;  // alpha_1..alpha_r
  std::vector<double> beta;   // beta_1..beta_s
  std::vector<double> invariant;

  [[nodiscard]] double persistence() const {
    return std::accumulate(alpha.begin(), alpha.end(), 0.0) + std::accumulate(beta.begin(), beta.end(), 0.0);
  }

  /// Flat layout (phi0, phi_1..p, delta_1..q, [omega, alpha_1..r, beta_1..s], phi).
  [[nodiscard]] std::vector<double> flatten(const ModelSpec& spec) const {
    std::vector<double> out{phi0};
    out.insert(out.end(), ar.begin(), ar.end());
    out.insert(out.end(), ma.begin(), ma.end());
    if (spec.has_variance_recursion()) {
      out.push_back(omega);
      out.insert(out.end(), alpha.begin(), alpha.end());
      out.insert(out.end(), beta.begin(), beta.end());
    }
    out.insert(out.end(), invariant.begin(), invariant.end());
    return out;
  }

  /// Accepts the full layout or the recursion-only prefix (invariant left empty).
  static ParamVector unflatten(const ModelSpec& spec, std::span<const double> flat) {
    if (flat.size() != spec.parameter_count() && flat.size() != spec.recursion_count()) {
      throw ConfigError("parameter vector has " + std::to_string(flat.size()) + " entries, model needs " +
                        std::to_string(spec.parameter_count()));
    }
    const auto& o = spec.orders;
    ParamVector theta;
    std::size_t k = 0;
    theta.phi0 = flat[k++];
    theta.ar.assign(flat.begin() + k, flat.begin() + k + o.p);
    k += o.p;
    theta.ma.assign(flat.begin() + k, flat.begin() + k + o.q);
    k += o.q;
    if (spec.has_variance_recursion()) {
      theta.omega = flat[k++];
      theta.alpha.assign(flat.begin() + k, flat.begin() + k + o.r);
      k += o.r;
      theta.beta.assign(flat.begin() + k, flat.begin() + k + o.s);
      k += o.s;
    }
    theta.invariant.assign(flat.begin() + k, flat.end());
    return theta;
  }

  /// Shape and constraint checks: omega > 0, alpha, beta >= 0, and the
  /// family's invariant-parameter constraints.
  void validate(const ModelSpec& spec) const {
    const auto& o = spec.orders;
    if (ar.size() != o.p || ma.size() != o.q) throw ConfigError("ARMA coefficient counts do not match orders");
    if (spec.has_variance_recursion()) {
      if (alpha.size() != o.r || beta.size() != o.s) throw ConfigError("GARCH coefficient counts do not match orders");
      if (!(omega > 0.0)) throw DomainError("omega must be strictly positive");
      for (double a : alpha) if (!(a >= 0.0)) throw DomainError("alpha coefficients must be nonnegative");
      for (double b : beta) if (!(b >= 0.0)) throw DomainError("beta coefficients must be nonnegative");
    }
    (void)family(spec);
  }

  [[nodiscard]] Family family(const ModelSpec& spec) const { return Family(spec.family, spec.variant, invariant); }
};

}  // namespace garmagarch
