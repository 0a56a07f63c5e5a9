#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string_view>

namespace garmagarch {

/// Identifier of the variate-generation algorithms below. Reports carry it so
/// that Monte Carlo output can be tied to the exact stream that produced it.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64;u=(x>>11+0.5)/2^53;normal=marsaglia-polar;gamma=marsaglia-tsang(shape<1:boost-by-u^(1/a))";

/// SplitMix64 step, used to derive independent seeds for replications.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` derived from a master seed; streams for distinct
/// indices are statistically independent and do not depend on execution order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Deterministic random stream. Every variate is produced by code in this
/// class rather than by <random> distributions, whose algorithms are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() noexcept {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    return u * f;
  }

  /// log of a Gamma(shape, 1) variate. Working on the log scale keeps
  /// variates with tiny shapes from underflowing to zero.
  double log_gamma_variate(double shape) noexcept {
    if (shape < 1.0) {
      return log_gamma_variate(shape + 1.0) + std::log(uniform()) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
  }

  double gamma(double shape) noexcept { return std::exp(log_gamma_variate(shape)); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace garmagarch
