#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "garmagarch/family.hpp"
#include "gof.hpp"
#include "oracles.hpp"

namespace gg = garmagarch;
namespace sf = garmagarch::specfun;
using gg::Family;
using gg::MomentPair;
using gg::TimeVaryingParam;

namespace {

constexpr double kPi = std::numbers::pi;

double integrate_density(const Family& f, const TimeVaryingParam& g) {
  auto dens = [&](double y) { return std::exp(gg::log_density(f, g, y)); };
  switch (f.tag()) {
    case gg::FamilyTag::log_gamma: {
      // tanh-sinh handles the y^(c-1) endpoint singularity
      boost::math::quadrature::tanh_sinh<double> ts;
      return ts.integrate(dens, 0.0, g.second) + oracle::integrate(dens, g.second, INFINITY);
    }
    case gg::FamilyTag::logit_beta: {
      boost::math::quadrature::tanh_sinh<double> ts;
      return ts.integrate(dens, 0.0, 1.0);
    }
    case gg::FamilyTag::ghsst:
      return oracle::integrate(dens, -INFINITY, g.first) + oracle::integrate(dens, g.first, INFINITY);
  }
  return 0.0;
}

struct Moments {
  double mean, var;
};

template <class F>
Moments sample_moments(F draw, std::size_t n) {
  double m = 0.0, m2 = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = draw();
    const double d = x - m;
    m += d / static_cast<double>(i);
    m2 += d * (x - m);
  }
  return {m, m2 / static_cast<double>(n - 1)};
}

}  // namespace

TEST(YLink, Examples) {
  EXPECT_EQ(gg::y_link(Family::log_gamma(), 1.0), 0.0);
  EXPECT_EQ(gg::y_link(Family::logit_beta(), 0.5), 0.0);
  EXPECT_EQ(gg::y_link(Family::ghsst(6.0, 0.0), -3.2), -3.2);
}

TEST(YLink, SupportViolationsNameTheFamily) {
  try {
    gg::y_link(Family::logit_beta(), 1.0);
    FAIL();
  } catch (const gg::DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("logit_beta"), std::string::npos);
  }
  EXPECT_THROW(gg::y_link(Family::log_gamma(), 0.0), gg::DomainError);
  EXPECT_THROW(gg::y_link(Family::log_gamma(), -1.0), gg::DomainError);
  EXPECT_THROW(gg::y_link(Family::logit_beta(), 0.0), gg::DomainError);
  EXPECT_THROW(gg::y_link(Family::ghsst(6.0, 0.1), NAN), gg::DomainError);
}

TEST(MeanVarLinks, Examples) {
  auto lg = gg::mean_var_links(Family::log_gamma(), {1.0, std::exp(std::numbers::egamma)});
  EXPECT_NEAR(lg.mean, 0.0, 1e-14);
  EXPECT_NEAR(lg.variance, kPi * kPi / 6.0, 1e-14);
  auto lb = gg::mean_var_links(Family::logit_beta(), {1.0, 1.0});
  EXPECT_NEAR(lb.mean, 0.0, 1e-15);
  EXPECT_NEAR(lb.variance, kPi * kPi / 3.0, 1e-14);
  auto gh = gg::mean_var_links(Family::ghsst(6.0, 0.0), {0.0, 2.0});
  EXPECT_NEAR(gh.mean, 0.0, 1e-15);
  EXPECT_NEAR(gh.variance, 1.0, 1e-15);
}

TEST(SolveGamma, Examples) {
  auto lg = gg::solve_gamma(Family::log_gamma(), {0.3, sf::trigamma(2.0)});
  EXPECT_NEAR(lg.first, 2.0, 1e-10);
  EXPECT_NEAR(lg.second, std::exp(0.3 + std::log(2.0) - sf::digamma(2.0)), 1e-10);

  auto lb = gg::solve_gamma(Family::logit_beta(),
                            {sf::digamma(2.0) - sf::digamma(3.0), sf::trigamma(2.0) + sf::trigamma(3.0)});
  EXPECT_NEAR(lb.first, 2.0, 1e-9);
  EXPECT_NEAR(lb.second, 3.0, 1e-9);

  const auto f = Family::ghsst(7.0, -0.2);
  auto gh = gg::solve_gamma(f, {0.0, 1.0});
  auto back = gg::mean_var_links(f, gh);
  EXPECT_NEAR(back.mean, 0.0, 1e-12);
  EXPECT_NEAR(back.variance, 1.0, 1e-12);

  auto sym = gg::solve_gamma(Family::ghsst(6.0, 0.0), {0.0, 1.0});
  EXPECT_NEAR(sym.first, 0.0, 1e-15);
  EXPECT_NEAR(sym.second, 2.0, 1e-15);
}

TEST(SolveGamma, GhsstRootMatchesTextbookQuadraticForm) {
  // varsigma^2 = (-b0 + b0 sqrt(1 + 8 tau^2 sigma^2/(nu-4))) / (4 tau^2), b0 = (nu-2)(nu-4)
  for (double tau : {-1.5, -0.2, 0.01, 0.7}) {
    for (double var : {0.01, 1.0, 40.0}) {
      const double nu = 6.5;
      const double b0 = (nu - 2.0) * (nu - 4.0);
      const double s2 = (-b0 + b0 * std::sqrt(1.0 + 8.0 * tau * tau * var / (nu - 4.0))) / (4.0 * tau * tau);
      const auto g = gg::solve_gamma(Family::ghsst(nu, tau), {0.4, var});
      EXPECT_NEAR(g.second * g.second, s2, 1e-9 * s2) << tau << " " << var;
    }
  }
}

TEST(SolveGamma, Errors) {
  EXPECT_THROW(gg::solve_gamma(Family::log_gamma(), {0.0, 0.0}), gg::DomainError);
  EXPECT_THROW(gg::solve_gamma(Family::logit_beta(), {0.0, -1.0}), gg::DomainError);
  EXPECT_THROW(Family::ghsst(4.0, 0.1), gg::DomainError);
  EXPECT_THROW(Family::ghsst(3.0, 0.1), gg::DomainError);
}

TEST(SolveGamma, RoundTripRandomized) {
  std::mt19937_64 gen(20240611);
  std::uniform_real_distribution<double> mean_dist(-6.0, 6.0);
  std::uniform_real_distribution<double> logvar_dist(std::log(1e-3), std::log(50.0));
  std::uniform_real_distribution<double> nu_dist(4.2, 30.0);
  std::uniform_real_distribution<double> tau_dist(-2.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const MomentPair mp{mean_dist(gen), std::exp(logvar_dist(gen))};
    for (const Family& f : {Family::log_gamma(), Family::logit_beta(), Family::ghsst(nu_dist(gen), tau_dist(gen))}) {
      const auto back = gg::mean_var_links(f, gg::solve_gamma(f, mp));
      ASSERT_NEAR(back.mean, mp.mean, 1e-8) << f.name() << " mu=" << mp.mean << " var=" << mp.variance;
      ASSERT_NEAR(back.variance, mp.variance, 1e-8) << f.name() << " mu=" << mp.mean << " var=" << mp.variance;
    }
  }
}

TEST(SolveGamma, LogitBetaExtremeMoments) {
  for (double mu : {-25.0, -10.0, 0.0, 12.0, 30.0}) {
    for (double var : {1e-6, 1e-3, 3.0, 200.0, 1e4}) {
      const auto g = gg::solve_gamma(Family::logit_beta(), {mu, var});
      const auto back = gg::mean_var_links(Family::logit_beta(), g);
      EXPECT_NEAR(back.mean, mu, 1e-8 * std::max(1.0, std::abs(mu))) << mu << " " << var;
      EXPECT_NEAR(back.variance, var, 1e-8 * std::max(1.0, var)) << mu << " " << var;
    }
  }
}

TEST(SolveGamma, LogitBetaSolutionIsStartIndependent) {
  for (auto [mu, var] : std::vector<std::pair<double, double>>{{-0.8, 0.4}, {2.5, 1.3}, {0.0, 0.05}}) {
    const auto a = gg::detail::solve_beta_newton(mu, var, std::log(0.5), std::log(0.5));
    const auto b = gg::detail::solve_beta_newton(mu, var, std::log(40.0), std::log(3.0));
    const auto c = gg::detail::solve_beta_nested(mu, var);
    ASSERT_TRUE(a.ok);
    ASSERT_TRUE(b.ok);
    EXPECT_NEAR(a.a, b.a, 1e-6 * a.a);
    EXPECT_NEAR(a.b, b.b, 1e-6 * a.b);
    EXPECT_NEAR(a.a, c.a, 1e-6 * a.a);
    EXPECT_NEAR(a.b, c.b, 1e-6 * a.b);
  }
}

TEST(SolveGamma, MGarmaBaselines) {
  const auto lg = Family::log_gamma_mgarma(3.0);
  const auto g = gg::solve_gamma(lg, {0.7, 123.0});  // variance ignored
  EXPECT_EQ(g.first, 3.0);
  EXPECT_NEAR(gg::mean_var_links(lg, g).mean, 0.7, 1e-13);

  const auto lb = Family::logit_beta_mgarma(5.0);
  for (double mu : {-8.0, -0.3, 0.0, 1.1, 9.0}) {
    const auto gb = gg::solve_gamma(lb, {mu, 1.0});
    EXPECT_NEAR(gb.first + gb.second, 5.0, 1e-12);
    EXPECT_NEAR(gg::mean_var_links(lb, gb).mean, mu, 1e-9) << mu;
  }
}

TEST(LogDensity, Examples) {
  EXPECT_NEAR(gg::log_density(Family::log_gamma(), {1.0, 1.0}, 1.0), -1.0, 1e-15);
  EXPECT_NEAR(gg::log_density(Family::logit_beta(), {1.0, 1.0}, 0.7), 0.0, 1e-15);
  const double got = gg::log_density(Family::ghsst(6.0, -0.2), {0.0, 2.0}, 0.5);
  EXPECT_NEAR(std::exp(got), oracle::ghsst_density_direct(6.0, -0.2, 0.0, 2.0, 0.5), 1e-12);
}

TEST(LogDensity, GhsstMatchesDirectFormulaOnGrid) {
  for (double nu : {4.5, 7.0, 15.0}) {
    for (double tau : {-1.0, -0.05, 0.3}) {
      for (double y : {-6.0, -0.3, 0.0, 1.7, 9.0}) {
        const double want = oracle::ghsst_density_direct(nu, tau, 0.2, 1.3, y);
        EXPECT_NEAR(gg::log_density(Family::ghsst(nu, tau), {0.2, 1.3}, y), std::log(want), 1e-9)
            << nu << " " << tau << " " << y;
      }
    }
  }
}

TEST(LogDensity, GhsstSymmetricLimitIsStudentT) {
  for (double nu : {4.5, 6.0, 11.0}) {
    for (double y : {-20.0, -1.0, 0.0, 0.4, 3.0}) {
      const double want = oracle::scaled_t_density(nu, 0.5, 1.7, y);
      EXPECT_NEAR(gg::log_density(Family::ghsst(nu, 0.0), {0.5, 1.7}, y), std::log(want), 1e-9);
      // continuity into the Bessel branch
      EXPECT_NEAR(gg::log_density(Family::ghsst(nu, 1e-6), {0.5, 1.7}, y), std::log(want), 1e-4);
    }
  }
}

TEST(LogDensity, IntegratesToOne) {
  for (auto g : std::vector<TimeVaryingParam>{{0.3, 0.5}, {1.0, 1.0}, {4.0, 2.0}, {60.0, 0.1}}) {
    EXPECT_NEAR(integrate_density(Family::log_gamma(), g), 1.0, 1e-5) << g.first << " " << g.second;
  }
  for (auto g : std::vector<TimeVaryingParam>{{0.7, 0.9}, {1.0, 1.0}, {2.0, 3.0}, {30.0, 4.0}}) {
    EXPECT_NEAR(integrate_density(Family::logit_beta(), g), 1.0, 1e-5) << g.first << " " << g.second;
  }
  for (double nu : {4.3, 7.0, 20.0}) {
    for (double tau : {-1.2, -0.2, 0.0, 0.5}) {
      EXPECT_NEAR(integrate_density(Family::ghsst(nu, tau), {0.1, 1.5}), 1.0, 1e-5) << nu << " " << tau;
    }
  }
}

TEST(Score, MatchesFiniteDifferencesThroughTheSolver) {
  struct Case {
    Family f;
    MomentPair mp;
    double y;
  };
  const std::vector<Case> cases{
      {Family::log_gamma(), {0.2, 0.4}, 1.7},
      {Family::log_gamma(), {-1.0, 2.5}, 0.05},
      {Family::logit_beta(), {-0.4, 0.9}, 0.3},
      {Family::logit_beta(), {1.5, 0.2}, 0.85},
      {Family::ghsst(7.0, -0.2), {0.0, 1.0}, 0.6},
      {Family::ghsst(5.0, 0.8), {1.0, 3.0}, -2.0},
      {Family::ghsst(9.0, 0.0), {0.3, 0.7}, 1.1},
      {Family::log_gamma_mgarma(2.5), {0.3, 1.0}, 1.2},
      {Family::logit_beta_mgarma(6.0), {0.4, 1.0}, 0.55},
  };
  for (const auto& c : cases) {
    const auto s = gg::score(c.f, c.mp, c.y);
    auto ll = [&](double mu, double var) { return gg::log_density(c.f, gg::solve_gamma(c.f, {mu, var}), c.y); };
    EXPECT_NEAR(s.log_density, ll(c.mp.mean, c.mp.variance), 1e-11) << c.f.name();
    const double hm = 1e-6, hv = 1e-6 * c.mp.variance;
    const double fd_mu = (ll(c.mp.mean + hm, c.mp.variance) - ll(c.mp.mean - hm, c.mp.variance)) / (2 * hm);
    const double fd_var = (ll(c.mp.mean, c.mp.variance + hv) - ll(c.mp.mean, c.mp.variance - hv)) / (2 * hv);
    EXPECT_NEAR(s.d_mean, fd_mu, 1e-6 * std::max(1.0, std::abs(fd_mu))) << c.f.name();
    EXPECT_NEAR(s.d_variance, fd_var, 1e-6 * std::max(1.0, std::abs(fd_var))) << c.f.name();
  }
}

TEST(Cdf, EndpointsAndMonotonicity) {
  for (const Family& f : {Family::ghsst(6.0, -0.4), Family::ghsst(12.0, 0.0)}) {
    const TimeVaryingParam g{0.0, 1.5};
    double prev = 0.0;
    for (double y = -15.0; y <= 15.0; y += 0.5) {
      const double u = gg::cdf(f, g, y);
      EXPECT_GE(u, prev);
      prev = u;
    }
    EXPECT_LT(gg::cdf(f, g, -200.0), 1e-6);
    EXPECT_GT(gg::cdf(f, g, 200.0), 1.0 - 1e-6);
  }
  // symmetric case: F(xi) = 1/2
  EXPECT_NEAR(gg::cdf(Family::ghsst(8.0, 0.0), {0.3, 1.0}, 0.3), 0.5, 1e-9);
  EXPECT_NEAR(gg::cdf(Family::logit_beta(), {1.0, 1.0}, 0.37), 0.37, 1e-14);
  EXPECT_NEAR(gg::cdf(Family::log_gamma(), {1.0, 2.0}, 1.0), 1.0 - std::exp(-0.5), 1e-14);
}

TEST(Sample, MeansMatchParametrization) {
  constexpr std::size_t n = 1000000;
  {
    gg::Rng rng(1);
    const auto m = sample_moments([&] { return gg::sample(Family::log_gamma(), {5.0, 2.0}, rng); }, n);
    EXPECT_NEAR(m.mean, 2.0, 3.0 * std::sqrt(4.0 / 5.0 / n));
  }
  {
    gg::Rng rng(2);
    const auto m = sample_moments([&] { return gg::sample(Family::logit_beta(), {2.0, 3.0}, rng); }, n);
    EXPECT_NEAR(m.mean, 0.4, 3.0 * std::sqrt(0.04 / n));
  }
  {
    const auto f = Family::ghsst(7.0, -0.2);
    const auto g = gg::solve_gamma(f, {0.0, 1.0});
    gg::Rng rng(3);
    std::vector<double> xs(n);
    for (auto& x : xs) x = gg::sample(f, g, rng);
    double m = 0.0;
    for (double x : xs) m += x;
    m /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
      m2 += (x - m) * (x - m);
      m4 += std::pow(x - m, 4);
    }
    m2 /= n;
    m4 /= n;
    EXPECT_NEAR(m, 0.0, 3.0 * std::sqrt(1.0 / n));
    EXPECT_NEAR(m2, 1.0, 3.0 * std::sqrt((m4 - m2 * m2) / n));
  }
}

TEST(Sample, LinkedMomentsMatchMeanVarLinks) {
  constexpr std::size_t n = 1000000;
  struct Case {
    Family f;
    TimeVaryingParam g;
  };
  const std::vector<Case> cases{{Family::log_gamma(), {0.6, 3.0}},
                                {Family::logit_beta(), {0.8, 2.4}},
                                {Family::ghsst(9.0, 0.4), {-0.5, 1.2}}};
  std::uint64_t seed = 10;
  for (const auto& c : cases) {
    gg::Rng rng(seed++);
    const auto m = sample_moments([&] { return gg::y_link(c.f, gg::sample(c.f, c.g, rng)); }, n);
    const auto want = gg::mean_var_links(c.f, c.g);
    EXPECT_NEAR(m.mean, want.mean, 4.0 * std::sqrt(want.variance / n)) << c.f.name();
    // loose 4-sigma band using the normal-theory SE of a variance; heavier tails widen it
    EXPECT_NEAR(m.var, want.variance, 0.01 * want.variance) << c.f.name();
  }
}

TEST(Sample, DeterministicForSeed) {
  gg::Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(gg::sample(Family::ghsst(6.0, 0.3), {0.0, 1.0}, a), gg::sample(Family::ghsst(6.0, 0.3), {0.0, 1.0}, b));
  }
}

TEST(Sample, GhsstGoodnessOfFitSmall) {
  const auto f = Family::ghsst(7.0, -0.2);
  const auto r = gof::chi_square(f, gg::solve_gamma(f, {0.0, 1.0}), 100000, 20, 7);
  EXPECT_GT(r.p_value, 0.001) << "chi2=" << r.statistic;
}
