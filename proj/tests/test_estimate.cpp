#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "garmagarch/estimate.hpp"
#include "garmagarch/simulate.hpp"

namespace gg = garmagarch;
using gg::FamilyTag;
using gg::ModelSpec;
using gg::ParamVector;
using gg::Variant;

namespace {

ParamVector table1_truth() { return {0.0, {0.95}, {-0.65}, 0.02, {0.06}, {0.90}, {}}; }
ParamVector table2_truth() { return {-0.10, {0.90}, {-0.50}, 0.01, {0.45}, {0.45}, {}}; }
ModelSpec garch11(FamilyTag f) { return {f, Variant::garch, {1, 1, 1, 1}}; }

gg::PreparedSeries simulated(const ModelSpec& spec, const ParamVector& theta, std::size_t T, std::uint64_t seed) {
  gg::Rng rng(seed);
  return gg::PreparedSeries::from(spec.family, gg::simulate_path(spec, theta, T, 500, rng).y);
}

void expect_constraints(const ModelSpec& spec, const ParamVector& th) {
  if (spec.has_variance_recursion()) {
    EXPECT_GT(th.omega, 0.0);
    for (double a : th.alpha) EXPECT_GE(a, 0.0);
    for (double b : th.beta) EXPECT_GE(b, 0.0);
  }
  if (spec.family == FamilyTag::ghsst && spec.variant == Variant::garch) EXPECT_GT(th.invariant.at(0), 4.0);
}

}  // namespace

TEST(Bfgs, Rosenbrock) {
  auto f = [](const std::vector<double>& x) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    return gg::ValueGrad{a * a + 100.0 * b * b, {-2.0 * a - 400.0 * x[0] * b, 200.0 * b}};
  };
  gg::OptimOptions opt;
  opt.rel_tol = 0.0;
  opt.grad_tol = 1e-9;
  const auto r = gg::bfgs_minimize(f, {-1.2, 1.0}, opt);
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.x[0], 1.0, 1e-7);
  EXPECT_NEAR(r.x[1], 1.0, 1e-7);
}

TEST(Bfgs, NonFiniteRegionActsAsBarrier) {
  // f = x - log x, minimum at 1; NaN for x <= 0
  auto f = [](const std::vector<double>& x) {
    return gg::ValueGrad{x[0] - std::log(x[0]), {1.0 - 1.0 / x[0]}};
  };
  const auto r = gg::bfgs_minimize(f, {8.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
}

TEST(InformationSe, QuadraticToy) {
  // l(theta) = -T theta^2 / 2  =>  se = 1/sqrt(T)
  for (double T : {10.0, 400.0, 2000.0}) {
    auto grad = [T](const std::vector<double>& x) { return std::vector<double>{-T * x[0]}; };
    auto [H, asym] = gg::hessian_from_gradient(grad, {0.3}, {-INFINITY});
    const auto se = gg::se_from_hessian(H, 1, asym);
    ASSERT_TRUE(se.available);
    EXPECT_NEAR(se.se[0], 1.0 / std::sqrt(T), 1e-9);
  }
}

TEST(InformationSe, NotPositiveDefiniteIsFlagged) {
  auto grad = [](const std::vector<double>& x) { return std::vector<double>{x[0], -x[1]}; };
  auto [H, asym] = gg::hessian_from_gradient(grad, {0.0, 0.0}, {-INFINITY, -INFINITY});
  const auto se = gg::se_from_hessian(H, 2, asym);
  EXPECT_FALSE(se.available);
  EXPECT_FALSE(se.diagnostic.empty());
}

TEST(InformationSe, HessianSymmetricAtTruth) {
  const auto spec = garch11(FamilyTag::log_gamma);
  const auto data = simulated(spec, table1_truth(), 1000, 2);
  const auto se = gg::information_se(spec, table1_truth(), data);
  ASSERT_TRUE(se.available) << se.diagnostic;
  EXPECT_LT(se.asymmetry, 1e-6);
  for (double s : se.se) EXPECT_GT(s, 0.0);
}

TEST(Gmle, MinimizesCriterionAndFeedsMle) {
  const auto spec = garch11(FamilyTag::logit_beta);
  const auto data = simulated(spec, table2_truth(), 1000, 31);
  const auto g = gg::fit_gmle(spec, data);
  ASSERT_TRUE(g.converged) << g.message;
  ASSERT_TRUE(g.gmle_q);
  EXPECT_LE(*g.gmle_q, gg::gaussian_criterion(spec, table2_truth(), data).value + 1e-12);
  expect_constraints(spec, g.theta);
  ASSERT_TRUE(g.loglik);  // no invariant parameters, so the true likelihood is available

  const auto m = gg::fit_mle(spec, data);
  ASSERT_TRUE(m.converged) << m.message;
  EXPECT_GE(*m.loglik, *g.loglik - 1e-9);
  EXPECT_GE(*m.loglik, gg::loglik(spec, table2_truth(), data) - 1e-9);
  expect_constraints(spec, m.theta);
  ASSERT_TRUE(m.se.available) << m.se.diagnostic;
  EXPECT_EQ(m.se.se.size(), spec.parameter_count());
}

TEST(Mle, AscentFromTruthAndReasonableEstimates) {
  const auto spec = garch11(FamilyTag::log_gamma);
  const auto data = simulated(spec, table1_truth(), 2000, 77);
  const auto m = gg::fit_mle(spec, data);
  ASSERT_TRUE(m.converged) << m.message;
  EXPECT_GE(*m.loglik, gg::loglik(spec, table1_truth(), data));
  const auto est = m.theta.flatten(spec);
  const auto truth = table1_truth().flatten(spec);
  for (std::size_t i = 0; i < est.size(); ++i) {
    EXPECT_NEAR(est[i], truth[i], 4.0 * m.se.se[i]) << m.names[i];
  }
  const auto [aic, bic] = gg::information_criteria(*m.loglik, 6, 2000);
  EXPECT_DOUBLE_EQ(*m.aic, aic);
  EXPECT_DOUBLE_EQ(*m.bic, bic);
  EXPECT_NEAR(aic, (-2.0 * *m.loglik + 12.0) / 2000.0, 1e-15);
}

TEST(Mle, DeterministicBitwise) {
  const auto spec = garch11(FamilyTag::log_gamma);
  const auto data = simulated(spec, table1_truth(), 500, 5);
  const auto a = gg::fit_mle(spec, data);
  const auto b = gg::fit_mle(spec, data);
  EXPECT_EQ(a.theta.flatten(spec), b.theta.flatten(spec));
  EXPECT_EQ(*a.loglik, *b.loglik);
}

TEST(Mle, GhsstFitRecoversInvariantParameters) {
  const auto spec = garch11(FamilyTag::ghsst);
  const ParamVector truth{0.05, {0.6}, {0.2}, 0.1, {0.1}, {0.8}, {7.0, -0.2}};
  const auto data = simulated(spec, truth, 2000, 44);
  gg::FitConfig cfg;
  cfg.starts = 1;
  const auto m = gg::fit_mle(spec, data, cfg);
  ASSERT_TRUE(m.converged) << m.message;
  expect_constraints(spec, m.theta);
  ASSERT_TRUE(m.se.available) << m.se.diagnostic;
  const auto est = m.theta.flatten(spec);
  const auto tr = truth.flatten(spec);
  for (std::size_t i = 0; i < est.size(); ++i) EXPECT_NEAR(est[i], tr[i], 4.0 * m.se.se[i]) << m.names[i];
  EXPECT_GE(*m.loglik, gg::loglik(spec, truth, data));
}

TEST(PseudoMl, EmptyForFamiliesWithoutInvariants) {
  const auto spec = garch11(FamilyTag::log_gamma);
  const auto data = simulated(spec, table1_truth(), 200, 1);
  EXPECT_TRUE(gg::fit_pseudo_ml_phi(spec, table1_truth(), data).empty());
}

TEST(PseudoMl, GhsstAtTrueRecursion) {
  const auto spec = garch11(FamilyTag::ghsst);
  const ParamVector truth{0.0, {0.5}, {0.1}, 0.1, {0.1}, {0.8}, {7.0, -0.2}};
  const auto data = simulated(spec, truth, 2000, 8);
  const auto phi = gg::fit_pseudo_ml_phi(spec, truth, data);
  ASSERT_EQ(phi.size(), 2u);
  EXPECT_NEAR(phi[0], 7.0, 2.5);
  EXPECT_NEAR(phi[1], -0.2, 0.15);
}

TEST(PseudoMl, MGarmaShapeRecovered) {
  const ModelSpec spec{FamilyTag::log_gamma, Variant::m_garma, {1, 1, 0, 0}};
  const ParamVector truth{0.1, {0.8}, {-0.3}, 1.0, {}, {}, {2.5}};
  const auto data = simulated(spec, truth, 2000, 3);
  const auto g = gg::fit_gmle(spec, data, {}, gg::Method::gmle_pseudo);
  ASSERT_TRUE(g.converged);
  ASSERT_EQ(g.theta.invariant.size(), 1u);
  EXPECT_NEAR(g.theta.invariant[0], 2.5, 0.25);
  const auto m = gg::fit_mle(spec, data);
  ASSERT_TRUE(m.converged);
  EXPECT_NEAR(m.theta.invariant[0], 2.5, 0.25);
  EXPECT_NEAR(m.theta.ar[0], 0.8, 0.05);
}

TEST(Fit, TooShortSeriesRejected) {
  const auto spec = garch11(FamilyTag::log_gamma);
  const auto data = gg::PreparedSeries::from(FamilyTag::log_gamma, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_THROW(gg::fit_mle(spec, data), gg::DataError);
}
