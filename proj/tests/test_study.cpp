// Monte Carlo properties of the estimators. Slow: 200 replications per cell.

#include <cmath>
#include <map>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "garmagarch/simulate.hpp"

namespace gg = garmagarch;
using gg::FamilyTag;
using gg::Method;
using gg::ParamVector;
using gg::Variant;

namespace {

gg::SimConfig base(FamilyTag tag) {
  if (tag == FamilyTag::log_gamma) return gg::preset("table1");
  if (tag == FamilyTag::logit_beta) return gg::preset("table2");
  gg::SimConfig c;
  c.spec = {FamilyTag::ghsst, Variant::garch, {1, 1, 1, 1}};
  c.theta = ParamVector{0.0, {0.5}, {0.1}, 0.1, {0.1}, {0.8}, {7.0, -0.2}};
  return c;
}

const gg::MonteCarloSummary& study(FamilyTag tag, std::size_t T) {
  static std::map<std::pair<FamilyTag, std::size_t>, gg::MonteCarloSummary> cache;
  const auto key = std::make_pair(tag, T);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto cfg = base(tag);
  cfg.T = T;
  cfg.n_reps = 200;
  cfg.seed = 9000 + T + 10 * static_cast<std::uint64_t>(tag);
  cfg.include_mgarma = false;
  // GMLE only where it yields the full vector on its own
  cfg.estimators = tag == FamilyTag::ghsst ? std::vector<Method>{Method::mle} : std::vector<Method>{Method::gmle, Method::mle};
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  return cache.emplace(key, gg::run_study(cfg)).first->second;
}

void expect_rmse_decreasing(FamilyTag tag) {
  const auto& a = study(tag, 100).cell("garma_garch", Method::mle);
  const auto& b = study(tag, 500).cell("garma_garch", Method::mle);
  const auto& c = study(tag, 2000).cell("garma_garch", Method::mle);
  for (std::size_t i = 0; i < a.names.size(); ++i) {
    EXPECT_GT(a.rmse[i], b.rmse[i]) << a.names[i] << " T=100 vs T=500";
    EXPECT_GT(b.rmse[i], c.rmse[i]) << a.names[i] << " T=500 vs T=2000";
  }
}

}  // namespace

TEST(StudyConsistency, LogGammaRmseShrinksWithT) { expect_rmse_decreasing(FamilyTag::log_gamma); }
TEST(StudyConsistency, LogitBetaRmseShrinksWithT) { expect_rmse_decreasing(FamilyTag::logit_beta); }
TEST(StudyConsistency, GhsstRmseShrinksWithT) { expect_rmse_decreasing(FamilyTag::ghsst); }

TEST(StudyProximity, GmleCloseToMleOnLogitBeta) {
  for (std::size_t T : {500u, 2000u}) {
    const auto& g = study(FamilyTag::logit_beta, T).cell("garma_garch", Method::gmle);
    const auto& m = study(FamilyTag::logit_beta, T).cell("garma_garch", Method::mle);
    for (std::size_t i = 0; i < m.names.size(); ++i) {
      const double mc_se = m.sd[i] / std::sqrt(static_cast<double>(m.used));
      EXPECT_LT(std::abs(g.mean[i] - m.mean[i]), 2.0 * mc_se) << m.names[i] << " T=" << T;
    }
  }
}

TEST(StudyConstraints, EveryEstimateRespectsTheParameterSpace) {
  for (FamilyTag tag : {FamilyTag::log_gamma, FamilyTag::logit_beta, FamilyTag::ghsst}) {
    const auto& cell = study(tag, 500).cell("garma_garch", Method::mle);
    const auto w = *cell.index_of("omega"), a = *cell.index_of("alpha1"), b = *cell.index_of("beta1");
    for (const auto& est : cell.estimates) {
      if (est.empty()) continue;
      EXPECT_GT(est[w], 0.0);
      EXPECT_GE(est[a], 0.0);
      EXPECT_GE(est[b], 0.0);
      if (tag == FamilyTag::ghsst) EXPECT_GT(est[*cell.index_of("nu")], 4.0);
    }
  }
}
