#include <gtest/gtest.h>

#include <cmath>

#include "ngl/bounds.hpp"

using namespace ngl;

namespace {

EnvelopeConstants sc(double mu, double L, double alpha, double delta, double f0, double R = 1.0) {
  EnvelopeConstants c;
  c.mu = mu;
  c.L = L;
  c.alpha = alpha;
  c.delta = delta;
  c.f0_gap = f0;
  c.R = R;
  return c;
}

}  // namespace

TEST(Envelope, GdPlNoiselessIsSevenEighthsPower) {
  const auto e = envelope(TheoremId::GD_PL, sc(1.0, 1.0, 0.0, 0.0, 1.0));
  for (int N : {0, 1, 2, 10, 100}) EXPECT_NEAR(e(N), std::pow(7.0 / 8.0, N), 1e-15);
  EXPECT_EQ(e.floor(), 0.0);
}

TEST(Envelope, GdPlFloor) {
  EXPECT_DOUBLE_EQ(envelope(TheoremId::GD_PL, sc(2.0, 10.0, 0.0, 0.3, 1.0)).floor(),
                   1.5 * 0.09 / 2.0);
  const auto e = envelope(TheoremId::GD_PL, sc(1.0, 100.0, 0.5, 0.1, 1.0));
  EXPECT_DOUBLE_EQ(e.floor(), 1.5 * (1.5 / 0.125) * 0.01);
  EXPECT_DOUBLE_EQ(e.rate(), 0.125 / 1.5 / 800.0);
}

TEST(Envelope, ReAgmAtOneThirdMatchesGdOrder) {
  const double mu = 0.01, L = 100.0, delta = 2.0;
  const auto e = envelope(TheoremId::REAGM, sc(mu, L, 1.0 / 3.0, delta, 1.0, 3.0));
  EXPECT_DOUBLE_EQ(gamma_star(mu, L, 1.0 / 3.0), 0.0);
  EXPECT_DOUBLE_EQ(e.rate(), mu / L / 300.0);
  EXPECT_DOUBLE_EQ(e.floor(), 7.0 * delta * delta / mu);
  EXPECT_DOUBLE_EQ(e.prefactor(), 1.0 + mu * 9.0 / 4.0);
}

TEST(Envelope, ReAgmNoiselessAcceleratedRate) {
  const auto e = envelope(TheoremId::REAGM, sc(1.0, 100.0, 0.0, 0.0, 1.0));
  EXPECT_DOUBLE_EQ(e.rate(), 0.1 / 300.0);
}

TEST(Envelope, HypothesisGuards) {
  EXPECT_THROW(envelope(TheoremId::REAGM, sc(1.0, 100.0, 0.34, 0.0, 1.0)), HypothesisViolation);
  EXPECT_THROW(envelope(TheoremId::GD_PL, sc(1.0, 100.0, 1.0, 0.0, 1.0)), HypothesisViolation);
  EXPECT_THROW(envelope(TheoremId::GD_PL, sc(0.0, 100.0, 0.0, 0.0, 1.0)), HypothesisViolation);
  EXPECT_THROW(envelope(TheoremId::GD_PL, sc(2.0, 1.0, 0.0, 0.0, 1.0)), HypothesisViolation);
  EXPECT_THROW(envelope(TheoremId::GD_PL, sc(1.0, 1.0, 0.0, -1.0, 1.0)), HypothesisViolation);
  try {
    envelope(TheoremId::REAGM, sc(1.0, 100.0, 0.5, 0.0, 1.0));
    FAIL();
  } catch (const HypothesisViolation& e) {
    EXPECT_NE(std::string(e.what()).find("alpha <= 1/3"), std::string::npos);
  }
  EXPECT_THROW(envelope(TheoremId::COMBINED_REG_STOP, sc(1, 1, 0, 0, 1)), InvalidInput);
}

TEST(Envelope, NamesRoundTrip) {
  for (auto id : {TheoremId::GD_PL, TheoremId::GD_MINGRAD, TheoremId::REAGM, TheoremId::GD_REG,
                  TheoremId::REAGM_REG, TheoremId::ADAPT_BOTH, TheoremId::ADAPT_ALPHA,
                  TheoremId::STOP_GENERIC, TheoremId::REAGM_STOP, TheoremId::COMBINED_REG_STOP}) {
    EXPECT_EQ(parse_theorem(to_string(id)), id);
  }
  EXPECT_THROW(parse_theorem("GD"), InvalidInput);
}

TEST(Envelope, LargeNDoesNotUnderflowPrematurely) {
  const Envelope e(TheoremId::GD_PL, Envelope::Shape::geometric, 1.0, 1e-12, 0.0);
  EXPECT_NEAR(e(1000000000000LL), std::exp(-1.0), 1e-12);
}

TEST(Envelope, StepsToReach) {
  const auto e = envelope(TheoremId::GD_PL, sc(1.0, 1.0, 0.0, 0.0, 1.0));
  const auto n = e.steps_to_reach(0.5);
  ASSERT_TRUE(n.has_value());
  // (7/8)^5 = 0.5129, (7/8)^6 = 0.4488.
  EXPECT_EQ(*n, 6);
  EXPECT_EQ(e.steps_to_reach(2.0), 0);
  const auto floored = envelope(TheoremId::GD_PL, sc(1.0, 1.0, 0.0, 1.0, 1.0));
  EXPECT_FALSE(floored.steps_to_reach(1.5).has_value());
  EXPECT_FALSE(floored.steps_to_reach(1.0).has_value());
}

TEST(GammaStar, Examples) {
  EXPECT_DOUBLE_EQ(gamma_star(1.0, 100.0, 1.0 / 3.0), 0.0);
  EXPECT_EQ(gamma_star(1.0, 1.0, 0.0), 0.5);
  EXPECT_EQ(gamma_star(0.01, 100.0, 0.0), 0.5);
}

TEST(GammaStar, IntermediateRates) {
  const double mu = 0.01, L = 100.0;
  for (double p : {0.5, 0.75, 1.0}) {
    const double a = std::pow(mu / (2.0 * L), p) / 3.0;
    EXPECT_NEAR(gamma_star(mu, L, a), std::min(p, 0.5), 1e-12) << p;
  }
  const double quarter = std::pow(mu / (2.0 * L), 0.25) / 3.0;
  EXPECT_NEAR(gamma_star(mu, L, quarter), 0.25, 1e-12);
}

TEST(IterationBudget, GdRegularizationFormula) {
  auto c = sc(0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
  EXPECT_EQ(iteration_budget(TheoremId::GD_REG, c, 0.5), 35);
  c.L = 100.0;
  c.R = 2.0;
  const double eps = 4.0;
  const double r = 400.0 / eps;
  EXPECT_EQ(iteration_budget(TheoremId::GD_REG, c, eps),
            static_cast<std::int64_t>(std::ceil(12.0 * r * std::log(2.0 * r))) + 1);
  c.alpha = 0.25;
  EXPECT_EQ(iteration_budget(TheoremId::GD_REG, c, eps),
            static_cast<std::int64_t>(
                std::ceil(12.0 * 1.5625 / std::pow(0.75, 6) * r * std::log(2.0 * r))) +
                1);
}

TEST(IterationBudget, ReAgmRegularizationFormula) {
  auto c = sc(0.0, 100.0, 1.0 / 3.0, 0.0, 0.0, 1.0);
  const double eps = 1.0;
  EXPECT_EQ(iteration_budget(TheoremId::REAGM_REG, c, eps),
            static_cast<std::int64_t>(std::ceil(150.0 * 1200.0 * std::log(400.0))) + 1);
  c.beta = 0.5;
  c.alpha = 0.0;
  EXPECT_EQ(iteration_budget(TheoremId::REAGM_REG, c, eps),
            static_cast<std::int64_t>(std::ceil(150.0 * std::sqrt(1200.0) * std::log(400.0))) + 1);
  c.alpha = 0.1;
  EXPECT_THROW(iteration_budget(TheoremId::REAGM_REG, c, eps), HypothesisViolation);
}

TEST(IterationBudget, RequiresEpsilonBelowLR2) {
  auto c = sc(0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
  EXPECT_THROW(iteration_budget(TheoremId::GD_REG, c, 1.0), HypothesisViolation);
  EXPECT_THROW(iteration_budget(TheoremId::REAGM_REG, c, 2.0), HypothesisViolation);
  EXPECT_NO_THROW(iteration_budget(TheoremId::GD_REG, c, 0.999));
}

TEST(IterationBudget, CombinedFormulaAndCap) {
  auto c = sc(0.0, 1.0, 1.0 / 9.0, 0.0, 0.0, 1.0);
  EXPECT_EQ(iteration_budget(TheoremId::COMBINED_REG_STOP, c, 1.0),
            static_cast<std::int64_t>(std::ceil(72000.0 * std::log(480.0))));
  EXPECT_DOUBLE_EQ(combined_alpha_cap(1.0, 1.0, 1.0, 0.5), std::sqrt(0.5) / 9.0);
  EXPECT_DOUBLE_EQ(combined_alpha_cap(1.0, 1.0, 1.0, 0.0), 1.0 / 9.0);
  c.alpha = 0.0;
  EXPECT_THROW(iteration_budget(TheoremId::COMBINED_REG_STOP, c, 1.0), HypothesisViolation);
}

TEST(IterationBudget, AlphaCaps) {
  EXPECT_DOUBLE_EQ(re_agm_regularization_alpha_cap(1.0, 1.0, 1.0 / 12.0, 0.5), 1.0 / 36.0);
  EXPECT_DOUBLE_EQ(re_agm_regularization_alpha_cap(5.0, 2.0, 3.0, 0.0), 1.0 / 3.0);
}

TEST(IterationBudget, EnvelopeInversion) {
  const auto c = sc(1.0, 1.0, 0.0, 0.0, 1.0);
  EXPECT_EQ(iteration_budget(TheoremId::GD_PL, c, 0.5), 6);
  const auto noisy = sc(1.0, 1.0, 0.0, 1.0, 1.0);
  EXPECT_THROW(iteration_budget(TheoremId::GD_PL, noisy, 1.0), HypothesisViolation);
}

TEST(StoppingLevel, Examples) {
  EXPECT_DOUBLE_EQ(stopping_level(1.0, 0.0, 1.0, 10.0), 122.0);
  EXPECT_EQ(stopping_level(1.0, 0.0, 0.0, 10.0), 0.0);
  // K = sqrt(L/mu) at (1, 100): ((10+1)^2+1) delta^2 / mu against (L/mu) delta^2 / mu.
  const double level = stopping_level(1.0, 0.0, 0.1, std::sqrt(100.0));
  EXPECT_NEAR(level / (100.0 * 0.01), 1.22, 1e-12);
  EXPECT_THROW(stopping_level(1.0, 0.5, 1.0, 2.0), InvalidInput);
  EXPECT_THROW(stopping_level(0.0, 0.0, 1.0, 10.0), InvalidInput);
}

TEST(RegularizationWeights, Formulas) {
  EXPECT_DOUBLE_EQ(gd_regularization_mu(0.0, 3.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(re_agm_regularization_mu(6.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(combined_regularization_mu(120.0, 2.0), 0.25);
}

// Property: every envelope is nonincreasing in N with a nonnegative floor.
TEST(EnvelopeProperties, Monotone) {
  std::vector<Envelope> all;
  for (double a : {0.0, 0.1, 1.0 / 3.0}) {
    for (double d : {0.0, 0.5}) {
      auto c = sc(0.01, 100.0, a, d, 10.0, 2.0);
      c.L0 = 12.5;
      c.K = 10.0;
      c.C0 = 5.0;
      c.beta = 0.25;
      all.push_back(envelope(TheoremId::GD_PL, c));
      all.push_back(envelope(TheoremId::GD_MINGRAD, c));
      all.push_back(envelope(TheoremId::REAGM, c));
      all.push_back(envelope(TheoremId::ADAPT_BOTH, c));
      all.push_back(envelope(TheoremId::ADAPT_ALPHA, c));
      all.push_back(envelope(TheoremId::STOP_GENERIC, c));
      if (6.0 * a <= 1.0) all.push_back(envelope(TheoremId::REAGM_STOP, c));
      if (a < 1.0 / 6.0) {
        c.mu = 1e-3;
        all.push_back(envelope(TheoremId::GD_REG, c));
        all.push_back(envelope(TheoremId::REAGM_REG, c));
      }
    }
  }
  for (const auto& e : all) {
    ASSERT_GE(e.floor(), 0.0) << to_string(e.id());
    const double scale = std::max(1.0, e(0));
    for (std::int64_t N = 0; N < 5000; N += 7) {
      ASSERT_LE(e(N + 1), e(N) + 1e-15 * scale) << to_string(e.id()) << " N=" << N;
    }
    for (std::int64_t N : {100000LL, 10000000LL, 1000000000LL}) {
      ASSERT_LE(e(N + 1), e(N) + 1e-15 * scale);
      ASSERT_GE(e(N), e.floor());
    }
  }
}

// Property: floors of the accelerated envelope grow as gamma* grows.
TEST(EnvelopeProperties, ReAgmFloorMonotoneInGamma) {
  const double mu = 0.01, L = 100.0;
  double prev_gamma = -1.0, prev_floor = 0.0;
  for (double a : {1.0 / 3.0, 0.1, 0.028, 0.0137, std::sqrt(mu / (2 * L)) / 3.0, 1e-4, 0.0}) {
    const auto e = envelope(TheoremId::REAGM, sc(mu, L, a, 100.0, 1.0));
    const double g = gamma_star(mu, L, a);
    if (prev_gamma >= 0.0) {
      ASSERT_GE(g, prev_gamma);
      ASSERT_GE(e.floor(), prev_floor);
    }
    prev_gamma = g;
    prev_floor = e.floor();
  }
}
