#include <gtest/gtest.h>

#include <cmath>

#include "delayq/analysis.hpp"

using namespace delayq;

namespace {

StabilityVerdict constant_verdict(double lambda, double mu, double delta, double horizon) {
  SimConfig sim;
  sim.horizon = horizon;
  return simulate_verdict(ModelKind::constant_delay, {lambda, mu, delta}, sim);
}

}  // namespace

TEST(Classify, EquilibriumIsSynchronized) {
  const ModelParams p{10.0, 1.0, 0.4};
  const auto traj = simulate_constant(p, History<2>::constant(0.4, {5.0, 5.0}), 50.0);
  const auto v = classify_stability(traj, default_classifier(5.0));
  EXPECT_EQ(v.regime, Regime::synchronized);
  EXPECT_EQ(v.amplitude, 0.0);
  EXPECT_FALSE(v.growing);
  EXPECT_NEAR(v.burn_in, 25.0, 0.011);
  EXPECT_NEAR(v.horizon, 50.0, 1e-9);
}

TEST(Classify, ConstantModelRegimesAroundThreshold) {
  EXPECT_EQ(constant_verdict(10.0, 1.0, 0.34, 200.0).regime, Regime::synchronized);
  const auto osc = constant_verdict(10.0, 1.0, 0.4, 200.0);
  EXPECT_EQ(osc.regime, Regime::oscillatory);
  EXPECT_GT(osc.amplitude, 0.5);
}

TEST(Classify, InconclusiveBand) {
  const ModelParams p{10.0, 1.0, 0.4};
  const auto traj = simulate_constant(p, default_history(p), 100.0);
  const auto v = classify_stability(traj, ClassifierConfig{0.5, 1e-3, 1e3});
  EXPECT_EQ(v.regime, Regime::inconclusive);
}

TEST(Classify, Preconditions) {
  const ModelParams p{10.0, 1.0, 0.4};
  const auto traj = simulate_constant(p, default_history(p), 0.05);
  EXPECT_THROW(classify_stability(traj, default_classifier(5.0)), PreconditionError);
  const auto longer = simulate_constant(p, default_history(p), 10.0);
  EXPECT_THROW(classify_stability(longer, ClassifierConfig{0.0, 1e-3, 1e-2}), PreconditionError);
  EXPECT_THROW(classify_stability(longer, ClassifierConfig{1.0, 1e-3, 1e-2}), PreconditionError);
  EXPECT_THROW(classify_stability(longer, ClassifierConfig{0.5, 1e-2, 1e-3}), PreconditionError);
}

TEST(Classify, GrowthIndicatorOnGrowingTransient) {
  // Unstable equilibrium started very close to it: oscillation still growing.
  const ModelParams p{10.0, 1.0, 0.5};
  const auto traj = simulate_constant(p, History<2>::constant(0.5, {5.0 + 1e-9, 5.0 - 1e-9}), 8.0);
  const auto v = classify_stability(traj, default_classifier(5.0));
  EXPECT_TRUE(v.growing);
  EXPECT_GT(v.late_amplitude, v.early_amplitude);
}

TEST(Classify, VerdictInvariantUnderSwappedHistories) {
  for (double delta : {0.3, 0.45}) {
    SimConfig a, b;
    b.phi1_factor = a.phi2_factor;
    b.phi2_factor = a.phi1_factor;
    const auto va = simulate_verdict(ModelKind::constant_delay, {10.0, 1.0, delta}, a);
    const auto vb = simulate_verdict(ModelKind::constant_delay, {10.0, 1.0, delta}, b);
    EXPECT_EQ(va.regime, vb.regime);
    EXPECT_EQ(va.amplitude, vb.amplitude);
  }
}

TEST(Classify, VerdictStableUnderHorizonDoubling) {
  for (double delta : {0.2, 0.3, 0.45, 0.8}) {
    const auto a = constant_verdict(10.0, 1.0, delta, 200.0);
    const auto b = constant_verdict(10.0, 1.0, delta, 400.0);
    EXPECT_EQ(a.regime, b.regime) << "delta = " << delta;
  }
}

TEST(Classify, InsensitiveToHistoryOffsets) {
  for (auto [f1, f2] : {std::pair{1.1, 0.9}, std::pair{1.3, 0.8}, std::pair{1.02, 1.0}}) {
    SimConfig sim;
    sim.horizon = 200.0;
    sim.phi1_factor = f1;
    sim.phi2_factor = f2;
    EXPECT_EQ(simulate_verdict(ModelKind::constant_delay, {10.0, 1.0, 0.3}, sim).regime, Regime::synchronized);
    EXPECT_EQ(simulate_verdict(ModelKind::constant_delay, {10.0, 1.0, 0.45}, sim).regime, Regime::oscillatory);
  }
}

TEST(Conservation, Examples) {
  const ModelParams eq{10.0, 1.0, 0.4};
  EXPECT_LT(conservation_check(simulate_constant(eq, History<2>::constant(0.4, {5.0, 5.0}), 20.0), eq), 1e-12);

  const ModelParams p{10.0, 1.0, 0.4};
  EXPECT_LT(conservation_check(simulate_constant(p, History<2>::constant(0.4, {5.5, 4.5}), 100.0), p), 1e-6);

  const ModelParams pm{10.0, 1.0, 4.0};
  EXPECT_LT(conservation_check(simulate_ma(pm, History<2>::constant(4.0, {6.0, 4.5}), 100.0), pm), 1e-6);
}

TEST(Predict, UsesFirstBranch) {
  EXPECT_EQ(predict(ModelKind::constant_delay, 10.0, 1.0, 0.3), Prediction::stable);
  EXPECT_EQ(predict(ModelKind::constant_delay, 10.0, 1.0, 0.4), Prediction::unstable);
  EXPECT_EQ(predict(ModelKind::constant_delay, 2.0, 1.0, 5.0), Prediction::not_applicable);
  EXPECT_EQ(predict(ModelKind::moving_average, 10.0, 1.0, 2.0), Prediction::stable);
  EXPECT_EQ(predict(ModelKind::moving_average, 10.0, 1.0, 4.0), Prediction::unstable);
}

TEST(Agreement, Rules) {
  EXPECT_TRUE(agrees(Prediction::not_applicable, std::nullopt, false));
  EXPECT_FALSE(agrees(Prediction::stable, std::nullopt, false));
  EXPECT_TRUE(agrees(Prediction::stable, Regime::synchronized, true));
  EXPECT_FALSE(agrees(Prediction::stable, Regime::oscillatory, false));
  EXPECT_TRUE(agrees(Prediction::unstable, Regime::inconclusive, true));
  EXPECT_FALSE(agrees(Prediction::unstable, Regime::inconclusive, false));
  EXPECT_TRUE(agrees(Prediction::stable, Regime::inconclusive, false));
}

TEST(Sweep, ConstantModelAgreesAcrossThreshold) {
  SimConfig sim;
  sim.horizon = 200.0;
  const std::vector<double> deltas{0.2, 0.3, 0.34, 0.4, 0.5, 1.0};
  const auto rows = sweep(ModelKind::constant_delay, 1.0, {10.0}, deltas, sim);
  ASSERT_EQ(rows.size(), deltas.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    EXPECT_EQ(r.delta, deltas[i]);
    ASSERT_TRUE(r.observed);
    EXPECT_EQ(*r.observed, r.delta < 0.3617 ? Regime::synchronized : Regime::oscillatory);
    EXPECT_TRUE(r.agree) << "delta = " << r.delta;
  }
}

TEST(Sweep, NoHopfBelowTwiceMu) {
  // At lambda = 2 mu the decay is slow for long delays.
  SimConfig sim;
  sim.horizon = 1600.0;
  const auto rows = sweep(ModelKind::constant_delay, 1.0, {1.0, 2.0}, {0.5, 2.0, 5.0}, sim);
  for (const auto& r : rows) {
    EXPECT_EQ(r.predicted, Prediction::not_applicable);
    ASSERT_TRUE(r.observed);
    EXPECT_EQ(*r.observed, Regime::synchronized) << r.lambda << ' ' << r.delta;
    EXPECT_TRUE(r.agree);
  }
}

TEST(Sweep, MovingAverageRows) {
  // Horizon long enough for the slowly decaying transient just below the
  // first threshold (about 2.145) to settle.
  SimConfig sim;
  sim.horizon = 2000.0;
  const auto rows = sweep(ModelKind::moving_average, 1.0, {10.0}, {1.0, 2.0, 3.0, 4.0, 6.0}, sim);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(*rows[0].observed, Regime::synchronized);
  EXPECT_EQ(*rows[1].observed, Regime::synchronized);
  EXPECT_EQ(*rows[3].observed, Regime::oscillatory);
  EXPECT_EQ(*rows[4].observed, Regime::oscillatory);
  EXPECT_TRUE(rows[0].agree && rows[1].agree && rows[3].agree);
}

TEST(Sweep, FailuresAreRecordedPerRow) {
  SimConfig sim;
  sim.horizon = 50.0;
  const auto rows = sweep(ModelKind::moving_average, 1.0, {10.0}, {0.0, 1.0}, sim);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].observed);
  EXPECT_FALSE(rows[0].error.empty());
  EXPECT_TRUE(rows[1].observed);
  EXPECT_THROW(sweep(ModelKind::constant_delay, 1.0, {}, {0.1}, sim), PreconditionError);
}

TEST(VerdictFlip, NearAnalyticThreshold) {
  SimConfig sim;
  sim.horizon = 200.0;
  for (auto [lambda, mu] : {std::pair{10.0, 1.0}, std::pair{100.0, 5.0}, std::pair{20.0, 2.0}}) {
    const double dcr = critical_delay_constant(lambda, mu)->delta_cr;
    const double flip = find_verdict_flip(ModelKind::constant_delay, lambda, mu, 0.5 * dcr, 1.5 * dcr, sim);
    EXPECT_NEAR(flip / dcr, 1.0, 0.05) << lambda << ' ' << mu;
  }
}
