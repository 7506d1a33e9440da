#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "delayq/dde.hpp"
#include "delayq/models.hpp"
#include "oracles.hpp"

using namespace delayq;

namespace {

// x' = 3t^2 - 1, x(0) = 0: exact solution t^3 - t.
struct CubicSystem {
  static constexpr std::size_t dimension = 1;
  double lag() const { return 0.0; }
  State<1> operator()(double t, const State<1>&, const State<1>&) const { return {3.0 * t * t - 1.0}; }
};

// x' = -x(t - 1), constant history 1: on [0, 1] x = 1 - t, on [1, 2]
// x = 1 - t + (t - 1)^2 / 2.
struct PureDelaySystem {
  static constexpr std::size_t dimension = 1;
  double lag() const { return 1.0; }
  State<1> operator()(double, const State<1>&, const State<1>& lagged) const { return {-lagged[0]}; }
};

struct BlowUp {
  static constexpr std::size_t dimension = 1;
  double lag() const { return 0.0; }
  State<1> operator()(double, const State<1>& x, const State<1>&) const { return {x[0] * x[0]}; }
};

double symmetric_error(double step) {
  const ModelParams p{10.0, 1.0, 0.4};
  const double c = 8.0;
  const auto traj = integrate(ConstantDelaySystem{p}, History<2>::constant(0.4, {c, c}),
                              IntegrationConfig{step, 5.0, true});
  double err = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double exact = oracle::relaxation(p.lambda / 2.0, p.mu, c, traj.time(k));
    err = std::max(err, std::abs(traj.state(k)[0] - exact));
  }
  return err;
}

}  // namespace

TEST(History, ConstantAndSampledEvaluation) {
  const auto h = History<2>::constant(0.5, {1.0, 2.0});
  EXPECT_EQ(h(-0.5), (State<2>{1.0, 2.0}));
  EXPECT_EQ(h(0.0), (State<2>{1.0, 2.0}));
  EXPECT_THROW(h(-0.6), OutOfRangeError);
  EXPECT_THROW(h(0.1), OutOfRangeError);

  const auto s = History<1>::sampled({-1.0, -0.5, 0.0}, {{0.0}, {1.0}, {3.0}});
  EXPECT_DOUBLE_EQ(s.delta(), 1.0);
  EXPECT_DOUBLE_EQ(s(-0.75)[0], 0.5);
  EXPECT_DOUBLE_EQ(s(-0.25)[0], 2.0);
  EXPECT_EQ(s(0.0)[0], 3.0);
}

TEST(History, RejectsMalformedTables) {
  EXPECT_THROW(History<1>::sampled({-1.0, -1.0, 0.0}, {{0.0}, {1.0}, {2.0}}), PreconditionError);
  EXPECT_THROW(History<1>::sampled({-1.0, -0.2}, {{0.0}, {1.0}}), PreconditionError);
  EXPECT_THROW(History<1>::sampled({-1.0, 0.0}, {{0.0}}), PreconditionError);
  EXPECT_THROW(History<1>::constant(-1.0, {0.0}), PreconditionError);
  EXPECT_THROW(History<1>::constant(1.0, {NAN}), PreconditionError);
}

TEST(EffectiveStep, AlignsToLag) {
  EXPECT_DOUBLE_EQ(effective_step({0.03, 1.0, true}, 0.1), 0.1 / 4.0);
  EXPECT_DOUBLE_EQ(effective_step({0.02, 1.0, true}, 0.4), 0.02);
  EXPECT_DOUBLE_EQ(effective_step({0.03, 1.0, false}, 0.1), 0.03);
  EXPECT_DOUBLE_EQ(effective_step({0.03, 1.0, true}, 0.0), 0.03);
  for (double lag : {0.34, 0.4, 0.0336, 2.0, 6.5}) {
    const double h = effective_step({0.01, 1.0, true}, lag);
    EXPECT_LE(h, 0.01);
    EXPECT_NEAR(lag / h, std::round(lag / h), 1e-9);
  }
}

TEST(Integrate, NodeCountAndDerivativeInvariant) {
  const ModelParams p{10.0, 1.0, 0.4};
  const ConstantDelaySystem sys{p};
  const auto traj = integrate(sys, default_history(p), {0.03, 7.0, true});
  const double h = traj.step();
  EXPECT_EQ(traj.size(), static_cast<std::size_t>(std::floor(7.0 / h + 1e-9)) + 1);
  for (std::size_t k = 0; k < traj.size(); k += 17) {
    const auto lagged = traj.dense_eval(traj.time(k) - p.delta);
    EXPECT_EQ(traj.derivative(k), sys(traj.time(k), traj.state(k), lagged));
  }
}

TEST(Integrate, FixedPointStaysPut) {
  const ModelParams p{10.0, 1.0, 0.4};
  const auto traj = simulate_constant(p, History<2>::constant(0.4, {5.0, 5.0}), 30.0);
  for (const auto& x : traj.states()) {
    EXPECT_EQ(x[0], 5.0);
    EXPECT_EQ(x[1], 5.0);
  }
}

TEST(Integrate, SymmetricHistoryMatchesScalarSolution) {
  for (double delta : {0.0, 0.1, 0.4, 2.0}) {
    for (double c : {0.0, 3.0, 12.0}) {
      const ModelParams p{10.0, 1.0, delta};
      const auto traj = simulate_constant(p, History<2>::constant(delta, {c, c}), 20.0);
      for (std::size_t k = 0; k < traj.size(); ++k) {
        const double exact = oracle::relaxation(5.0, 1.0, c, traj.time(k));
        ASSERT_NEAR(traj.state(k)[0], exact, 1e-6);
        ASSERT_NEAR(traj.state(k)[1], exact, 1e-6);
      }
    }
  }
}

TEST(Integrate, FourthOrderConvergence) {
  const double e1 = symmetric_error(0.1);
  const double e2 = symmetric_error(0.05);
  const double e3 = symmetric_error(0.025);
  EXPECT_NEAR(e1 / e2, 16.0, 2.5);
  EXPECT_NEAR(e2 / e3, 16.0, 2.5);
}

TEST(Integrate, PureDelayMethodOfSteps) {
  const auto traj = integrate(PureDelaySystem{}, History<1>::constant(1.0, {1.0}), {0.05, 2.0, true});
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.time(k);
    const double exact = t <= 1.0 ? 1.0 - t : 1.0 - t + 0.5 * (t - 1.0) * (t - 1.0);
    EXPECT_NEAR(traj.state(k)[0], exact, 1e-13);
  }
}

TEST(Integrate, UnalignedStepStillReadsComputedSegments) {
  const auto traj = integrate(PureDelaySystem{}, History<1>::constant(1.0, {1.0}), {0.07, 2.0, false});
  EXPECT_DOUBLE_EQ(traj.step(), 0.07);
  const double t = traj.front();
  // one step straddles the slope kink of x(t - 1) at t = 1, so only O(h^3)
  EXPECT_NEAR(traj.state(traj.size() - 1)[0], 1.0 - t + 0.5 * (t - 1.0) * (t - 1.0), 1e-3);
  EXPECT_THROW(integrate(PureDelaySystem{}, History<1>::constant(1.0, {1.0}), {1.5, 3.0, false}),
               PreconditionError);
}

TEST(Integrate, DeterministicReruns) {
  const ModelParams p{10.0, 1.0, 0.4};
  const auto a = simulate_constant(p, default_history(p), 40.0);
  const auto b = simulate_constant(p, default_history(p), 40.0);
  EXPECT_EQ(a.states(), b.states());
}

TEST(Integrate, Errors) {
  const ModelParams p{10.0, 1.0, 0.4};
  EXPECT_THROW(integrate(ConstantDelaySystem{p}, History<2>::constant(0.5, {1.0, 1.0}), {0.01, 1.0, true}),
               PreconditionError);
  EXPECT_THROW(integrate(ConstantDelaySystem{p}, History<2>::constant(0.4, {1.0, 1.0}), {0.0, 1.0, true}),
               PreconditionError);
  EXPECT_THROW(integrate(ConstantDelaySystem{p}, History<2>::constant(0.4, {1.0, 1.0}), {0.01, -1.0, true}),
               PreconditionError);
  try {
    integrate(BlowUp{}, History<1>::constant(0.0, {1.0}), {0.01, 5.0, true});
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_GT(e.time(), 0.9);
    EXPECT_LT(e.time(), 5.0);
  }
}

TEST(DenseEval, NodeIdentityAndRange) {
  const ModelParams p{10.0, 1.0, 0.4};
  const auto traj = simulate_constant(p, default_history(p), 10.0);
  for (std::size_t k = 0; k < traj.size(); k += 13) EXPECT_EQ(traj.dense_eval(traj.time(k)), traj.state(k));
  EXPECT_EQ(traj.dense_eval(-0.4), traj.history()(-0.4));
  EXPECT_EQ(traj.dense_eval(-1e-300), traj.dense_eval(0.0));
  EXPECT_THROW(traj.dense_eval(10.5), OutOfRangeError);
  EXPECT_THROW(traj.dense_eval(-0.5), OutOfRangeError);
}

TEST(DenseEval, ConstantSolutionIsExactEverywhere) {
  const ModelParams p{10.0, 1.0, 0.4};
  const auto traj = simulate_constant(p, History<2>::constant(0.4, {5.0, 5.0}), 3.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.4, 3.0);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(traj.dense_eval(u(rng)), (State<2>{5.0, 5.0}));
}

TEST(DenseEval, ReproducesCubic) {
  const auto traj = integrate(CubicSystem{}, History<1>::constant(0.0, {0.0}), {0.1, 2.0, true});
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, traj.front());
  for (int i = 0; i < 500; ++i) {
    const double t = u(rng);
    EXPECT_NEAR(traj.dense_eval(t)[0], t * t * t - t, 1e-12) << "t = " << t;
  }
}
