#pragma once

// Two-queue fluid models with Multinomial Logit routing driven either by
// delayed queue lengths or by their moving average over the delay window.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "delayq/dde.hpp"
#include "delayq/error.hpp"

namespace delayq {

struct ModelParams {
  double lambda = 1.0;  ///< total arrival rate
  double mu = 1.0;      ///< per-queue service rate
  double delta = 0.0;   ///< information delay

  void validate() const {
    if (!(std::isfinite(lambda) && lambda > 0.0))
      throw PreconditionError("params: lambda must be finite and > 0");
    if (!(std::isfinite(mu) && mu > 0.0))
      throw PreconditionError("params: mu must be finite and > 0");
    if (!(std::isfinite(delta) && delta >= 0.0))
      throw PreconditionError("params: delta must be finite and >= 0");
  }
};

using QueuePairState = State<2>;
using MAState = State<4>;  // q1, q2, m1, m2

enum class ModelKind { constant_delay, moving_average };

inline std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::constant_delay ? "constant" : "moving-average";
}

/// Logit choice probabilities with utility -value, shifted by the minimum so
/// that the larger exponential is exactly 1.
inline std::array<double, 2> mnl_weights(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw PreconditionError("mnl_weights: non-finite input");
  const double lo = std::min(a, b);
  const double ea = std::exp(-(a - lo));
  const double eb = std::exp(-(b - lo));
  const double sum = ea + eb;
  return {ea / sum, eb / sum};
}

inline QueuePairState constant_delay_rhs(double /*t*/, const QueuePairState& state,
                                         const QueuePairState& lagged, const ModelParams& p) {
  const auto w = mnl_weights(lagged[0], lagged[1]);
  return {p.lambda * w[0] - p.mu * state[0], p.lambda * w[1] - p.mu * state[1]};
}

/// Queues are routed on the averages m; each average follows
/// m' = (q(t) - q(t - delta)) / delta.
inline MAState ma_rhs(double /*t*/, const MAState& state, const MAState& lagged,
                      const ModelParams& p) {
  if (!(p.delta > 0.0))
    throw PreconditionError("ma_rhs: delta must be > 0 (use the constant-delay model for delta = 0)");
  const auto w = mnl_weights(state[2], state[3]);
  return {p.lambda * w[0] - p.mu * state[0], p.lambda * w[1] - p.mu * state[1],
          (state[0] - lagged[0]) / p.delta, (state[1] - lagged[1]) / p.delta};
}

/// Symmetric equilibrium lambda / (2 mu), shared by both models.
inline double equilibrium(const ModelParams& p) { return p.lambda / (2.0 * p.mu); }

struct ConstantDelaySystem {
  static constexpr std::size_t dimension = 2;
  ModelParams params;

  double lag() const noexcept { return params.delta; }
  State<2> operator()(double t, const State<2>& x, const State<2>& lagged) const {
    return constant_delay_rhs(t, x, lagged, params);
  }
};

struct MovingAverageSystem {
  static constexpr std::size_t dimension = 4;
  ModelParams params;

  double lag() const noexcept { return params.delta; }
  State<4> operator()(double t, const State<4>& x, const State<4>& lagged) const {
    return ma_rhs(t, x, lagged, params);
  }
};

/// min(delta/20, 1/(10 mu), 0.01); the delta term is dropped when delta = 0.
inline double default_step(const ModelParams& p) {
  double h = std::min(1.0 / (10.0 * p.mu), 0.01);
  if (p.delta > 0.0) h = std::min(h, p.delta / 20.0);
  return h;
}

/// Constant histories at 1.1 q* and 0.9 q*.
inline History<2> default_history(const ModelParams& p) {
  const double q = equilibrium(p);
  return History<2>::constant(p.delta, {1.1 * q, 0.9 * q});
}

/// Window average of each queue history over [-delta, 0] by the trapezoid
/// rule on the sample table (exact for the piecewise-linear history).
inline std::array<double, 2> initial_averages(const History<2>& queues) {
  if (queues.is_constant() || queues.delta() == 0.0) return queues(0.0);
  const auto& ts = queues.times();
  const auto& vs = queues.samples();
  std::array<double, 2> acc{0.0, 0.0};
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double dt = ts[k + 1] - ts[k];
    for (std::size_t i = 0; i < 2; ++i) acc[i] += 0.5 * dt * (vs[k][i] + vs[k + 1][i]);
  }
  return {acc[0] / queues.delta(), acc[1] / queues.delta()};
}

/// Lifts a queue history to the 4-D moving-average state; the average
/// components hold m(0) throughout (only their value at t = 0 is ever read).
inline History<4> ma_history(const History<2>& queues) {
  const auto m0 = initial_averages(queues);
  if (queues.is_constant()) {
    const auto q = queues(0.0);
    return History<4>::constant(queues.delta(), {q[0], q[1], m0[0], m0[1]});
  }
  std::vector<State<4>> rows;
  rows.reserve(queues.samples().size());
  for (const auto& q : queues.samples()) rows.push_back({q[0], q[1], m0[0], m0[1]});
  return History<4>::sampled(queues.times(), std::move(rows));
}

inline Trajectory<2> simulate_constant(const ModelParams& p, const History<2>& history,
                                       double horizon, std::optional<double> step = {}) {
  p.validate();
  IntegrationConfig cfg{step.value_or(default_step(p)), horizon, true};
  return integrate(ConstantDelaySystem{p}, history, cfg);
}

inline Trajectory<4> simulate_ma(const ModelParams& p, const History<2>& history, double horizon,
                                 std::optional<double> step = {}) {
  p.validate();
  if (!(p.delta > 0.0)) throw PreconditionError("moving-average model requires delta > 0");
  IntegrationConfig cfg{step.value_or(default_step(p)), horizon, true};
  return integrate(MovingAverageSystem{p}, ma_history(history), cfg);
}

/// (1/delta) * integral of q_i over [t - delta, t], composite trapezoid on
/// dense-output samples spaced at most one integration step apart.
template <std::size_t N>
std::array<double, 2> ma_from_trajectory(const Trajectory<N>& traj, double t, double delta) {
  static_assert(N >= 2);
  if (!(std::isfinite(delta) && delta > 0.0))
    throw PreconditionError("ma_from_trajectory: delta must be > 0");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(delta / traj.step() - 1e-9)));
  const double ds = delta / static_cast<double>(n);
  const double start = t - delta;
  std::array<double, 2> acc{0.0, 0.0};
  for (std::size_t k = 0; k <= n; ++k) {
    const double s = (k == n) ? t : start + static_cast<double>(k) * ds;
    const auto x = traj.dense_eval(s);
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    acc[0] += w * x[0];
    acc[1] += w * x[1];
  }
  return {acc[0] * ds / delta, acc[1] * ds / delta};
}

}  // namespace delayq
