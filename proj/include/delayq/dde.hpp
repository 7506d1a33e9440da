#pragma once

// Fixed-lag delay differential equation integration: classical RK4 with the
// method of steps and cubic Hermite dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "delayq/error.hpp"

namespace delayq {

template <std::size_t N>
using State = std::array<double, N>;

namespace detail {

template <std::size_t N>
bool all_finite(const State<N>& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// a + c * b, componentwise
template <std::size_t N>
State<N> axpy(const State<N>& a, double c, const State<N>& b) {
  State<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = a[i] + c * b[i];
  return out;
}

// Slack for comparing times that should coincide up to rounding.
inline double time_slack(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

}  // namespace detail

/// Initial function on [-delta, 0]: either one constant per component or a
/// sampled table evaluated by linear interpolation.
template <std::size_t N>
class History {
 public:
  static History constant(double delta, const State<N>& values) {
    if (!std::isfinite(delta) || delta < 0.0)
      throw PreconditionError("history: delta must be finite and >= 0");
    if (!detail::all_finite(values)) throw PreconditionError("history: non-finite value");
    History h;
    h.delta_ = delta;
    h.times_ = {-delta, 0.0};
    h.values_ = {values, values};
    h.constant_ = true;
    return h;
  }

  /// `times` must be strictly increasing, start at -delta and end at 0.
  static History sampled(std::vector<double> times, std::vector<State<N>> values) {
    if (times.size() < 2 || times.size() != values.size())
      throw PreconditionError("history: need >= 2 samples with matching value rows");
    if (times.back() != 0.0) throw PreconditionError("history: last sample time must be 0");
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      if (!(times[i] < times[i + 1]))
        throw PreconditionError("history: sample times must be strictly increasing");
    }
    for (const auto& v : values) {
      if (!detail::all_finite(v)) throw PreconditionError("history: non-finite value");
    }
    if (!std::isfinite(times.front())) throw PreconditionError("history: non-finite time");
    History h;
    h.delta_ = -times.front();
    h.times_ = std::move(times);
    h.values_ = std::move(values);
    h.constant_ = false;
    return h;
  }

  double delta() const noexcept { return delta_; }
  bool is_constant() const noexcept { return constant_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<State<N>>& samples() const noexcept { return values_; }

  State<N> operator()(double t) const {
    const double slack = detail::time_slack(delta_);
    if (!(t >= -delta_ - slack && t <= slack))
      throw OutOfRangeError("history: t = " + std::to_string(t) + " outside [-delta, 0]");
    if (constant_) return values_.front();
    t = std::clamp(t, -delta_, 0.0);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.end()) return values_.back();
    const auto hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    State<N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = values_[lo][i] + w * (values_[hi][i] - values_[lo][i]);
    return out;
  }

 private:
  History() = default;

  double delta_ = 0.0;
  std::vector<double> times_;
  std::vector<State<N>> values_;
  bool constant_ = true;
};

/// A system x'(t) = f(t, x(t), x(t - lag)) of fixed dimension.
template <class S>
concept DdeSystem = requires(const S& s, double t, const State<S::dimension>& x) {
  { S::dimension } -> std::convertible_to<std::size_t>;
  { s.lag() } -> std::convertible_to<double>;
  { s(t, x, x) } -> std::same_as<State<S::dimension>>;
};

struct IntegrationConfig {
  double step = 0.01;
  double horizon = 1.0;
  bool align_lag = true;
};

/// Step actually used: with lag alignment, the largest h' <= h with lag/h' integral.
inline double effective_step(const IntegrationConfig& config, double lag) {
  if (!(std::isfinite(config.step) && config.step > 0.0))
    throw PreconditionError("integration: step must be finite and > 0");
  if (!config.align_lag || lag == 0.0) return config.step;
  const double n = std::ceil(lag / config.step - 1e-9);
  return lag / std::max(1.0, n);
}

/// Uniform-grid solution starting at t = 0 together with its history.
template <std::size_t N>
class Trajectory {
 public:
  Trajectory(double step, History<N> history) : step_(step), history_(std::move(history)) {}

  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return states_.size(); }
  double time(std::size_t k) const noexcept { return static_cast<double>(k) * step_; }
  double front() const noexcept { return time(states_.size() - 1); }
  const State<N>& state(std::size_t k) const { return states_.at(k); }
  const State<N>& derivative(std::size_t k) const { return derivs_.at(k); }
  const std::vector<State<N>>& states() const& noexcept { return states_; }
  // Temporaries hand over their storage so range-for stays valid.
  std::vector<State<N>> states() && noexcept { return std::move(states_); }
  const History<N>& history() const noexcept { return history_; }

  /// History for t < 0, cubic Hermite on the bracketing segment otherwise.
  State<N> dense_eval(double t) const {
    if (t < 0.0) return history_(t);
    if (states_.empty() || t > front() + detail::time_slack(front()))
      throw OutOfRangeError("trajectory: t = " + std::to_string(t) + " beyond computed front");
    const double pos = t / step_;
    // Node times reproduce their stored states exactly.
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= 1e-9 && nearest < static_cast<double>(states_.size()))
      return states_[static_cast<std::size_t>(nearest)];
    auto j = static_cast<std::size_t>(std::floor(pos));
    if (j >= states_.size() - 1) {
      if (states_.size() == 1 || pos - static_cast<double>(states_.size() - 1) >= 0.0)
        return states_.back();
      j = states_.size() - 2;
    }
    return eval_segment(j, pos - static_cast<double>(j));
  }

  /// Hermite interpolant on [t_j, t_{j+1}] at fraction theta.
  State<N> eval_segment(std::size_t j, double theta) const {
    if (theta == 0.0) return states_[j];
    // h00 = 1 - h01, so a flat segment reproduces its value exactly.
    const double one_m = 1.0 - theta;
    const double h10 = theta * one_m * one_m;
    const double h01 = theta * theta * (3.0 - 2.0 * theta);
    const double h11 = theta * theta * (theta - 1.0);
    const auto& x0 = states_[j];
    const auto& x1 = states_[j + 1];
    const auto& d0 = derivs_[j];
    const auto& d1 = derivs_[j + 1];
    State<N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = x0[i] + h01 * (x1[i] - x0[i]) + step_ * (h10 * d0[i] + h11 * d1[i]);
    return out;
  }

  void push(const State<N>& x, const State<N>& dx) {
    states_.push_back(x);
    derivs_.push_back(dx);
  }

  void reserve(std::size_t n) {
    states_.reserve(n);
    derivs_.reserve(n);
  }

 private:
  double step_;
  History<N> history_;
  std::vector<State<N>> states_;
  std::vector<State<N>> derivs_;
};

/// Method-of-steps RK4. Lagged reads before t = 0 come from the history,
/// later ones from the Hermite interpolant of already-computed segments.
template <DdeSystem S>
Trajectory<S::dimension> integrate(const S& system, History<S::dimension> history,
                                   const IntegrationConfig& config) {
  constexpr std::size_t N = S::dimension;
  const double lag = system.lag();
  if (std::abs(history.delta() - lag) > detail::time_slack(lag))
    throw PreconditionError("integrate: history delta does not match system lag");
  if (!(std::isfinite(config.horizon) && config.horizon > 0.0))
    throw PreconditionError("integrate: horizon must be finite and > 0");
  const double h = effective_step(config, lag);
  if (lag > 0.0 && h > lag)
    throw PreconditionError("integrate: step exceeds lag without lag alignment");

  const auto steps = static_cast<std::size_t>(std::floor(config.horizon / h + 1e-9));
  const bool aligned = config.align_lag && lag > 0.0;
  const auto lag_steps = aligned ? static_cast<long long>(std::llround(lag / h)) : 0LL;

  Trajectory<N> traj(h, std::move(history));
  traj.reserve(steps + 1);

  // Lagged state for node index k (t = k h) and for the midpoint k + 1/2.
  auto lagged_node = [&](std::size_t k) -> State<N> {
    if (aligned) {
      const long long j = static_cast<long long>(k) - lag_steps;
      if (j < 0) return traj.history()(static_cast<double>(j) * h);
      return traj.state(static_cast<std::size_t>(j));
    }
    return traj.dense_eval(traj.time(k) - lag);
  };
  auto lagged_mid = [&](std::size_t k) -> State<N> {
    if (aligned) {
      const long long j = static_cast<long long>(k) - lag_steps;
      if (j < 0) return traj.history()((static_cast<double>(j) + 0.5) * h);
      return traj.eval_segment(static_cast<std::size_t>(j), 0.5);
    }
    return traj.dense_eval(traj.time(k) + 0.5 * h - lag);
  };
  auto check = [](const State<N>& v, double t) {
    if (!detail::all_finite(v))
      throw NumericalFailure("integrate: non-finite state at t = " + std::to_string(t), t);
  };

  const State<N> x0 = traj.history()(0.0);
  const State<N> d0 = system(0.0, x0, lag > 0.0 ? lagged_node(0) : x0);
  check(d0, 0.0);
  traj.push(x0, d0);

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = traj.time(k);
    const double tm = t + 0.5 * h;
    const double t1 = traj.time(k + 1);
    const State<N> x = traj.state(k);
    const State<N> k1 = traj.derivative(k);

    State<N> k2, k3, k4, l1;
    if (lag > 0.0) {
      const State<N> lm = lagged_mid(k);
      l1 = lagged_node(k + 1);
      k2 = system(tm, detail::axpy(x, 0.5 * h, k1), lm);
      k3 = system(tm, detail::axpy(x, 0.5 * h, k2), lm);
      k4 = system(t1, detail::axpy(x, h, k3), l1);
    } else {
      const State<N> s2 = detail::axpy(x, 0.5 * h, k1);
      k2 = system(tm, s2, s2);
      const State<N> s3 = detail::axpy(x, 0.5 * h, k2);
      k3 = system(tm, s3, s3);
      const State<N> s4 = detail::axpy(x, h, k3);
      k4 = system(t1, s4, s4);
    }

    State<N> x1;
    for (std::size_t i = 0; i < N; ++i)
      x1[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check(x1, t1);
    const State<N> dx1 = system(t1, x1, lag > 0.0 ? l1 : x1);
    check(dx1, t1);
    traj.push(x1, dx1);
  }
  return traj;
}

}  // namespace delayq
