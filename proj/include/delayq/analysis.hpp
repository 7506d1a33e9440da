#pragma once

// Simulation-side diagnostics: tail-amplitude regime classification,
// conservation of total mass, and threshold-vs-simulation sweeps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "delayq/dde.hpp"
#include "delayq/error.hpp"
#include "delayq/models.hpp"
#include "delayq/stability.hpp"

namespace delayq {

enum class Regime { synchronized, oscillatory, inconclusive };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::synchronized: return "synchronized";
    case Regime::oscillatory: return "oscillatory";
    case Regime::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ClassifierConfig {
  double burn_in_fraction = 0.5;
  double eps_sync = 1e-3;
  double eps_osc = 1e-2;
};

/// Thresholds at 0.1% and 1% of the equilibrium queue length.
inline ClassifierConfig default_classifier(double q_star) {
  return {0.5, 1e-3 * q_star, 1e-2 * q_star};
}

struct StabilityVerdict {
  Regime regime = Regime::inconclusive;
  double amplitude = 0.0;  ///< max - min of q1 - q2 over the tail
  double burn_in = 0.0;
  double horizon = 0.0;
  /// Tail amplitude over its second half exceeds that over its first half.
  bool growing = false;
  double early_amplitude = 0.0;
  double late_amplitude = 0.0;
};

namespace detail {

template <std::size_t N>
double spread(const Trajectory<N>& traj, std::size_t begin, std::size_t end) {
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = begin; k < end; ++k) {
    const auto& x = traj.state(k);
    const double d = x[0] - x[1];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return end > begin ? hi - lo : 0.0;
}

}  // namespace detail

template <std::size_t N>
StabilityVerdict classify_stability(const Trajectory<N>& traj, const ClassifierConfig& cfg) {
  static_assert(N >= 2);
  if (!(cfg.burn_in_fraction > 0.0 && cfg.burn_in_fraction < 1.0))
    throw PreconditionError("classify_stability: burn_in_fraction must lie in (0, 1)");
  if (!(cfg.eps_sync > 0.0 && cfg.eps_sync < cfg.eps_osc))
    throw PreconditionError("classify_stability: need 0 < eps_sync < eps_osc");
  const std::size_t last = traj.size() - 1;
  const auto begin = static_cast<std::size_t>(std::ceil(cfg.burn_in_fraction * static_cast<double>(last)));
  const std::size_t end = traj.size();
  if (end < begin + 4)
    throw PreconditionError("classify_stability: horizon too short for the burn-in");

  StabilityVerdict v;
  v.burn_in = traj.time(begin);
  v.horizon = traj.time(last);
  v.amplitude = detail::spread(traj, begin, end);
  const std::size_t mid = begin + (end - begin) / 2;
  v.early_amplitude = detail::spread(traj, begin, mid);
  v.late_amplitude = detail::spread(traj, mid, end);
  v.growing = v.late_amplitude > v.early_amplitude;
  if (v.amplitude < cfg.eps_sync)
    v.regime = Regime::synchronized;
  else if (v.amplitude > cfg.eps_osc)
    v.regime = Regime::oscillatory;
  else
    v.regime = Regime::inconclusive;
  return v;
}

/// max over nodes of |q1 + q2 - s(t)| with s' = lambda - mu s, s(0) from node 0.
template <std::size_t N>
double conservation_check(const Trajectory<N>& traj, const ModelParams& p) {
  static_assert(N >= 2);
  const double s_inf = p.lambda / p.mu;
  const double s0 = traj.state(0)[0] + traj.state(0)[1];
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& x = traj.state(k);
    const double exact = s_inf + (s0 - s_inf) * std::exp(-p.mu * traj.time(k));
    worst = std::max(worst, std::abs(x[0] + x[1] - exact));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Prediction { stable, unstable, not_applicable };

inline std::string_view to_string(Prediction p) {
  switch (p) {
    case Prediction::stable: return "stable";
    case Prediction::unstable: return "unstable";
    case Prediction::not_applicable: return "n/a";
  }
  return "?";
}

struct SimConfig {
  double horizon = 200.0;
  std::optional<double> step;
  double phi1_factor = 1.1;  ///< history phi1 = factor * q*
  double phi2_factor = 0.9;
  double burn_in_fraction = 0.5;
  double sync_factor = 1e-3;  ///< eps_sync = factor * q*
  double osc_factor = 1e-2;
};

/// Stability of the equilibrium at delay `delta` from the first Hopf branch.
inline Prediction predict(ModelKind model, double lambda, double mu, double delta) {
  if (model == ModelKind::constant_delay) {
    const auto hp = critical_delay_constant(lambda, mu);
    if (!hp) return Prediction::not_applicable;
    return delta < hp->delta_cr ? Prediction::stable : Prediction::unstable;
  }
  const auto pts = critical_delay_ma(lambda, mu);
  if (pts.empty()) return Prediction::not_applicable;
  return delta < pts.front().delta_cr ? Prediction::stable : Prediction::unstable;
}

/// Integrates one scenario from constant histories and classifies its tail.
inline StabilityVerdict simulate_verdict(ModelKind model, const ModelParams& p,
                                         const SimConfig& sim) {
  p.validate();
  const double q = equilibrium(p);
  const auto hist = History<2>::constant(p.delta, {sim.phi1_factor * q, sim.phi2_factor * q});
  const ClassifierConfig cls{sim.burn_in_fraction, sim.sync_factor * q, sim.osc_factor * q};
  if (model == ModelKind::constant_delay)
    return classify_stability(simulate_constant(p, hist, sim.horizon, sim.step), cls);
  return classify_stability(simulate_ma(p, hist, sim.horizon, sim.step), cls);
}

struct SweepRow {
  double lambda = 0.0;
  double mu = 0.0;
  double delta = 0.0;
  Prediction predicted = Prediction::not_applicable;
  std::optional<Regime> observed;  ///< empty when the integration failed
  double amplitude = 0.0;
  bool growing = false;
  bool agree = false;
  std::string error;
};

/// Agreement of prediction and observation; an inconclusive observation is
/// settled by the growth indicator without changing the reported regime.
inline bool agrees(Prediction predicted, std::optional<Regime> observed, bool growing) {
  if (predicted == Prediction::not_applicable) return true;
  if (!observed) return false;
  const bool unstable = predicted == Prediction::unstable;
  switch (*observed) {
    case Regime::synchronized: return !unstable;
    case Regime::oscillatory: return unstable;
    case Regime::inconclusive: return growing == unstable;
  }
  return false;
}

/// Rows in lambda-major grid order. Per-row integration failures are recorded
/// in the row and do not abort the sweep.
inline std::vector<SweepRow> sweep(ModelKind model, double mu, const std::vector<double>& lambdas,
                                   const std::vector<double>& deltas, const SimConfig& sim) {
  if (lambdas.empty() || deltas.empty()) throw PreconditionError("sweep: grids must be non-empty");
  std::vector<SweepRow> rows;
  rows.reserve(lambdas.size() * deltas.size());
  for (double lambda : lambdas) {
    for (double delta : deltas) {
      SweepRow row;
      row.lambda = lambda;
      row.mu = mu;
      row.delta = delta;
      try {
        row.predicted = predict(model, lambda, mu, delta);
        const auto v = simulate_verdict(model, {lambda, mu, delta}, sim);
        row.observed = v.regime;
        row.amplitude = v.amplitude;
        row.growing = v.growing;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      row.agree = row.error.empty() ? agrees(row.predicted, row.observed, row.growing)
                                    : row.predicted == Prediction::not_applicable;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Bisects on delta for the boundary between synchronized and not
/// synchronized outcomes. `lo` must synchronize and `hi` must not.
inline double find_verdict_flip(ModelKind model, double lambda, double mu, double lo, double hi,
                                const SimConfig& sim, double rel_tol = 1e-3) {
  auto synced = [&](double d) {
    return simulate_verdict(model, {lambda, mu, d}, sim).regime == Regime::synchronized;
  };
  if (!synced(lo) || synced(hi))
    throw PreconditionError("find_verdict_flip: bracket does not straddle a verdict change");
  while (hi - lo > rel_tol * hi) {
    const double m = 0.5 * (lo + hi);
    (synced(m) ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace delayq
