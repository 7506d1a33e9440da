#pragma once

// Built-in invariant suite behind `delayq verify`.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "delayq/analysis.hpp"
#include "delayq/dde.hpp"
#include "delayq/models.hpp"
#include "delayq/stability.hpp"

namespace delayq {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Max node error of the symmetric-history run against q* + (c - q*) e^{-mu t}.
inline double symmetric_error(double step) {
  const ModelParams p{10.0, 1.0, 0.4};
  const double c = 8.0;
  const auto traj = integrate(ConstantDelaySystem{p}, History<2>::constant(p.delta, {c, c}),
                              IntegrationConfig{step, 5.0, true});
  const double q = equilibrium(p);
  double err = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double exact = q + (c - q) * std::exp(-p.mu * traj.time(k));
    err = std::max({err, std::abs(traj.state(k)[0] - exact), std::abs(traj.state(k)[1] - exact)});
  }
  return err;
}

}  // namespace detail

inline std::vector<CheckResult> run_verification() {
  std::vector<CheckResult> out;
  auto check = [&](std::string name, const std::function<std::pair<bool, std::string>()>& fn) {
    CheckResult r{std::move(name), false, {}};
    try {
      auto [ok, detail] = fn();
      r.passed = ok;
      r.detail = std::move(detail);
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(r));
  };

  // dde_core
  check("dde.fixed_point", [] {
    const ModelParams p{10.0, 1.0, 0.4};
    const auto traj = simulate_constant(p, History<2>::constant(0.4, {5.0, 5.0}), 20.0);
    double dev = 0.0;
    for (const auto& x : traj.states()) dev = std::max({dev, std::abs(x[0] - 5.0), std::abs(x[1] - 5.0)});
    return std::pair{dev == 0.0, "max deviation " + detail::sci(dev)};
  });
  check("dde.symmetric_closed_form", [] {
    const double err = detail::symmetric_error(0.01);
    return std::pair{err < 1e-6, "max error " + detail::sci(err)};
  });
  check("dde.fourth_order", [] {
    const double ratio = detail::symmetric_error(0.1) / detail::symmetric_error(0.05);
    return std::pair{ratio > 12.0 && ratio < 20.0, "error ratio " + detail::sci(ratio)};
  });
  check("dde.history_consistency", [] {
    const ModelParams p{10.0, 1.0, 0.4};
    const auto traj = simulate_constant(p, default_history(p), 1.0);
    const auto a = traj.dense_eval(-1e-300);
    const auto b = traj.dense_eval(0.0);
    return std::pair{a == b, std::string("history(0-) == trajectory(0)")};
  });
  check("dde.determinism", [] {
    const ModelParams p{10.0, 1.0, 0.4};
    const auto a = simulate_constant(p, default_history(p), 50.0);
    const auto b = simulate_constant(p, default_history(p), 50.0);
    return std::pair{a.states() == b.states(), std::string("bit-identical reruns")};
  });

  // models
  check("models.mnl_weights", [] {
    double worst = 0.0;
    bool bounded = true;
    for (double a = -50.0; a <= 50.0; a += 2.5) {
      for (double b = -50.0; b <= 50.0; b += 3.5) {
        const auto w = mnl_weights(a, b);
        worst = std::max(worst, std::abs(w[0] + w[1] - 1.0));
        bounded = bounded && w[0] >= 0.0 && w[0] <= 1.0 && w[1] >= 0.0 && w[1] <= 1.0;
      }
    }
    return std::pair{bounded && worst <= 1e-15, "max |sum - 1| " + detail::sci(worst)};
  });
  check("models.conservation", [] {
    const ModelParams pc{10.0, 1.0, 0.4};
    const ModelParams pm{10.0, 1.0, 4.0};
    const double dc = conservation_check(
        simulate_constant(pc, History<2>::constant(0.4, {5.5, 4.5}), 100.0), pc);
    const double dm = conservation_check(
        simulate_ma(pm, History<2>::constant(4.0, {6.0, 4.5}), 100.0), pm);
    return std::pair{dc < 1e-6 && dm < 1e-6,
                     "constant " + detail::sci(dc) + ", moving-average " + detail::sci(dm)};
  });
  check("models.invariant_manifold", [] {
    const ModelParams p{10.0, 1.0, 0.4};
    double worst = 0.0;
    for (const auto& x : simulate_constant(p, History<2>::constant(0.4, {7.0, 7.0}), 50.0).states())
      worst = std::max(worst, std::abs(x[0] - x[1]));
    const ModelParams pm{10.0, 1.0, 4.0};
    for (const auto& x : simulate_ma(pm, History<2>::constant(4.0, {7.0, 7.0}), 50.0).states())
      worst = std::max(worst, std::abs(x[0] - x[1]));
    return std::pair{worst < 1e-12, "max |q1 - q2| " + detail::sci(worst)};
  });
  check("models.swap_symmetry", [] {
    const ModelParams p{10.0, 1.0, 0.4};
    const auto a = simulate_constant(p, History<2>::constant(0.4, {5.5, 4.5}), 50.0);
    const auto b = simulate_constant(p, History<2>::constant(0.4, {4.5, 5.5}), 50.0);
    bool same = a.size() == b.size();
    for (std::size_t k = 0; same && k < a.size(); ++k)
      same = a.state(k)[0] == b.state(k)[1] && a.state(k)[1] == b.state(k)[0];
    return std::pair{same, std::string("swapped histories swap trajectories")};
  });
  check("models.moving_average_quadrature", [] {
    const ModelParams p{10.0, 1.0, 4.0};
    const auto traj = simulate_ma(p, default_history(p), 60.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto m = ma_from_trajectory(traj, traj.time(k), p.delta);
      worst = std::max({worst, std::abs(m[0] - traj.state(k)[2]), std::abs(m[1] - traj.state(k)[3])});
    }
    return std::pair{worst < 5e-4, "max |m - quadrature| " + detail::sci(worst)};
  });

  // stability
  check("stability.constant_residuals", [] {
    double worst = 0.0, trig = 0.0;
    for (double mu : {0.5, 1.0}) {
      for (const auto& hp : hopf_curve(ModelKind::constant_delay, mu, 2.5 * mu, 100.0, 20)) {
        const ComplexRoot r{0.0, hp.omega};
        worst = std::max(worst, std::abs(characteristic_residual_constant(r, hp.lambda, mu, hp.delta_cr)));
        trig = std::max({trig, std::abs(std::cos(hp.omega * hp.delta_cr) + 2.0 * mu / hp.lambda),
                         std::abs(std::sin(hp.omega * hp.delta_cr) - 2.0 * hp.omega / hp.lambda)});
      }
    }
    return std::pair{worst < 1e-9 && trig < 1e-9,
                     "|R(iw)| " + detail::sci(worst) + ", trig " + detail::sci(trig)};
  });
  check("stability.ma_residuals", [] {
    double worst = 0.0, cond = 0.0;
    std::size_t n = 0;
    for (double mu : {0.5, 1.0}) {
      for (double lambda : make_grid(2.5, 100.0, 20, Spacing::linear)) {
        for (const auto& hp : critical_delay_ma(lambda, mu)) {
          ++n;
          const ComplexRoot r{0.0, hp.omega};
          worst = std::max(worst, std::abs(characteristic_residual_ma(r, lambda, mu, hp.delta_cr)));
          const double d = hp.delta_cr, w = hp.omega;
          cond = std::max({cond, std::abs(std::cos(w * d) - (1.0 - 2.0 * d * w * w / lambda)),
                           std::abs(std::sin(w * d) + 2.0 * d * mu * w / lambda)});
        }
      }
    }
    return std::pair{n > 0 && worst < 1e-8 && cond < kMaValidationTol,
                     std::to_string(n) + " points, |R(iw)| " + detail::sci(worst)};
  });
  check("stability.extraneous_rejected", [] {
    const auto cands = ma_candidates(10.0, 1.0);
    const auto it = std::find_if(cands.begin(), cands.end(),
                                 [](const MaCandidate& c) { return std::abs(c.delta - 4.0) < 0.2; });
    const bool ok = it != cands.end() && !it->validated && it->cos_mismatch > 0.3;
    return std::pair{ok, it == cands.end() ? std::string("no candidate near 4")
                                           : "cos mismatch " + detail::sci(it->cos_mismatch)};
  });
  check("stability.crossing_direction", [] {
    bool ok = true;
    for (double mu : {0.5, 1.0, 2.0, 5.0}) {
      for (double factor : {1.5, 3.0, 10.0, 20.0}) {
        const double lambda = factor * mu * 2.0;
        const auto hp = *critical_delay_constant(lambda, mu);
        for (double eps : {-1e-3, 1e-3}) {
          const auto r = root_track(ModelKind::constant_delay, lambda, mu, hp.delta_cr + eps,
                                    ComplexRoot{0.0, hp.omega});
          const double r2 = r2_constant({hp.delta_cr, eps, hp.omega}, lambda, mu);
          ok = ok && std::signbit(r.real()) == std::signbit(r2) && r.real() != 0.0;
        }
      }
    }
    return std::pair{ok, std::string("root_track sign matches r2 on 16 (lambda, mu) pairs")};
  });
  check("stability.monotone_curve", [] {
    bool ok = true;
    for (double mu : {0.5, 1.0}) {
      const auto curve = hopf_curve(ModelKind::constant_delay, mu, 2.5 * mu, 100.0, 50);
      ok = ok && curve.size() == 50;
      for (std::size_t i = 1; ok && i < curve.size(); ++i) ok = curve[i].delta_cr < curve[i - 1].delta_cr;
    }
    return std::pair{ok, std::string("delta_cr strictly decreasing in lambda")};
  });

  // analysis
  check("analysis.threshold_agreement", [] {
    SimConfig sim;
    sim.horizon = 200.0;
    const auto rows = sweep(ModelKind::constant_delay, 1.0, {10.0}, {0.2, 0.3, 0.34, 0.4, 0.5, 1.0}, sim);
    const bool ok = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.agree; });
    return std::pair{ok, std::to_string(rows.size()) + " rows"};
  });
  check("analysis.swap_invariance", [] {
    SimConfig a, b;
    b.phi1_factor = a.phi2_factor;
    b.phi2_factor = a.phi1_factor;
    const ModelParams p{10.0, 1.0, 0.4};
    const auto va = simulate_verdict(ModelKind::constant_delay, p, a);
    const auto vb = simulate_verdict(ModelKind::constant_delay, p, b);
    return std::pair{va.regime == vb.regime && va.amplitude == vb.amplitude,
                     std::string(to_string(va.regime))};
  });

  return out;
}

}  // namespace delayq
