#pragma once

// Linear stability of the symmetric equilibrium: Hopf thresholds, the
// characteristic equations of both models, crossing-direction formulas and
// a Newton root tracker used as a numerical cross-check.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "delayq/error.hpp"
#include "delayq/models.hpp"

namespace delayq {

using ComplexRoot = std::complex<double>;

struct HopfPoint {
  double lambda = 0.0;
  double mu = 0.0;
  double delta_cr = 0.0;
  double omega = 0.0;
  std::size_t branch = 0;
  bool validated = true;
};

/// Delay perturbation delta0 + delta1 about a Hopf point with frequency omega.
struct PerturbationQuery {
  double delta0 = 0.0;
  double delta1 = 0.0;
  double omega = 0.0;
};

namespace detail {

inline void require_rates(double lambda, double mu) {
  if (!(std::isfinite(lambda) && lambda > 0.0 && std::isfinite(mu) && mu > 0.0))
    throw PreconditionError("rates must be finite and > 0");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Constant-delay model

/// First Hopf crossing, delta_cr = 2 acos(-2 mu / lambda) / sqrt(lambda^2 - 4 mu^2).
/// Empty when lambda <= 2 mu: no root reaches the imaginary axis.
inline std::optional<HopfPoint> critical_delay_constant(double lambda, double mu) {
  detail::require_rates(lambda, mu);
  if (lambda <= 2.0 * mu) return std::nullopt;
  const double root = std::sqrt(lambda * lambda - 4.0 * mu * mu);
  if (!(root > 0.0)) return std::nullopt;
  HopfPoint hp;
  hp.lambda = lambda;
  hp.mu = mu;
  hp.omega = 0.5 * root;
  hp.delta_cr = 2.0 * std::acos(-2.0 * mu / lambda) / root;
  return hp;
}

/// r + (lambda/2) e^{-r delta} + mu
inline ComplexRoot characteristic_residual_constant(ComplexRoot r, double lambda, double mu,
                                                    double delta) {
  return r + 0.5 * lambda * std::exp(-r * delta) + mu;
}

inline ComplexRoot characteristic_derivative_constant(ComplexRoot r, double lambda, double delta) {
  return 1.0 - 0.5 * lambda * delta * std::exp(-r * delta);
}

/// Real part of the root shift for delay delta0 + delta1; positive
/// denominator, so the sign follows delta1.
inline double r2_constant(const PerturbationQuery& q, double lambda, double mu) {
  if (!(q.delta0 > 0.0)) throw PreconditionError("r2_constant: delta0 must be > 0");
  const double w2 = q.omega * q.omega;
  return 4.0 * w2 * q.delta1 /
         (8.0 * q.delta0 * mu + q.delta0 * q.delta0 * lambda * lambda + 4.0);
}

// ---------------------------------------------------------------------------
// Moving-average model

/// Characteristic equation multiplied through by r:
/// r^2 + mu r - (lambda / (2 delta)) (e^{-r delta} - 1).
/// r = 0 is a root of this form only.
inline ComplexRoot characteristic_residual_ma(ComplexRoot r, double lambda, double mu,
                                              double delta) {
  if (!(delta > 0.0)) throw PreconditionError("characteristic_residual_ma: delta must be > 0");
  return r * r + mu * r - lambda / (2.0 * delta) * (std::exp(-r * delta) - 1.0);
}

inline ComplexRoot characteristic_derivative_ma(ComplexRoot r, double lambda, double mu,
                                                double delta) {
  return 2.0 * r + mu + 0.5 * lambda * std::exp(-r * delta);
}

/// sqrt(lambda/delta - mu^2); DomainError when lambda/delta <= mu^2.
inline double hopf_frequency_ma(double lambda, double mu, double delta) {
  detail::require_rates(lambda, mu);
  if (!(delta > 0.0)) throw PreconditionError("hopf_frequency_ma: delta must be > 0");
  const double w2 = lambda / delta - mu * mu;
  if (!(w2 > 0.0)) throw DomainError("hopf_frequency_ma: lambda/delta <= mu^2, no Hopf frequency");
  return std::sqrt(w2);
}

/// sin(delta w) + (2 mu delta / lambda) w with w = sqrt(lambda/delta - mu^2).
inline double ma_threshold_function(double delta, double lambda, double mu) {
  const double w = std::sqrt(lambda / delta - mu * mu);
  return std::sin(delta * w) + 2.0 * mu * delta / lambda * w;
}

/// A sign change of the squared threshold equation, before validation
/// against the unsquared cosine and sine conditions.
struct MaCandidate {
  double delta = 0.0;
  double omega = 0.0;
  double cos_mismatch = 0.0;  ///< |cos(w d) - (1 - 2 d w^2 / lambda)|
  double sin_mismatch = 0.0;  ///< |sin(w d) + 2 d mu w / lambda|
  bool validated = false;
};

inline constexpr double kMaValidationTol = 5e-3;
inline constexpr std::size_t kMaScanPoints = 2000;

/// All sign changes of the threshold function on the scan grid, refined by
/// bisection to full double precision. The grid is geometric over
/// [1e-4 lambda/mu^2, lambda/mu^2) unless a bracket is given; points with
/// lambda/delta <= mu^2 are never evaluated.
inline std::vector<MaCandidate> ma_candidates(double lambda, double mu,
                                              std::optional<std::pair<double, double>> bracket = {}) {
  detail::require_rates(lambda, mu);
  const double domain_max = lambda / (mu * mu);
  double lo = 1e-4 * domain_max;
  double hi = domain_max;
  if (bracket) {
    if (!(bracket->first > 0.0 && bracket->second > bracket->first))
      throw PreconditionError("critical_delay_ma: bracket must satisfy 0 < lo < hi");
    lo = bracket->first;
    hi = std::min(bracket->second, domain_max);
  }
  std::vector<MaCandidate> out;
  if (!(lo < hi)) return out;

  std::vector<double> grid;
  grid.reserve(kMaScanPoints);
  const double ratio = std::log(hi / lo) / static_cast<double>(kMaScanPoints - 1);
  for (std::size_t i = 0; i < kMaScanPoints; ++i) {
    const double d = lo * std::exp(ratio * static_cast<double>(i));
    if (d < domain_max) grid.push_back(d);
  }

  auto f = [&](double d) { return ma_threshold_function(d, lambda, mu); };
  auto refine = [&](double a, double b, double fa) {
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const double fm = f(m);
      if (fm == 0.0) return m;
      if (std::signbit(fm) == std::signbit(fa)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };

  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double fa = f(grid[i]);
    const double fb = f(grid[i + 1]);
    if (fa == 0.0) {
      roots.push_back(grid[i]);
    } else if (fb != 0.0 && std::signbit(fa) != std::signbit(fb)) {
      roots.push_back(refine(grid[i], grid[i + 1], fa));
    }
  }

  for (double d : roots) {
    const double w2 = lambda / d - mu * mu;
    if (!(w2 > 0.0)) continue;
    const double w = std::sqrt(w2);
    if (w <= 1e-9 * mu) continue;  // the omega = 0 line
    MaCandidate c;
    c.delta = d;
    c.omega = w;
    c.cos_mismatch = std::abs(std::cos(w * d) - (1.0 - 2.0 * d * w2 / lambda));
    c.sin_mismatch = std::abs(std::sin(w * d) + 2.0 * d * mu * w / lambda);
    c.validated = c.cos_mismatch <= kMaValidationTol && c.sin_mismatch <= kMaValidationTol;
    out.push_back(c);
  }
  return out;
}

/// Validated Hopf points of the moving-average model, sorted by delay;
/// branch 0 is the first loss of stability.
inline std::vector<HopfPoint> critical_delay_ma(double lambda, double mu,
                                                std::optional<std::pair<double, double>> bracket = {}) {
  std::vector<HopfPoint> out;
  for (const auto& c : ma_candidates(lambda, mu, bracket)) {
    if (!c.validated) continue;
    HopfPoint hp;
    hp.lambda = lambda;
    hp.mu = mu;
    hp.delta_cr = c.delta;
    hp.omega = c.omega;
    hp.branch = out.size();
    hp.validated = true;
    out.push_back(hp);
  }
  return out;
}

/// Real part of the root shift for the moving-average model; vanishes when
/// delta0 omega^2 = mu lambda.
inline double r2_ma(const PerturbationQuery& q, double lambda, double mu) {
  if (!(q.delta0 > 0.0)) throw PreconditionError("r2_ma: delta0 must be > 0");
  const double d = q.delta0;
  const double w2 = q.omega * q.omega;
  const double num = 2.0 * q.delta1 * w2 * (2.0 * d * w2 - 2.0 * mu * lambda);
  const double den = 8.0 * d * d * mu * w2 + 12.0 * d * w2 + 4.0 * d * lambda * mu +
                     d * lambda * lambda + 4.0 * lambda;
  return num / den;
}

// ---------------------------------------------------------------------------
// Root tracking

inline constexpr double kRootTol = 1e-12;
inline constexpr int kRootMaxIter = 100;

/// Newton iteration on the model's characteristic residual from `seed`.
/// Converged once |R| < 1e-12 times the magnitude of R's largest term (at
/// least 1), so large-rate parameter sets are not held to sub-ulp accuracy.
inline ComplexRoot root_track(ModelKind model, double lambda, double mu, double delta,
                              ComplexRoot seed) {
  detail::require_rates(lambda, mu);
  if (!(std::isfinite(seed.real()) && std::isfinite(seed.imag())))
    throw PreconditionError("root_track: seed must be finite");
  const bool ma = model == ModelKind::moving_average;
  if (ma ? !(delta > 0.0) : !(delta >= 0.0))
    throw PreconditionError("root_track: invalid delta for model");

  auto residual = [&](ComplexRoot r) {
    return ma ? characteristic_residual_ma(r, lambda, mu, delta)
              : characteristic_residual_constant(r, lambda, mu, delta);
  };
  auto derivative = [&](ComplexRoot r) {
    return ma ? characteristic_derivative_ma(r, lambda, mu, delta)
              : characteristic_derivative_constant(r, lambda, delta);
  };
  auto scale = [&](ComplexRoot r) {
    const double e = std::abs(std::exp(-r * delta));
    const double s = ma ? std::norm(r) + mu * std::abs(r) + lambda / (2.0 * delta) * (e + 1.0)
                        : std::abs(r) + 0.5 * lambda * e + mu;
    return std::max(1.0, s);
  };

  ComplexRoot r = seed;
  for (int it = 0; it <= kRootMaxIter; ++it) {
    const ComplexRoot res = residual(r);
    if (std::abs(res) < kRootTol * scale(r)) return r;
    if (it == kRootMaxIter) break;
    const ComplexRoot d = derivative(r);
    if (d == ComplexRoot{0.0, 0.0} || !std::isfinite(std::abs(d)))
      throw ConvergenceError("root_track: singular derivative");
    r -= res / d;
    if (!std::isfinite(std::abs(r))) throw ConvergenceError("root_track: iterate diverged");
  }
  throw ConvergenceError("root_track: no convergence after 100 iterations");
}

// ---------------------------------------------------------------------------
// Hopf curves

enum class Spacing { linear, logarithmic };

inline std::vector<double> make_grid(double lo, double hi, std::size_t n, Spacing spacing) {
  if (n == 0) throw PreconditionError("grid: need at least one point");
  if (!(lo > 0.0 && hi >= lo && std::isfinite(hi)))
    throw PreconditionError("grid: need 0 < lo <= hi");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    g[i] = spacing == Spacing::linear ? lo + u * (hi - lo) : lo * std::pow(hi / lo, u);
  }
  g.back() = hi;
  return g;
}

/// First Hopf branch across a lambda grid. Grid points without a (validated)
/// crossing are skipped.
inline std::vector<HopfPoint> hopf_curve(ModelKind model, double mu, double lambda_min,
                                         double lambda_max, std::size_t n_points,
                                         Spacing spacing = Spacing::linear) {
  if (!(std::isfinite(mu) && mu > 0.0)) throw PreconditionError("hopf_curve: mu must be > 0");
  std::vector<HopfPoint> out;
  for (double lambda : make_grid(lambda_min, lambda_max, n_points, spacing)) {
    if (model == ModelKind::constant_delay) {
      if (auto hp = critical_delay_constant(lambda, mu)) out.push_back(*hp);
    } else {
      auto pts = critical_delay_ma(lambda, mu);
      if (!pts.empty()) out.push_back(pts.front());
    }
  }
  return out;
}

}  // namespace delayq
