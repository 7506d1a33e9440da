#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage or validation
// error, 2 numerical or I/O failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "delayq/analysis.hpp"
#include "delayq/csv.hpp"
#include "delayq/error.hpp"
#include "delayq/models.hpp"
#include "delayq/stability.hpp"
#include "delayq/verify.hpp"

namespace delayq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

namespace detail {

inline const std::map<std::string, ModelKind>& model_names() {
  static const std::map<std::string, ModelKind> names{
      {"constant", ModelKind::constant_delay},
      {"moving-average", ModelKind::moving_average},
      {"ma", ModelKind::moving_average}};
  return names;
}

/// Runs `fn` with either the --out file or `out`.
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty()) {
    fn(out);
  } else {
    delayq::detail::write_file(path, fn);
  }
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Fluid models of two parallel queues with delayed Multinomial Logit routing"};
  app.require_subcommand(1);

  std::string model_name;
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", model_name, "constant | moving-average")
        ->required()
        ->check(CLI::IsMember({"constant", "moving-average", "ma"}, CLI::ignore_case));
  };

  // simulate
  double lambda = 0.0, mu = 0.0, delta = 0.0, horizon = 0.0;
  std::optional<double> step, phi1, phi2;
  std::string out_path;
  auto* sim = app.add_subcommand("simulate", "Integrate one scenario and write the trajectory CSV");
  add_model(sim);
  sim->add_option("--lambda", lambda, "total arrival rate")->required();
  sim->add_option("--mu", mu, "service rate per queue")->required();
  sim->add_option("--delta", delta, "information delay")->required();
  sim->add_option("--horizon", horizon, "integration horizon")->required();
  sim->add_option("--step", step, "requested step (default min(delta/20, 1/(10 mu), 0.01))");
  auto* o_phi1 = sim->add_option("--phi1", phi1, "constant history of queue 1");
  auto* o_phi2 = sim->add_option("--phi2", phi2, "constant history of queue 2");
  o_phi1->needs(o_phi2);
  o_phi2->needs(o_phi1);
  sim->add_option("--out", out_path, "output file (default: stdout)");

  // critical-delay
  std::vector<double> bracket;
  auto* crit = app.add_subcommand("critical-delay", "Report Hopf critical delays");
  add_model(crit);
  crit->add_option("--lambda", lambda)->required();
  crit->add_option("--mu", mu)->required();
  crit->add_option("--bracket", bracket, "delay search interval LO HI (moving-average)")
      ->expected(2);

  // hopf-curve
  double lambda_min = 0.0, lambda_max = 0.0;
  std::size_t points = 0;
  bool log_spacing = false;
  auto* curve = app.add_subcommand("hopf-curve", "First Hopf branch over a lambda grid");
  add_model(curve);
  curve->add_option("--mu", mu)->required();
  curve->add_option("--lambda-min", lambda_min)->required();
  curve->add_option("--lambda-max", lambda_max)->required();
  curve->add_option("--points", points)->required()->check(CLI::PositiveNumber);
  curve->add_flag("--log", log_spacing, "geometric lambda spacing");
  curve->add_option("--out", out_path);

  // sweep
  std::vector<double> lambdas, deltas;
  SimConfig sweep_cfg;
  auto* sw = app.add_subcommand("sweep", "Compare predicted and simulated stability on a grid");
  add_model(sw);
  sw->add_option("--mu", mu)->required();
  sw->add_option("--lambdas", lambdas)->required()->delimiter(',');
  sw->add_option("--deltas", deltas)->required()->delimiter(',');
  sw->add_option("--horizon", sweep_cfg.horizon, "integration horizon per row")->capture_default_str();
  sw->add_option("--out", out_path);

  auto* ver = app.add_subcommand("verify", "Run the built-in invariant checks");

  try {
    app.parse(argc, argv);
    if (ver->parsed()) model_name = "constant";
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::transform(model_name.begin(), model_name.end(), model_name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const ModelKind model = detail::model_names().at(model_name);
  try {
    if (*sim) {
      const ModelParams p{lambda, mu, delta};
      p.validate();
      if (!(std::isfinite(horizon) && horizon > 0.0))
        throw PreconditionError("--horizon must be > 0");
      const double q = equilibrium(p);
      const auto hist = History<2>::constant(delta, {phi1.value_or(1.1 * q), phi2.value_or(0.9 * q)});
      if (model == ModelKind::constant_delay) {
        const auto traj = simulate_constant(p, hist, horizon, step);
        detail::emit(out_path, out, [&](std::ostream& os) { write_trajectory_csv(traj, os); });
      } else {
        const auto traj = simulate_ma(p, hist, horizon, step);
        detail::emit(out_path, out, [&](std::ostream& os) { write_trajectory_csv(traj, os); });
      }
    } else if (*crit) {
      out << "model: " << to_string(model) << "\nlambda = " << format_number(lambda)
          << "\nmu = " << format_number(mu) << '\n';
      if (model == ModelKind::constant_delay) {
        const auto hp = critical_delay_constant(lambda, mu);
        if (!hp) {
          out << "no Hopf bifurcation: λ ≤ 2μ\n";
        } else {
          out << "delta_cr = " << format_number(hp->delta_cr)
              << "\nomega = " << format_number(hp->omega) << '\n';
        }
      } else {
        std::optional<std::pair<double, double>> br;
        if (!bracket.empty()) br = std::pair{bracket[0], bracket[1]};
        const auto pts = critical_delay_ma(lambda, mu, br);
        if (pts.empty()) out << "no validated Hopf crossing in range\n";
        for (const auto& hp : pts) {
          out << "branch " << hp.branch << ": delta_cr = " << format_number(hp.delta_cr)
              << ", omega = " << format_number(hp.omega) << '\n';
        }
      }
    } else if (*curve) {
      const auto pts = hopf_curve(model, mu, lambda_min, lambda_max, points,
                                  log_spacing ? Spacing::logarithmic : Spacing::linear);
      detail::emit(out_path, out, [&](std::ostream& os) { write_hopf_curve_csv(pts, os); });
    } else if (*sw) {
      const auto rows = sweep(model, mu, lambdas, deltas, sweep_cfg);
      detail::emit(out_path, out, [&](std::ostream& os) { write_sweep_csv(rows, os); });
    } else if (*ver) {
      const auto results = run_verification();
      std::size_t failed = 0;
      for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        failed += r.passed ? 0 : 1;
      }
      out << (results.size() - failed) << '/' << results.size() << " checks passed\n";
      if (failed > 0) return kExitNumerical;
    }
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace delayq::cli
