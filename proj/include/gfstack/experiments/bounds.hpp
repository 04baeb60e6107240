#pragma once

#include "gfstack/experiments/config.hpp"
#include "gfstack/experiments/csv.hpp"
#include "gfstack/experiments/runner.hpp"
#include "gfstack/experiments/zoo.hpp"
#include "gfstack/gradient_flow.hpp"

namespace gfstack::experiments {

inline const std::vector<double>& bound_times() {
  static const std::vector<double> t{0.05, 0.25, 1.0, 2.0};
  return t;
}

inline double flow_tol_for(const ProperFunctional& f) { return f.name == "graph_tv3" ? 1e-5 : 1e-6; }

// Energy bound, decay rate and contraction rows for one zoo entry.
inline std::vector<Row> bound_rows_for(const ZooEntry& e, std::uint64_t seed, double tolerance, int draws = 4) {
  const ProperFunctional& f = e.f;
  const double ftol = flow_tol_for(f);
  Rng rng(seed);
  std::vector<Row> rows;
  std::vector<Vec> x0s;
  for (int k = 0; k < draws; ++k) x0s.push_back(uniform_vec(rng, f.dim, e.lo, e.hi));
  if (f.name == "quadratic_l1.0") x0s.push_back(Vec::Ones(1));
  FlowOptions o;
  for (std::size_t k = 0; k < x0s.size(); ++k) {
    const std::string tag = f.name + (k < static_cast<std::size_t>(draws) ? "/x" + std::to_string(k) : "/anchor");
    const FlowResult fr = gradient_flow(f, x0s[k], bound_times(), ftol, o);
    for (std::size_t i = 0; i < bound_times().size(); ++i)
      rows.push_back(le_row("energy_bound", f.dim, bound_times()[i], tag, fr.energies[i], fr.envelope_bounds[i],
                            tolerance));
  }
  // S(t) is e^{-lambda t}-Lipschitz.
  {
    const Vec x = uniform_vec(rng, f.dim, e.lo, e.hi), y = uniform_vec(rng, f.dim, e.lo, e.hi);
    o.envelopes = false;
    const FlowResult fx = gradient_flow(f, x, bound_times(), ftol, o);
    const FlowResult fy = gradient_flow(f, y, bound_times(), ftol, o);
    for (std::size_t i = 0; i < bound_times().size(); ++i) {
      const double t = bound_times()[i];
      const double cert = fx.trajectory.error_bounds[i] + fy.trajectory.error_bounds[i];
      rows.push_back(le_row("semigroup_contraction", f.dim, t, f.name,
                            f.norm(fx.trajectory.states[i] - fy.trajectory.states[i]),
                            std::exp(-f.lambda * t) * f.norm(x - y) + cert, tolerance));
    }
    if (f.lambda >= 0.0) {
      for (double t : {0.25, 1.0}) {
        const auto r = decay_rate_check(f, x, y, t, ftol, tolerance);
        rows.push_back(le_row("decay_rate", f.dim, t, f.name, r.lhs, r.rhs, tolerance));
      }
    }
  }
  return rows;
}

inline std::vector<Row> crandall_liggett_rows(double tolerance) {
  std::vector<Row> rows;
  const ResolventOperator R = linear_scalar_operator(1, 1.0);
  const Vec x = Vec::Ones(1);
  for (double t : {0.25, 0.5, 1.0}) {
    for (long long n = 4; n <= 4096; n *= 2) {
      const double err = std::abs(resolvent_iterate(R, t, n, x)[0] - std::exp(-t));
      rows.push_back(le_row("crandall_liggett", n, t, "error_vs_bound", err,
                            cl_apriori_bound(t, n, 1.0, std::max(R.omega, 0.0)), tolerance));
    }
  }
  // the same estimate with exponent e^{4 omega t} at omega = -1
  const double err = std::abs(resolvent_iterate(R, 1.0, 100, x)[0] - std::exp(-1.0));
  rows.push_back(le_row("crandall_liggett", 100, 1.0, "error_vs_signed_omega_bound", err,
                        cl_apriori_bound(1.0, 100, 1.0, R.omega), tolerance));
  return rows;
}

inline std::vector<Row> envelope_limit_rows(double tolerance) {
  std::vector<Row> rows;
  const ProperFunctional q = quadratic_functional(1.0);
  const Vec x0 = Vec::Constant(1, 1.5);
  for (double t : {1e-2, 1e-4, 1e-8}) {
    const double env = moreau_envelope(q, kappa(t, q.lambda), x0);
    rows.push_back(le_row("envelope_limit", 1, t, "phi(x0)-envelope", q(x0) - env, 1.5 * t, tolerance));
  }
  return rows;
}

inline std::vector<Row> lr_contraction_rows(const GraphEnergy& ge, const std::string& name, std::uint64_t seed,
                                            int samples, double tolerance) {
  Rng rng(seed);
  std::vector<Row> rows;
  const double tol = ge.loss == LossKind::Squared ? 1e-6 : 1e-5;
  for (int s = 0; s < samples; ++s) {
    const Vec x = uniform_vec(rng, ge.n_nodes, -2.0, 2.0), y = uniform_vec(rng, ge.n_nodes, -2.0, 2.0);
    const double t = uniform(rng, 0.05, 1.5);
    for (double r : {1.0, 2.0, 3.0, 4.0, kInf}) {
      const auto rep = lr_contraction_check(ge, x, y, t, r, tol);
      const std::string metric = name + "/r=" + (std::isinf(r) ? std::string("max") : fmt(r)) + "/s" +
                                 std::to_string(s);
      rows.push_back(le_row("lr_contraction", ge.n_nodes, t, metric, rep.lhs, rep.rhs + rep.certificate,
                            tolerance));
    }
  }
  return rows;
}

inline std::vector<std::pair<std::string, GraphEnergy>> contraction_graphs() {
  return {{"graph2", two_node_graph()},
          {"graph5", random_graph(5, 11)},
          {"graph16", random_graph(16, 12)},
          {"graph_tv3", random_graph(3, 13, LossKind::Absolute)}};
}

inline std::vector<Task> bound_suite_tasks(const ExperimentConfig& cfg, int lr_samples = 4) {
  std::vector<Task> tasks;
  const auto zoo = functional_zoo(true);
  for (std::size_t i = 0; i < zoo.size(); ++i) {
    const ZooEntry e = zoo[i];
    const std::uint64_t seed = cfg.seed + 1000 * (i + 1);
    tasks.push_back([e, seed, tol = cfg.tolerance] { return bound_rows_for(e, seed, tol); });
  }
  const auto graphs = contraction_graphs();
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto g = graphs[i];
    const std::uint64_t seed = cfg.seed + 77 * (i + 1);
    tasks.push_back(
        [g, seed, lr_samples, tol = cfg.tolerance] { return lr_contraction_rows(g.second, g.first, seed, lr_samples, tol); });
  }
  tasks.push_back([tol = cfg.tolerance] { return crandall_liggett_rows(tol); });
  tasks.push_back([tol = cfg.tolerance] { return envelope_limit_rows(tol); });
  return tasks;
}

inline std::vector<Row> run_bound_suite(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_tasks(bound_suite_tasks(cfg));
}

}  // namespace gfstack::experiments
