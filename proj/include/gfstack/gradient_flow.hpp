#pragma once

#include "gfstack/convex_core.hpp"
#include "gfstack/semigroup.hpp"

#include <algorithm>

namespace gfstack {

// R_gamma(d Phi) = J_gamma(Phi), omega = -lambda.
inline ResolventOperator prox_resolvent(const ProperFunctional& phi, const SolverOptions& sopt = {}) {
  ResolventOperator R;
  R.dim = phi.dim;
  R.omega = -phi.lambda;
  R.weights = phi.weights;
  R.resolve = [phi, sopt](double g, const Vec& x) { return prox(phi, g, x, sopt); };
  if (phi.prox_power) R.iterate = phi.prox_power;
  R.domain_closure = [phi](const Vec& x) { return std::isfinite(phi.value(x)); };
  return R;
}

struct FlowResult {
  Trajectory trajectory;
  std::vector<double> energies;
  std::vector<double> envelope_bounds;
  double lambda = 0.0;
  Vec x0;
};

struct FlowOptions {
  CLOptions cl;
  SolverOptions solver;
  bool envelopes = true;
};

namespace detail {

inline std::vector<Vec> iterate_grid(const ResolventOperator& R, const std::vector<double>& times, long long n,
                                     const Vec& x0) {
  std::vector<Vec> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(t == 0.0 ? x0 : resolvent_iterate(R, t, n, x0));
  return out;
}

}  // namespace detail

// Crandall-Liggett over the prox resolvent. One step count n serves the whole grid,
// so the discretisation error is a smooth function of t.
inline FlowResult gradient_flow(const ProperFunctional& phi, const Vec& x0, const std::vector<double>& times,
                                double tol, const FlowOptions& opt = {}) {
  if (times.empty()) throw InputError("gradient_flow: empty time grid");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && !(times[i] > times[i - 1])))
      throw InputError("gradient_flow: times must be nonnegative and strictly increasing");
  }
  const ResolventOperator R = prox_resolvent(phi, opt.solver);
  if (!R.in_domain(x0)) throw DomainError("gradient_flow: x0 outside the domain");

  FlowResult fr;
  fr.lambda = phi.lambda;
  fr.x0 = x0;
  auto& tr = fr.trajectory;
  tr.times = times;
  const double T = times.back();

  const double a = T > 0.0 ? inf_norm_A(R, x0) : 0.0;
  if (a == 0.0) {
    tr.states.assign(times.size(), x0);
    tr.error_bounds.assign(times.size(), 0.0);
    tr.meta.certified = true;
  } else {
    long long n = std::isfinite(a) ? detail::apriori_steps(T, a, R.omega, tol) : -1;
    const bool cheap = static_cast<bool>(R.iterate) || (n > 0 && n <= opt.cl.slow_certify_cap);
    if (n > 0 && n <= opt.cl.max_n && cheap) {
      while (!in_interval(R.omega, T / static_cast<double>(n))) ++n;
      tr.states = detail::iterate_grid(R, times, n, x0);
      for (double t : times)
        tr.error_bounds.push_back(t == 0.0 ? 0.0 : cl_apriori_bound(t, n, a, std::max(R.omega, 0.0)));
      tr.meta.steps = n;
      tr.meta.certified = true;
    } else {
      n = detail::first_admissible_power(T, R.omega);
      std::vector<Vec> prev = detail::iterate_grid(R, times, n, x0);
      double est = kInf;
      while (true) {
        const long long n2 = 2 * n;
        if (n2 > opt.cl.max_n)
          throw SolverError("gradient_flow: no convergence within " + std::to_string(opt.cl.max_n) + " steps",
                            prev.back(), est);
        std::vector<Vec> cur = detail::iterate_grid(R, times, n2, x0);
        est = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) est = std::max(est, R.norm(cur[k] - prev[k]));
        prev = std::move(cur);
        n = n2;
        if (est <= tol / 2.0) break;
      }
      tr.states = std::move(prev);
      for (double t : times) tr.error_bounds.push_back(t == 0.0 ? 0.0 : tol);
      tr.meta.steps = n;
      tr.meta.certified = false;
      tr.meta.note = "a-posteriori";
    }
  }

  for (std::size_t k = 0; k < times.size(); ++k) {
    fr.energies.push_back(phi(tr.states[k]));
    if (!opt.envelopes) continue;
    fr.envelope_bounds.push_back(times[k] == 0.0 ? phi(x0)
                                                 : moreau_envelope(phi, kappa(times[k], phi.lambda), x0, opt.solver));
  }
  return fr;
}

struct EnergyBoundReport {
  double flow_energy = 0.0;
  double envelope_value = 0.0;
  double slack = 0.0;
  double certificate = 0.0;
  bool ok = false;
};

// Phi(u(t)) <= [Phi]^{kappa(t, lambda)}(x0).
inline EnergyBoundReport energy_bound_check(const ProperFunctional& phi, const Vec& x0, double t,
                                            double flow_tol = 1e-6, double tolerance = 1e-6,
                                            const FlowOptions& opt = {}) {
  if (!(t > 0.0)) throw DomainError("energy_bound_check: t must be positive");
  const FlowResult fr = gradient_flow(phi, x0, {t}, flow_tol, opt);
  EnergyBoundReport rep;
  rep.flow_energy = fr.energies.back();
  rep.envelope_value = fr.envelope_bounds.back();
  rep.slack = rep.envelope_value - rep.flow_energy;
  rep.certificate = fr.trajectory.error_bounds.back();
  rep.ok = rep.slack >= -tolerance;
  return rep;
}

struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool ok = false;
};

// Phi(u(t)) - Phi(x) <= ||x0 - x||^2 / (2 kappa(t, lambda)), lambda >= 0.
inline InequalityReport decay_rate_check(const ProperFunctional& phi, const Vec& x0, const Vec& x, double t,
                                         double flow_tol = 1e-6, double tolerance = 1e-6,
                                         const FlowOptions& opt = {}) {
  if (phi.lambda < 0.0) throw DomainError("decay_rate_check: requires lambda >= 0");
  if (!(t > 0.0)) throw DomainError("decay_rate_check: t must be positive");
  FlowOptions o = opt;
  o.envelopes = false;
  const FlowResult fr = gradient_flow(phi, x0, {t}, flow_tol, o);
  InequalityReport rep;
  rep.lhs = fr.energies.back() - phi(x);
  rep.rhs = phi.norm2(x0 - x) / (2.0 * kappa(t, phi.lambda));
  rep.slack = rep.rhs - rep.lhs;
  rep.ok = rep.slack >= -tolerance;
  return rep;
}

struct EviReport {
  std::vector<double> times;
  std::vector<double> residuals;
  double tolerance = 0.0;
  double max_violation = 0.0;
  bool ok = true;
};

// 1/2 d/dt ||u - v||^2 + lambda/2 ||u - v||^2 + Phi(u) - Phi(v) at interior grid times,
// derivative by central differences. The allowance is 2 C h^2 with C the largest third
// divided difference of 1/2 ||u - v||^2 on the grid.
inline EviReport evi_residual(const FlowResult& flow, const ProperFunctional& phi, const Vec& v) {
  const auto& tr = flow.trajectory;
  const std::size_t N = tr.times.size();
  if (N < 3) throw InputError("evi_residual: need at least 3 times");
  std::vector<double> q(N);
  for (std::size_t k = 0; k < N; ++k) q[k] = 0.5 * phi.norm2(tr.states[k] - v);
  const double fv = phi(v);

  double C = 0.0, hmax = 0.0;
  for (std::size_t k = 0; k + 1 < N; ++k) hmax = std::max(hmax, tr.times[k + 1] - tr.times[k]);
  for (std::size_t k = 0; k + 3 < N; ++k) {
    const double* t = &tr.times[k];
    auto d1 = [&](std::size_t i) { return (q[k + i + 1] - q[k + i]) / (t[i + 1] - t[i]); };
    const double d2a = (d1(1) - d1(0)) / (t[2] - t[0]);
    const double d2b = (d1(2) - d1(1)) / (t[3] - t[1]);
    C = std::max(C, std::abs((d2b - d2a) / (t[3] - t[0])));
  }
  EviReport rep;
  const bool skip_first = !std::isfinite(phi.value(flow.x0));
  double scale = 1.0;
  for (std::size_t k = 1; k + 1 < N; ++k) {
    if (k == 1 && skip_first) continue;
    const double dq = (q[k + 1] - q[k - 1]) / (tr.times[k + 1] - tr.times[k - 1]);
    const double fu = phi(tr.states[k]);
    const double r = dq + phi.lambda * q[k] + fu - fv;
    scale = std::max({scale, std::abs(fu), std::abs(fv), q[k]});
    rep.times.push_back(tr.times[k]);
    rep.residuals.push_back(r);
  }
  rep.tolerance = 2.0 * C * hmax * hmax + 1e-12 * scale;
  for (double r : rep.residuals) rep.max_violation = std::max(rep.max_violation, r);
  rep.ok = rep.max_violation <= rep.tolerance;
  return rep;
}

struct MetricDerivative {
  std::vector<double> speeds;
  double energy_integral = 0.0;  // int |u'|^2 of the piecewise-linear interpolant
};

inline MetricDerivative metric_derivative(const Trajectory& tr, const Vec& weights = Vec()) {
  if (tr.times.size() < 2) throw InputError("metric_derivative: need at least 2 times");
  MetricDerivative md;
  for (std::size_t k = 0; k + 1 < tr.times.size(); ++k) {
    const double h = tr.times[k + 1] - tr.times[k];
    const Vec d = tr.states[k + 1] - tr.states[k];
    const double s = (weights.size() ? wnorm(d, weights) : d.norm()) / h;
    md.speeds.push_back(s);
    md.energy_integral += s * s * h;
  }
  return md;
}

}  // namespace gfstack
