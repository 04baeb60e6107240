#pragma once

#include "gfstack/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gfstack {

// An omega-accretive operator seen only through its resolvent (lam, x) -> (I + lam A)^{-1} x.
// iterate(lam, n, x) is an optional fast path for the n-fold composition.
struct ResolventOperator {
  int dim = 1;
  double omega = 0.0;
  std::function<Vec(double, const Vec&)> resolve;
  std::function<bool(const Vec&)> domain_closure;
  std::function<double(const Vec&)> inf_norm_A;
  std::function<Vec(double, long long, const Vec&)> iterate;
  Vec weights;

  double norm(const Vec& a) const { return weights.size() ? wnorm(a, weights) : a.norm(); }
  bool in_domain(const Vec& x) const { return !domain_closure || domain_closure(x); }
};

inline ResolventOperator zero_operator(int dim) {
  ResolventOperator R;
  R.dim = dim;
  R.resolve = [](double, const Vec& x) { return x; };
  R.iterate = [](double, long long, const Vec& x) { return x; };
  R.inf_norm_A = [](const Vec&) { return 0.0; };
  return R;
}

// Resolvent of A x = c x (the subdifferential of c x^2 / 2), omega = -c.
inline ResolventOperator linear_scalar_operator(int dim, double c) {
  ResolventOperator R;
  R.dim = dim;
  R.omega = -c;
  R.resolve = [c](double l, const Vec& x) -> Vec { return x / (1.0 + l * c); };
  R.iterate = [c](double l, long long n, const Vec& x) -> Vec {
    return x * std::exp(-static_cast<double>(n) * std::log1p(l * c));
  };
  R.inf_norm_A = [c](const Vec& x) { return std::abs(c) * x.norm(); };
  return R;
}

struct TrajectoryMeta {
  long long steps = 0;
  bool certified = false;
  std::string note;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> error_bounds;
  TrajectoryMeta meta;

  // Piecewise-constant interpolant: state v_i on (t_{i-1}, t_i].
  const Vec& at(double t) const {
    if (times.empty()) throw InputError("trajectory: empty");
    for (std::size_t i = 0; i < times.size(); ++i)
      if (t <= times[i]) return states[i];
    return states.back();
  }
};

inline Vec resolvent_iterate(const ResolventOperator& R, double t, long long n, const Vec& x) {
  if (n < 1) throw InputError("resolvent_iterate: n must be >= 1");
  const double h = t / static_cast<double>(n);
  require_in_interval(R.omega, h, "resolvent_iterate");
  if (!R.in_domain(x)) throw DomainError("resolvent_iterate: x outside the closure of D(A)");
  if (R.iterate) return R.iterate(h, n, x);
  Vec y = x;
  for (long long k = 0; k < n; ++k) y = R.resolve(h, y);
  return y;
}

// ||(x - R_{l0} x) / l0|| with l0 = 1e-4 * min(width of the resolvent interval, 1).
inline double default_inf_norm(const ResolventOperator& R, const Vec& x) {
  const double l0 = 1e-4 * std::min(interval_upper(R.omega), 1.0);
  return R.norm(x - R.resolve(l0, x)) / l0;
}

inline double inf_norm_A(const ResolventOperator& R, const Vec& x) {
  return R.inf_norm_A ? R.inf_norm_A(x) : default_inf_norm(R, x);
}

// The a-priori error of n resolvent steps in the form 2t/sqrt(n) |A x| e^{4 omega t}.
inline double cl_apriori_bound(double t, long long n, double inf_norm, double omega) {
  return 2.0 * t / std::sqrt(static_cast<double>(n)) * inf_norm * std::exp(4.0 * omega * t);
}

struct CLOptions {
  long long max_n = 1LL << 30;
  // Without a fast iterate, the a-priori route is only taken up to this many steps.
  long long slow_certify_cap = 1LL << 22;
};

struct CLCertificate {
  double bound = 0.0;
  bool certified = false;
  long long n = 0;
  std::vector<double> estimates;
};

struct CLResult {
  Vec point;
  CLCertificate cert;
};

namespace detail {

inline long long first_admissible_power(double t, double omega) {
  long long n = 1;
  while (!in_interval(omega, t / static_cast<double>(n))) n *= 2;
  return n;
}

inline long long apriori_steps(double t, double a, double omega, double tol) {
  const double wp = std::max(omega, 0.0);
  const double s = 2.0 * t * a * std::exp(4.0 * wp * t) / tol;
  const double n = std::ceil(s * s);
  if (!(n < 9.0e18)) return -1;
  return std::max<long long>(1, static_cast<long long>(n));
}

}  // namespace detail

// Approximates S_A(t) x. With a usable a-priori step count the result is certified
// by the bound with omega replaced by max(omega, 0); otherwise n is doubled until
// two consecutive iterates agree to tol/2 and the finer one is returned.
inline CLResult crandall_liggett(const ResolventOperator& R, double t, const Vec& x, double tol,
                                 const CLOptions& opt = {}) {
  if (!(tol > 0.0)) throw InputError("crandall_liggett: tol must be positive");
  if (!R.in_domain(x)) throw DomainError("crandall_liggett: x outside the closure of D(A)");
  CLResult out;
  if (t == 0.0) {
    out.point = x;
    out.cert.certified = true;
    return out;
  }
  if (!(t > 0.0)) throw DomainError("crandall_liggett: t must be nonnegative");

  const double a = inf_norm_A(R, x);
  if (a == 0.0) {
    out.point = x;
    out.cert.certified = true;
    return out;
  }
  if (std::isfinite(a)) {
    long long n = detail::apriori_steps(t, a, R.omega, tol);
    if (n > 0) {
      while (!in_interval(R.omega, t / static_cast<double>(n))) ++n;
      const bool cheap = static_cast<bool>(R.iterate) || n <= opt.slow_certify_cap;
      if (n <= opt.max_n && cheap) {
        out.point = resolvent_iterate(R, t, n, x);
        out.cert.n = n;
        out.cert.certified = true;
        out.cert.bound = cl_apriori_bound(t, n, a, std::max(R.omega, 0.0));
        return out;
      }
    }
  }

  long long n = detail::first_admissible_power(t, R.omega);
  Vec prev = resolvent_iterate(R, t, n, x);
  while (true) {
    const long long n2 = 2 * n;
    if (n2 > opt.max_n)
      throw SolverError("crandall_liggett: no convergence within " + std::to_string(opt.max_n) + " steps",
                        prev, out.cert.estimates.empty() ? kInf : out.cert.estimates.back());
    Vec cur = resolvent_iterate(R, t, n2, x);
    const double est = R.norm(cur - prev);
    out.cert.estimates.push_back(est);
    if (est <= tol / 2.0) {
      out.point = std::move(cur);
      out.cert.n = n2;
      out.cert.bound = tol;
      out.cert.certified = false;
      return out;
    }
    prev = std::move(cur);
    n = n2;
  }
}

struct AccretivePair {
  Vec x, y;    // y in A(x)
  Vec xh, yh;  // yh in A(xh)
};

struct AccretiveViolation {
  std::size_t pair = 0;
  double lambda = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

struct AccretiveReport {
  std::vector<AccretiveViolation> violations;
  int checked = 0;
};

// ||x - xh + l (y - yh)|| >= (1 - l omega) ||x - xh|| for every pair and l.
inline AccretiveReport check_accretive(const std::vector<AccretivePair>& pairs, double omega,
                                       const std::vector<double>& lambdas, double tol = 1e-12) {
  for (double l : lambdas) require_in_interval(omega, l, "check_accretive");
  AccretiveReport rep;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    for (double l : lambdas) {
      const double lhs = (p.x - p.xh + l * (p.y - p.yh)).norm();
      const double rhs = (1.0 - l * omega) * (p.x - p.xh).norm();
      ++rep.checked;
      if (lhs < rhs - tol * (1.0 + rhs)) rep.violations.push_back({k, l, lhs, rhs, lhs - rhs});
    }
  }
  return rep;
}

// Backward-Euler sequence v_i = R_{t_i - t_{i-1}} v_{i-1}.
inline Trajectory eps_approximate_solution(const ResolventOperator& R, const std::vector<double>& partition,
                                           const Vec& x) {
  if (partition.empty() || partition.front() != 0.0)
    throw InputError("eps_approximate_solution: partition must start at 0");
  if (!R.in_domain(x)) throw DomainError("eps_approximate_solution: x outside the closure of D(A)");
  Trajectory tr;
  tr.times.push_back(0.0);
  tr.states.push_back(x);
  for (std::size_t i = 1; i < partition.size(); ++i) {
    const double h = partition[i] - partition[i - 1];
    require_in_interval(R.omega, h, "eps_approximate_solution");
    tr.times.push_back(partition[i]);
    tr.states.push_back(R.resolve(h, tr.states.back()));
  }
  tr.meta.steps = static_cast<long long>(partition.size()) - 1;
  return tr;
}

struct ContractionReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double certificate = 0.0;
  bool ok = false;
};

// ||S(t)x - S(t)y|| <= e^{omega t} ||x - y||, both flows by crandall_liggett.
inline ContractionReport semigroup_contraction_check(const ResolventOperator& R, double t, const Vec& x,
                                                     const Vec& y, double tol, const CLOptions& opt = {}) {
  const CLResult ux = crandall_liggett(R, t, x, tol, opt);
  const CLResult uy = crandall_liggett(R, t, y, tol, opt);
  ContractionReport rep;
  rep.lhs = R.norm(ux.point - uy.point);
  rep.rhs = std::exp(R.omega * t) * R.norm(x - y);
  rep.slack = rep.rhs - rep.lhs;
  rep.certificate = ux.cert.bound + uy.cert.bound;
  rep.ok = rep.slack >= -rep.certificate - 1e-12;
  return rep;
}

}  // namespace gfstack
