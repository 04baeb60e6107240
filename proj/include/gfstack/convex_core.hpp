#pragma once

#include "gfstack/common.hpp"

#include <boost/math/tools/minima.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gfstack {

struct Box {
  Vec lo;
  Vec hi;
};

// A functional on R^dim with the weighted inner product <a,b> = sum_i w_i a_i b_i.
// Only dim, weights, value and lambda are mandatory. The optional callables are
// fast paths: prox_closed_form(gamma, x), prox_power(gamma, n, x) = J_gamma^n(x),
// gradient / hessian in Euclidean coordinates for the Newton prox solver.
struct ProperFunctional {
  int dim = 1;
  Vec weights;
  std::function<double(const Vec&)> value;
  double lambda = 0.0;
  std::function<Vec(double, const Vec&)> prox_closed_form;
  std::function<Vec(double, long long, const Vec&)> prox_power;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
  std::optional<Box> domain_hint;
  std::string name;

  double operator()(const Vec& x) const { return finite_or_throw(value(x), "functional value"); }
  double norm2(const Vec& a) const { return wnorm2(a, weights); }
  double norm(const Vec& a) const { return wnorm(a, weights); }
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

// (e^{2 lambda t} - 1) / (2 lambda), and t at lambda = 0.
inline double kappa(double t, double lambda) {
  if (!(t > 0.0)) throw DomainError("kappa: t must be positive, got " + std::to_string(t));
  const double z = 2.0 * lambda * t;
  if (std::abs(z) < 1e-6) {
    const double lt = lambda * t;
    return t * (1.0 + lt + (2.0 / 3.0) * lt * lt + (1.0 / 3.0) * lt * lt * lt);
  }
  return std::expm1(z) / (2.0 * lambda);
}

inline void check_prox_step(const ProperFunctional& phi, double gamma, const char* who) {
  require_in_interval(-phi.lambda, gamma, who);
}

namespace detail {

inline double prox_objective(const ProperFunctional& phi, double gamma, const Vec& x, const Vec& y) {
  const double v = phi.value(y);
  if (std::isinf(v)) return kInf;
  return v + phi.norm2(y - x) / (2.0 * gamma);
}

inline Mat fd_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& y) {
  const Eigen::Index n = y.size();
  Mat H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(y[i]));
    Vec yp = y, ym = y;
    yp[i] += h;
    ym[i] -= h;
    H.col(i) = (grad(yp) - grad(ym)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

inline Vec newton_prox(const ProperFunctional& phi, double gamma, const Vec& x, const SolverOptions& opt) {
  const Mat Wg = phi.weights.asDiagonal();
  Vec y = x;
  double fy = prox_objective(phi, gamma, x, y);
  double res = kInf;
  for (int it = 0; it < opt.max_iter; ++it) {
    const Vec gphi = phi.gradient(y);
    const Vec pull = (Wg * (y - x)) / gamma;
    const Vec g = gphi + pull;
    const double scale = 1.0 + std::max(gphi.lpNorm<Eigen::Infinity>(), pull.lpNorm<Eigen::Infinity>());
    res = g.lpNorm<Eigen::Infinity>();
    // rounding floor of W (y - x) / gamma
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() *
                         std::max(x.lpNorm<Eigen::Infinity>(), y.lpNorm<Eigen::Infinity>()) *
                         phi.weights.maxCoeff() / gamma;
    if (res <= opt.tol * scale + floor) return y;

    Mat H = phi.hessian ? phi.hessian(y) : fd_hessian(phi.gradient, y);
    H += Wg / gamma;
    Vec d = H.ldlt().solve(-g);
    if (!d.allFinite() || g.dot(d) >= 0.0) d = -gamma * (g.array() / phi.weights.array()).matrix();

    double s = 1.0;
    const double slope = g.dot(d);
    double fn = prox_objective(phi, gamma, x, y + d);
    // Near the optimum the decrease drops below rounding of the objective; then
    // a full step is accepted if it shrinks the gradient.
    if (!(fn <= fy + 1e-4 * slope) && std::abs(fn - fy) <= 1e-13 * (1.0 + std::abs(fy))) {
      const Vec yn = y + d;
      const Vec gn = phi.gradient(yn) + (Wg * (yn - x)) / gamma;
      if (gn.lpNorm<Eigen::Infinity>() < res) {
        y = yn;
        fy = fn;
        continue;
      }
    }
    while (!(fn <= fy + 1e-4 * s * slope) && s > 1e-20) {
      s *= 0.5;
      fn = prox_objective(phi, gamma, x, y + s * d);
    }
    if (s <= 1e-20) {
      // Stuck at the rounding floor: accept if the residual is already small.
      if (res <= 1e-7 * scale) return y;
      break;
    }
    y += s * d;
    fy = fn;
  }
  throw SolverError("prox: Newton solver did not converge", y, res);
}

inline Vec coordinate_prox(const ProperFunctional& phi, double gamma, const Vec& x, const SolverOptions& opt) {
  Vec y = x;
  if (std::isinf(prox_objective(phi, gamma, x, y))) {
    if (!phi.domain_hint) throw DomainError("prox: x outside the domain and no domain hint to start from");
    y = 0.5 * (phi.domain_hint->lo + phi.domain_hint->hi);
    if (std::isinf(prox_objective(phi, gamma, x, y)))
      throw DomainError("prox: no finite starting point found");
  }
  double fprev = prox_objective(phi, gamma, x, y);
  double res = kInf;
  for (int sweep = 0; sweep < opt.max_iter; ++sweep) {
    double maxstep = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double c = y[i];
      Vec trial = y;
      auto h = [&](double s) {
        trial[i] = s;
        return prox_objective(phi, gamma, x, trial);
      };
      const double hc = h(c);
      double delta = 1e-3 * (1.0 + std::abs(c));
      int k = 0;
      while ((h(c - delta) < hc || h(c + delta) < hc) && k < 200) {
        delta *= 2.0;
        ++k;
      }
      const auto r = boost::math::tools::brent_find_minima(h, c - delta, c + delta,
                                                           std::numeric_limits<double>::digits);
      if (r.second <= hc) {
        maxstep = std::max(maxstep, std::abs(r.first - c));
        y[i] = r.first;
      }
    }
    const double fy = prox_objective(phi, gamma, x, y);
    res = maxstep;
    if (maxstep <= opt.tol * (1.0 + y.lpNorm<Eigen::Infinity>())) return y;
    if (fprev - fy <= 1e-15 * (1.0 + std::abs(fy)) && maxstep <= 1e-6 * (1.0 + y.lpNorm<Eigen::Infinity>()))
      return y;
    fprev = fy;
  }
  throw SolverError("prox: coordinate descent did not converge", y, res);
}

}  // namespace detail

inline Vec prox(const ProperFunctional& phi, double gamma, const Vec& x, const SolverOptions& opt = {}) {
  if (x.size() != phi.dim) throw InputError("prox: dimension mismatch");
  check_prox_step(phi, gamma, "prox");
  if (phi.prox_closed_form) return phi.prox_closed_form(gamma, x);
  if (phi.gradient) return detail::newton_prox(phi, gamma, x, opt);
  return detail::coordinate_prox(phi, gamma, x, opt);
}

// J_gamma^n(x): closed-form power when the functional has one, repeated prox otherwise.
inline Vec prox_power(const ProperFunctional& phi, double gamma, long long n, const Vec& x,
                      const SolverOptions& opt = {}) {
  check_prox_step(phi, gamma, "prox_power");
  if (phi.prox_power) return phi.prox_power(gamma, n, x);
  Vec y = x;
  for (long long k = 0; k < n; ++k) y = prox(phi, gamma, y, opt);
  return y;
}

inline double moreau_envelope(const ProperFunctional& phi, double gamma, const Vec& x,
                              const SolverOptions& opt = {}) {
  const Vec p = prox(phi, gamma, x, opt);
  return ext_add(phi(p), phi.norm2(p - x) / (2.0 * gamma));
}

// The envelope as a functional in its own right. Its gradient is W (x - prox) / gamma
// and it is lambda / (1 + gamma lambda)-convex.
inline ProperFunctional envelope_functional(const ProperFunctional& phi, double gamma) {
  check_prox_step(phi, gamma, "envelope_functional");
  ProperFunctional env;
  env.dim = phi.dim;
  env.weights = phi.weights;
  env.lambda = phi.lambda / (1.0 + gamma * phi.lambda);
  env.value = [phi, gamma](const Vec& x) { return moreau_envelope(phi, gamma, x); };
  env.gradient = [phi, gamma](const Vec& x) -> Vec {
    const Vec p = prox(phi, gamma, x);
    return (phi.weights.array() * (x - p).array()).matrix() / gamma;
  };
  env.domain_hint = phi.domain_hint;
  env.name = "envelope(" + phi.name + ")";
  return env;
}

struct LambdaTriple {
  Vec x;
  Vec y;
  double t = 0.5;
};

struct TripleSampler {
  std::uint64_t seed = 0;
  std::function<LambdaTriple(Rng&)> draw;
};

inline TripleSampler box_sampler(int dim, double lo, double hi, std::uint64_t seed) {
  return {seed, [dim, lo, hi](Rng& rng) {
            LambdaTriple tr;
            tr.x = uniform_vec(rng, dim, lo, hi);
            tr.y = uniform_vec(rng, dim, lo, hi);
            tr.t = uniform(rng, 0.0, 1.0);
            return tr;
          }};
}

struct LambdaViolation {
  LambdaTriple triple;
  double lhs = 0.0;
  double rhs = 0.0;
  double excess = 0.0;
};

struct LambdaConvexityReport {
  std::vector<LambdaViolation> violations;
  double max_slack_violation = 0.0;
  int samples = 0;
};

inline void lambda_convexity_eval(const ProperFunctional& phi, double lambda, const LambdaTriple& tr,
                                  double tol, LambdaConvexityReport& rep) {
  const double fx = phi(tr.x), fy = phi(tr.y);
  ++rep.samples;
  if (std::isinf(fx) || std::isinf(fy)) return;
  const double t = tr.t;
  const double lhs = phi(t * tr.x + (1.0 - t) * tr.y);
  const double rhs = t * fx + (1.0 - t) * fy - 0.5 * lambda * t * (1.0 - t) * phi.norm2(tr.x - tr.y);
  const double excess = lhs - rhs;
  if (excess > tol * (1.0 + std::abs(rhs))) {
    rep.violations.push_back({tr, lhs, rhs, excess});
    rep.max_slack_violation = std::max(rep.max_slack_violation, excess);
  }
}

inline LambdaConvexityReport check_lambda_convexity(const ProperFunctional& phi, double lambda,
                                                    const std::vector<LambdaTriple>& triples,
                                                    double tol = 1e-9) {
  LambdaConvexityReport rep;
  for (const auto& tr : triples) lambda_convexity_eval(phi, lambda, tr, tol, rep);
  return rep;
}

inline LambdaConvexityReport check_lambda_convexity(const ProperFunctional& phi, double lambda,
                                                    const TripleSampler& sampler, int n_samples,
                                                    double tol = 1e-9) {
  if (n_samples < 1) throw InputError("check_lambda_convexity: n_samples must be >= 1");
  Rng rng(sampler.seed);
  LambdaConvexityReport rep;
  for (int k = 0; k < n_samples; ++k) lambda_convexity_eval(phi, lambda, sampler.draw(rng), tol, rep);
  return rep;
}

}  // namespace gfstack
