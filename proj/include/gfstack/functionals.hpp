#pragma once

#include "gfstack/convex_core.hpp"

#include <Eigen/Eigenvalues>

#include <memory>

namespace gfstack {

// Eigen-decomposition of W^{-1/2} Q W^{-1/2} for a quadratic form u -> u^T Q u / 2
// on the weighted space. Every resolvent power and the exact flow are diagonal here.
struct QuadraticSpectrum {
  Mat V;
  Vec eig;
  Vec sqrtw;

  QuadraticSpectrum(const Mat& Q, const Vec& w) : sqrtw(w.array().sqrt()) {
    const Vec isw = sqrtw.cwiseInverse();
    const Mat M = isw.asDiagonal() * Q * isw.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
    if (es.info() != Eigen::Success) throw SolverError("quadratic form: eigensolver failed", Vec(), 0.0);
    V = es.eigenvectors();
    eig = es.eigenvalues();
  }

  template <typename F>
  Vec apply(const Vec& x, F&& f) const {
    Vec c = V.transpose() * (sqrtw.array() * x.array()).matrix();
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= f(eig[i]);
    return ((V * c).array() / sqrtw.array()).matrix();
  }

  Vec resolvent_power(double gamma, long long n, const Vec& x) const {
    return apply(x, [&](double l) { return std::exp(-static_cast<double>(n) * std::log1p(gamma * l)); });
  }

  Vec flow(double t, const Vec& x) const {
    return apply(x, [&](double l) { return std::exp(-t * l); });
  }
};

struct QuadraticForm {
  Mat Q;
  Vec weights;
  std::shared_ptr<const QuadraticSpectrum> spectrum;

  QuadraticForm(Mat q, Vec w)
      : Q(std::move(q)), weights(std::move(w)),
        spectrum(std::make_shared<const QuadraticSpectrum>(Q, weights)) {}

  double operator()(const Vec& u) const { return 0.5 * u.dot(Q * u); }
  double min_eigenvalue() const { return spectrum->eig.minCoeff(); }
  Vec exact_flow(double t, const Vec& x) const { return spectrum->flow(t, x); }
};

inline ProperFunctional make_functional(const QuadraticForm& qf, std::string name,
                                        std::optional<double> lambda = std::nullopt) {
  ProperFunctional f;
  f.dim = static_cast<int>(qf.Q.rows());
  f.weights = qf.weights;
  f.name = std::move(name);
  f.lambda = lambda ? *lambda : std::max(0.0, qf.min_eigenvalue());
  if (f.lambda > 0.0 && f.lambda < 1e-12 * (1.0 + qf.spectrum->eig.cwiseAbs().maxCoeff())) f.lambda = 0.0;
  f.value = [qf](const Vec& u) { return qf(u); };
  f.gradient = [qf](const Vec& u) -> Vec { return qf.Q * u; };
  f.hessian = [qf](const Vec&) -> Mat { return qf.Q; };
  auto sp = qf.spectrum;
  f.prox_closed_form = [sp](double g, const Vec& x) { return sp->resolvent_power(g, 1, x); };
  f.prox_power = [sp](double g, long long n, const Vec& x) { return sp->resolvent_power(g, n, x); };
  return f;
}

inline ProperFunctional zero_functional(int dim, Vec weights = Vec()) {
  ProperFunctional f;
  f.dim = dim;
  f.weights = weights.size() ? weights : unit_weights(dim);
  f.name = "zero";
  f.value = [](const Vec&) { return 0.0; };
  f.gradient = [](const Vec& x) -> Vec { return Vec::Zero(x.size()); };
  f.prox_closed_form = [](double, const Vec& x) { return x; };
  f.prox_power = [](double, long long, const Vec& x) { return x; };
  return f;
}

inline ProperFunctional constant_functional(int dim, double c) {
  ProperFunctional f = zero_functional(dim);
  f.name = "constant";
  f.value = [c](const Vec&) { return c; };
  return f;
}

// lambda/2 ||x||_W^2
inline ProperFunctional quadratic_functional(double lambda, int dim = 1, Vec weights = Vec()) {
  ProperFunctional f;
  f.dim = dim;
  f.weights = weights.size() ? weights : unit_weights(dim);
  f.lambda = lambda;
  f.name = "quadratic";
  const Vec w = f.weights;
  f.value = [lambda, w](const Vec& x) { return 0.5 * lambda * wnorm2(x, w); };
  f.gradient = [lambda, w](const Vec& x) -> Vec { return lambda * (w.array() * x.array()).matrix(); };
  f.hessian = [lambda, w](const Vec&) -> Mat { return Mat(lambda * w.asDiagonal()); };
  f.prox_closed_form = [lambda](double g, const Vec& x) -> Vec { return x / (1.0 + g * lambda); };
  f.prox_power = [lambda](double g, long long n, const Vec& x) -> Vec {
    return x * std::exp(-static_cast<double>(n) * std::log1p(g * lambda));
  };
  return f;
}

inline double soft_threshold(double x, double tau) {
  if (x > tau) return x - tau;
  if (x < -tau) return x + tau;
  return 0.0;
}

// sum_i w_i |x_i|, the L^1(mu) norm; its weighted prox is plain soft thresholding.
inline ProperFunctional abs_functional(int dim = 1, Vec weights = Vec()) {
  ProperFunctional f;
  f.dim = dim;
  f.weights = weights.size() ? weights : unit_weights(dim);
  f.name = "abs";
  const Vec w = f.weights;
  f.value = [w](const Vec& x) { return (w.array() * x.array().abs()).sum(); };
  f.prox_closed_form = [](double g, const Vec& x) -> Vec {
    return x.unaryExpr([g](double v) { return soft_threshold(v, g); });
  };
  f.prox_power = [](double g, long long n, const Vec& x) -> Vec {
    const double tau = g * static_cast<double>(n);
    return x.unaryExpr([tau](double v) { return soft_threshold(v, tau); });
  };
  return f;
}

// sum_i w_i (x_i^4/4 - x_i^2/2), (-1)-convex
inline ProperFunctional double_well_functional(int dim = 1, Vec weights = Vec()) {
  ProperFunctional f;
  f.dim = dim;
  f.weights = weights.size() ? weights : unit_weights(dim);
  f.lambda = -1.0;
  f.name = "double_well";
  const Vec w = f.weights;
  f.value = [w](const Vec& x) {
    return (w.array() * (0.25 * x.array().pow(4) - 0.5 * x.array().square())).sum();
  };
  f.gradient = [w](const Vec& x) -> Vec { return (w.array() * (x.array().cube() - x.array())).matrix(); };
  f.hessian = [w](const Vec& x) -> Mat {
    return Mat((w.array() * (3.0 * x.array().square() - 1.0)).matrix().asDiagonal());
  };
  return f;
}

inline ProperFunctional softplus_functional(int dim = 1, Vec weights = Vec()) {
  ProperFunctional f;
  f.dim = dim;
  f.weights = weights.size() ? weights : unit_weights(dim);
  f.name = "softplus";
  const Vec w = f.weights;
  auto sp = [](double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); };
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  f.value = [w, sp](const Vec& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += w[i] * sp(x[i]);
    return s;
  };
  f.gradient = [w, sig](const Vec& x) -> Vec {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = w[i] * sig(x[i]);
    return g;
  };
  f.hessian = [w, sig](const Vec& x) -> Mat {
    Vec h(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) h[i] = w[i] * sig(x[i]) * (1.0 - sig(x[i]));
    return Mat(h.asDiagonal());
  };
  return f;
}

// Indicator of the box [lo, hi]^dim.
inline ProperFunctional box_indicator(int dim = 1, double lo = -1.0, double hi = 1.0) {
  ProperFunctional f;
  f.dim = dim;
  f.weights = unit_weights(dim);
  f.name = "box_indicator";
  f.value = [lo, hi](const Vec& x) {
    return ((x.array() >= lo) && (x.array() <= hi)).all() ? 0.0 : kInf;
  };
  f.prox_closed_form = [lo, hi](double, const Vec& x) -> Vec { return x.cwiseMax(lo).cwiseMin(hi); };
  f.prox_power = [lo, hi](double, long long, const Vec& x) -> Vec { return x.cwiseMax(lo).cwiseMin(hi); };
  f.domain_hint = Box{Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
  return f;
}

// (lambda+1)(u1+u2)^2 + lambda/2 (u1^2+u2^2) on the two-atom measure with weights 1/2.
// Lambda-convex, but not P0-convex.
inline QuadraticForm counterexample_form(double lambda) {
  Mat Q(2, 2);
  Q << 1.0, 1.0, 1.0, 1.0;
  Q *= 2.0 * (lambda + 1.0);
  Q += lambda * Mat::Identity(2, 2);
  return QuadraticForm(Q, Vec::Constant(2, 0.5));
}

inline ProperFunctional counterexample_functional(double lambda) {
  if (lambda < 0.0) throw DomainError("counterexample: lambda must be >= 0");
  return make_functional(counterexample_form(lambda), "counterexample", lambda);
}

}  // namespace gfstack
