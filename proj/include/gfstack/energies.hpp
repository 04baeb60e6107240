#pragma once

#include "gfstack/functionals.hpp"
#include "gfstack/gradient_flow.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <memory>
#include <vector>

namespace gfstack {

enum class LossKind { Squared, Absolute, Custom };

// A convex even loss with its scalar prox argmin_s L(s) + (s - r)^2 / (2 tau).
struct ConvexLoss {
  std::function<double(double)> L;
  std::function<double(double, double)> prox;
};

// Phi(u) = sum_ij A_ij L(u_i - u_j) on the weighted space of node_weights.
struct GraphEnergy {
  int n_nodes = 0;
  Mat A;
  LossKind loss = LossKind::Squared;
  ConvexLoss custom;
  Vec node_weights;

  double loss_value(double r) const {
    switch (loss) {
      case LossKind::Squared: return r * r;
      case LossKind::Absolute: return std::abs(r);
      case LossKind::Custom: return custom.L(r);
    }
    return 0.0;
  }

  double operator()(const Vec& u) const {
    double s = 0.0;
    for (int i = 0; i < n_nodes; ++i)
      for (int j = 0; j < n_nodes; ++j)
        if (A(i, j) != 0.0) s += A(i, j) * loss_value(u[i] - u[j]);
    return s;
  }

  // Phi = u^T L u for the squared loss.
  Mat laplacian() const {
    const Vec deg = A.rowwise().sum() + A.colwise().sum().transpose();
    return Mat(deg.asDiagonal()) - A - A.transpose();
  }
};

inline GraphEnergy make_graph_energy(const Mat& A, const Vec& node_weights, LossKind loss = LossKind::Squared,
                                     ConvexLoss custom = {}) {
  if (A.rows() != A.cols()) throw InputError("graph energy: adjacency must be square");
  if ((A.array() < 0.0).any()) throw InputError("graph energy: adjacency entries must be nonnegative");
  if (node_weights.size() != A.rows()) throw InputError("graph energy: one weight per node");
  if ((node_weights.array() <= 0.0).any()) throw InputError("graph energy: node weights must be positive");
  if (loss == LossKind::Custom && (!custom.L || !custom.prox))
    throw InputError("graph energy: custom loss needs L and its prox");
  GraphEnergy ge;
  ge.n_nodes = static_cast<int>(A.rows());
  ge.A = A;
  ge.loss = loss;
  ge.custom = std::move(custom);
  ge.node_weights = node_weights;
  return ge;
}

// Random symmetric-support adjacency with entries in [0, 1), density `fill`.
inline Mat random_adjacency(int n, Rng& rng, double fill = 0.6) {
  Mat A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && uniform(rng, 0.0, 1.0) < fill) A(i, j) = uniform(rng, 0.0, 1.0);
  return A;
}

namespace detail {

struct Edge {
  int i, j;
  double a;
};

inline std::vector<Edge> edges_of(const GraphEnergy& ge) {
  std::vector<Edge> e;
  for (int i = 0; i < ge.n_nodes; ++i)
    for (int j = 0; j < ge.n_nodes; ++j)
      if (i != j && ge.A(i, j) > 0.0) e.push_back({i, j, ge.A(i, j)});
  return e;
}

// Dual projected gradient with momentum and adaptive restart for sum a_e |u_i - u_j|.
inline Vec tv_prox(const GraphEnergy& ge, double gamma, const Vec& h) {
  const auto E = edges_of(ge);
  if (E.empty()) return h;
  const Vec& w = ge.node_weights;
  std::vector<int> deg(static_cast<std::size_t>(ge.n_nodes), 0);
  for (const auto& e : E) ++deg[e.i], ++deg[e.j];
  double lmax = 0.0;
  for (const auto& e : E) lmax = std::max(lmax, deg[e.i] / w[e.i] + deg[e.j] / w[e.j]);
  const double step = 1.0 / (gamma * lmax);
  const std::size_t m = E.size();

  auto primal = [&](const Vec& p) {
    Vec g = Vec::Zero(ge.n_nodes);
    for (std::size_t k = 0; k < m; ++k) {
      g[E[k].i] += p[k];
      g[E[k].j] -= p[k];
    }
    return Vec(h - gamma * (g.array() / w.array()).matrix());
  };
  auto diff = [&](const Vec& u, std::size_t k) { return u[E[k].i] - u[E[k].j]; };
  auto gap_of = [&](const Vec& p, const Vec& u, double& tv) {
    double gap = 0.0;
    tv = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double d = diff(u, k);
      tv += E[k].a * std::abs(d);
      gap += E[k].a * std::abs(d) - p[k] * d;
    }
    return gap;
  };

  Vec p = Vec::Zero(static_cast<Eigen::Index>(m)), pprev = p, y = p;
  double tk = 1.0;
  Vec ucheck = h;
  const double hscale = 1.0 + h.lpNorm<Eigen::Infinity>();
  double gap = kInf;
  for (int it = 1; it <= 100000; ++it) {
    const Vec uy = primal(y);
    Vec pn(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k)
      pn[k] = std::clamp(y[k] + step * diff(uy, k), -E[k].a, E[k].a);
    if ((y - pn).dot(pn - p) > 0.0) {
      tk = 1.0;
      y = pn;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      y = pn + ((tk - 1.0) / tn) * (pn - p);
      tk = tn;
    }
    pprev = p;
    p = pn;
    if (it % 10 == 0) {
      const Vec u = primal(p);
      double tv = 0.0;
      gap = gap_of(p, u, tv);
      const double move = (u - ucheck).lpNorm<Eigen::Infinity>();
      ucheck = u;
      if (gap <= 1e-12 * (1.0 + tv) && move <= 1e-12 * hscale) return u;
    }
  }
  const Vec u = primal(p);
  double tv = 0.0;
  gap = gap_of(p, u, tv);
  if (gap <= 1e-10 * (1.0 + tv)) return u;
  throw SolverError("graph prox: splitting did not reach tolerance", u, gap);
}

// ADMM on z = D u for a general convex loss.
inline Vec admm_prox(const GraphEnergy& ge, double gamma, const Vec& h) {
  const auto E = edges_of(ge);
  if (E.empty()) return h;
  const int n = ge.n_nodes;
  const auto m = static_cast<Eigen::Index>(E.size());
  Mat D = Mat::Zero(m, n);
  for (Eigen::Index k = 0; k < m; ++k) {
    D(k, E[k].i) = 1.0;
    D(k, E[k].j) = -1.0;
  }
  const double rho = 1.0 / gamma;
  const Mat W = ge.node_weights.asDiagonal();
  const Eigen::LDLT<Mat> fac(W / gamma + rho * D.transpose() * D);
  Vec z = D * h, y = Vec::Zero(m), u = h;
  const double scale = 1.0 + h.lpNorm<Eigen::Infinity>();
  double res = kInf;
  for (int it = 0; it < 100000; ++it) {
    u = fac.solve(W * h / gamma + rho * D.transpose() * (z - y));
    const Vec Du = D * u;
    const Vec zold = z;
    for (Eigen::Index k = 0; k < m; ++k) z[k] = ge.custom.prox(E[k].a / rho, Du[k] + y[k]);
    y += Du - z;
    const double r = (Du - z).lpNorm<Eigen::Infinity>();
    const double s = rho * (D.transpose() * (z - zold)).lpNorm<Eigen::Infinity>();
    res = std::max(r, s);
    if (res <= 1e-10 * scale) return u;
  }
  throw SolverError("graph prox: ADMM did not converge", u, res);
}

}  // namespace detail

inline Vec graph_prox(const GraphEnergy& ge, double gamma, const Vec& h) {
  if (!(gamma > 0.0)) throw DomainError("graph_prox: gamma must be positive");
  if (h.size() != ge.n_nodes) throw InputError("graph_prox: size mismatch");
  switch (ge.loss) {
    case LossKind::Squared: {
      const Mat W = ge.node_weights.asDiagonal();
      return (W + 2.0 * gamma * ge.laplacian()).ldlt().solve(W * h);
    }
    case LossKind::Absolute: return detail::tv_prox(ge, gamma, h);
    case LossKind::Custom: return detail::admm_prox(ge, gamma, h);
  }
  return h;
}

inline QuadraticForm graph_quadratic_form(const GraphEnergy& ge) {
  if (ge.loss != LossKind::Squared) throw InputError("graph_quadratic_form: squared loss only");
  return QuadraticForm(2.0 * ge.laplacian(), ge.node_weights);
}

inline ProperFunctional to_functional(const GraphEnergy& ge, std::string name = "graph") {
  ProperFunctional f;
  if (ge.loss == LossKind::Squared) {
    f = make_functional(graph_quadratic_form(ge), std::move(name), 0.0);
    f.value = [ge](const Vec& u) { return ge(u); };
    return f;
  }
  f.dim = ge.n_nodes;
  f.weights = ge.node_weights;
  f.name = std::move(name);
  f.value = [ge](const Vec& u) { return ge(u); };
  f.prox_closed_form = [ge](double g, const Vec& x) { return graph_prox(ge, g, x); };
  return f;
}

namespace detail {

// Normalised smooth step S on [0, 1] built from the bump exp(-1/(1-s^2)), with its
// antiderivative I(z) = int_0^z S, tabulated once and interpolated by cubic Hermite.
class SmoothStepTable {
 public:
  static double bump(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }
  // Composite 20-point Gauss rule on 64 panels.
  static double integrate(const std::function<double(double)>& f, double a, double b) {
    if (b <= a) return 0.0;
    constexpr int kPanels = 64;
    const double h = (b - a) / kPanels;
    double s = 0.0;
    for (int k = 0; k < kPanels; ++k) s += integrate_cell(f, a + k * h, a + (k + 1) * h);
    return s;
  }
  // Fixed 20-point Gauss rule; the table cells are narrow enough for it to be exact to rounding.
  template <typename F>
  static double integrate_cell(const F& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
  }
  static double total() {
    static const double t = integrate([](double z) { return bump(2.0 * z - 1.0); }, 0.0, 1.0);
    return t;
  }
  static double step_exact(double z) {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return integrate([](double s) { return bump(2.0 * s - 1.0); }, 0.0, z) / total();
  }
  static double step_prime(double z) { return bump(2.0 * z - 1.0) / total(); }

  static const SmoothStepTable& get() {
    static const SmoothStepTable table;
    return table;
  }

  double step(double z) const {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return S_->operator()(z);
  }
  double antiderivative(double z) const {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return z - 0.5;
    return I_->operator()(z);
  }

 private:
  using Interp = boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>;
  static constexpr int kCells = 4096;
  std::unique_ptr<Interp> S_, I_;

  SmoothStepTable() {
    const double dx = 1.0 / kCells;
    std::vector<double> s(kCells + 1), ds(kCells + 1), I(kCells + 1), dI(kCells + 1);
    const double tot = total();
    double acc = 0.0, accI = 0.0;
    for (int k = 0; k <= kCells; ++k) {
      const double z = k * dx;
      if (k > 0) {
        const double z0 = z - dx;
        acc += integrate_cell([](double q) { return bump(2.0 * q - 1.0); }, z0, z);
        accI += integrate_cell([](double q) { return q * bump(2.0 * q - 1.0); }, z0, z);
      }
      s[k] = acc / tot;
      ds[k] = step_prime(z);
      // int_0^z S = z S(z) - int_0^z q S'(q) dq
      I[k] = z * s[k] - accI / tot;
      dI[k] = s[k];
    }
    s[kCells] = 1.0;
    S_ = std::make_unique<Interp>(std::move(s), std::move(ds), 0.0, dx);
    I_ = std::make_unique<Interp>(std::move(I), std::move(dI), 0.0, dx);
  }
};

}  // namespace detail

// Smooth g with g = 0 on [-a, a] and 0 <= g' <= slope <= 1. g' rises on [a, a+w],
// stays at `slope`, and falls on [b, b+w] with b = a + cap/slope, so g(inf) = cap.
// The odd extension mirrors this to x < 0; positive_only keeps g = 0 there.
struct P0TestFunction {
  double a = 1.0;
  double w = 1.0;
  double cap = 1e3;
  double slope = 1.0;
  bool positive_only = false;

  double b() const { return a + cap / slope; }
  double support_hi() const { return b() + w; }

  double derivative(double x) const {
    if (x < 0.0 && positive_only) return 0.0;
    const double ax = std::abs(x);
    const auto& T = detail::SmoothStepTable::get();
    return slope * (T.step((ax - a) / w) - T.step((ax - b()) / w));
  }

  double operator()(double x) const {
    if (x < 0.0 && positive_only) return 0.0;
    const double ax = std::abs(x);
    const auto& T = detail::SmoothStepTable::get();
    const double g = slope * w * (T.antiderivative((ax - a) / w) - T.antiderivative((ax - b()) / w));
    return x < 0.0 ? -g : g;
  }

  // Direct quadrature of g' over the two ramps, bypassing the table; g' = slope in between.
  double exact(double x) const {
    if (x < 0.0 && positive_only) return 0.0;
    const double ax = std::abs(x);
    auto gp = [this](double s) {
      using T = detail::SmoothStepTable;
      return slope * (T::step_exact((s - a) / w) - T::step_exact((s - b()) / w));
    };
    auto part = [&](double lo, double hi) {
      hi = std::min(hi, ax);
      return hi > lo ? detail::SmoothStepTable::integrate(gp, lo, hi) : 0.0;
    };
    double g;
    if (b() >= a + w)
      g = part(a, a + w) + slope * std::max(0.0, std::min(ax, b()) - (a + w)) + part(b(), b() + w);
    else
      g = part(a, b() + w);
    return x < 0.0 ? -g : g;
  }

  Vec apply(const Vec& v) const { return v.unaryExpr([this](double x) { return (*this)(x); }); }
};

inline P0TestFunction p0_family(double a, double w, double cap = 1e3, double slope = 1.0,
                                bool positive_only = false) {
  if (!(a > 0.0) || !(w > 0.0) || !(cap > 0.0)) throw DomainError("p0_family: a, w and cap must be positive");
  if (!(slope > 0.0)) throw DomainError("p0_family: slope must be positive");
  if (slope > 1.0) throw DomainError("p0_family: slope above 1 would make g' exceed 1");
  return P0TestFunction{a, w, cap, slope, positive_only};
}

// The g used against the counterexample: g(-1) = 0 and g(1) = 1/2.
inline P0TestFunction counterexample_g() { return p0_family(0.1, 0.1, 0.5, 1.0, true); }

struct P0Report {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

// Phi(u + g(v-u)) + Phi(v - g(v-u)) against Phi(u) + Phi(v).
template <typename F, typename G>
P0Report p0_convexity_check(const F& phi, const Vec& u, const Vec& v, const G& g) {
  const Vec d = v - u;
  const Vec gd = d.unaryExpr([&g](double x) { return g(x); });
  P0Report r;
  r.lhs = phi(Vec(u + gd)) + phi(Vec(v - gd));
  r.rhs = phi(u) + phi(v);
  r.slack = r.rhs - r.lhs;
  return r;
}

struct CounterexampleReport {
  double lambda = 0.0;
  LambdaConvexityReport convexity;
  P0Report p0;
};

inline CounterexampleReport counterexample_demo(double lambda, int n_samples = 1000, std::uint64_t seed = 7,
                                                bool zero_g = false) {
  if (lambda < 0.0) throw DomainError("counterexample_demo: lambda must be >= 0");
  const ProperFunctional phi = counterexample_functional(lambda);
  CounterexampleReport rep;
  rep.lambda = lambda;
  rep.convexity = check_lambda_convexity(phi, lambda, box_sampler(2, -3.0, 3.0, seed), n_samples);
  Vec u(2), v(2);
  u << 1.0, 0.0;
  v << 0.0, 1.0;
  if (zero_g) rep.p0 = p0_convexity_check(phi, u, v, [](double) { return 0.0; });
  else rep.p0 = p0_convexity_check(phi, u, v, counterexample_g());
  return rep;
}

struct LrContractionReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double certificate = 0.0;
  bool ok = false;
};

// ||S(t)x - S(t)y||_{L^r(mu)} <= ||x - y||_{L^r(mu)} for the weighted-L2 flow.
inline LrContractionReport lr_contraction_check(const GraphEnergy& ge, const Vec& x, const Vec& y, double t,
                                                double r, double tol = 1e-6) {
  if (!(r >= 1.0)) throw DomainError("lr_contraction_check: r must be >= 1");
  const ProperFunctional phi = to_functional(ge);
  FlowOptions o;
  o.envelopes = false;
  const FlowResult fx = gradient_flow(phi, x, {t}, tol, o);
  const FlowResult fy = gradient_flow(phi, y, {t}, tol, o);
  const Vec& w = ge.node_weights;
  LrContractionReport rep;
  rep.lhs = lr_norm(fx.trajectory.states.back() - fy.trajectory.states.back(), w, r);
  rep.rhs = lr_norm(x - y, w, r);
  rep.slack = rep.rhs - rep.lhs;
  // Certificates are weighted-L2; every L^r(mu) norm of a vector is at most its max
  // entry times mu(total)^{1/r}, and the max entry is at most L2 / sqrt(min weight).
  const double conv = std::max(1.0, w.sum()) / std::sqrt(w.minCoeff());
  rep.certificate = (fx.trajectory.error_bounds.back() + fy.trajectory.error_bounds.back()) * conv;
  rep.ok = rep.slack >= -rep.certificate - 1e-12;
  return rep;
}

}  // namespace gfstack
