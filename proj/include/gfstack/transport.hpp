#pragma once

#include "gfstack/common.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace gfstack {

// Finitely supported probability measure; atoms are the rows of `atoms`.
struct EmpiricalMeasure {
  Mat atoms;
  Vec weights;

  EmpiricalMeasure() = default;
  EmpiricalMeasure(Mat a, Vec w) : atoms(std::move(a)), weights(std::move(w)) {
    if (atoms.rows() != weights.size()) throw InputError("measure: atom/weight count mismatch");
    if (atoms.rows() == 0) throw InputError("measure: no atoms");
    if (!atoms.allFinite()) throw InputError("measure: non-finite atom");
    if ((weights.array() <= 0.0).any()) throw InputError("measure: weights must be positive");
    if (std::abs(weights.sum() - 1.0) > 1e-12) throw InputError("measure: weights must sum to 1");
  }

  Eigen::Index size() const { return atoms.rows(); }
  Eigen::Index dim() const { return atoms.cols(); }
};

inline EmpiricalMeasure uniform_measure(const Mat& atoms) {
  return EmpiricalMeasure(atoms, Vec::Constant(atoms.rows(), 1.0 / static_cast<double>(atoms.rows())));
}

inline EmpiricalMeasure uniform_measure_1d(const Vec& points) { return uniform_measure(Mat(points)); }

// Uniform measure on the midpoints (i + 1/2)/n of (0, 1).
inline EmpiricalMeasure midpoint_grid(int n) {
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = (i + 0.5) / n;
  return uniform_measure_1d(x);
}

struct TLpPoint {
  EmpiricalMeasure measure;
  Vec values;

  TLpPoint() = default;
  TLpPoint(EmpiricalMeasure m, Vec v) : measure(std::move(m)), values(std::move(v)) {
    if (values.size() != measure.size()) throw InputError("TLp point: one value per atom required");
  }
};

// ||u||_{L^p(mu)}, p = inf gives the max over atoms.
inline double lp_norm(const TLpPoint& a, double p) { return lr_norm(a.values, a.measure.weights, p); }

struct TransportSolution {
  Mat pi;
  double cost = 0.0;
  long long iterations = 0;
};

namespace detail {

// Transportation simplex on the bipartite network: spanning-tree basis, node
// potentials, block pricing, Charnes perturbation against degenerate pivots.
class TransportSimplex {
 public:
  TransportSimplex(const Vec& a, const Vec& b, const Mat& C) : a_(a), b_(b), C_(C), m_(a.size()), n_(b.size()) {}

  TransportSolution run() {
    const double eps = 1e-13;
    Vec ap = a_.array() + eps;
    Vec bp = b_;
    bp[n_ - 1] += static_cast<double>(m_) * eps;
    northwest(ap, bp);
    potentials();

    // a reduced cost counts as negative only beyond its own rounding error
    constexpr double kRound = 64.0 * std::numeric_limits<double>::epsilon();
    const long long total = static_cast<long long>(m_) * n_;
    const long long block = std::max<long long>(16, static_cast<long long>(std::sqrt(static_cast<double>(total))));
    const long long max_iter = 50 * total + 1000;
    long long pos = 0, iter = 0;
    while (true) {
      long long best = -1, scanned = 0;
      double best_r = 0.0;
      while (scanned < total) {
        const long long end = std::min(total, scanned + block);
        for (; scanned < end; ++scanned) {
          const long long c = (pos + scanned) % total;
          const Eigen::Index i = c / n_, j = c % n_;
          const double r = C_(i, j) - u_[i] - v_[j];
          if (r >= -kRound * (std::abs(C_(i, j)) + std::abs(u_[i]) + std::abs(v_[j]))) continue;
          if (best < 0 || r < best_r || (r == best_r && best >= 0 && c < best)) {
            best_r = r;
            best = c;
          }
        }
        if (best >= 0) break;
      }
      if (best < 0) break;
      pos = (best + 1) % total;
      pivot(best / n_, best % n_);
      if (++iter > max_iter) throw SolverError("transport: iteration cap reached", Vec(), best_r);
    }
    return finish(iter);
  }

 private:
  Vec a_, b_;
  const Mat& C_;
  Eigen::Index m_, n_;
  std::vector<Eigen::Index> bi_, bj_;
  std::vector<double> x_;
  std::vector<std::vector<int>> adj_;
  Vec u_, v_;

  int node_row(Eigen::Index i) const { return static_cast<int>(i); }
  int node_col(Eigen::Index j) const { return static_cast<int>(m_ + j); }

  void add_cell(Eigen::Index i, Eigen::Index j, double f) {
    const int id = static_cast<int>(bi_.size());
    bi_.push_back(i);
    bj_.push_back(j);
    x_.push_back(f);
    adj_[node_row(i)].push_back(id);
    adj_[node_col(j)].push_back(id);
  }

  void northwest(Vec ra, Vec rb) {
    adj_.assign(static_cast<std::size_t>(m_ + n_), {});
    Eigen::Index i = 0, j = 0;
    while (true) {
      const double f = std::min(ra[i], rb[j]);
      add_cell(i, j, f);
      ra[i] -= f;
      rb[j] -= f;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) ++j;
      else if (j == n_ - 1) ++i;
      else if (ra[i] < rb[j]) ++i;
      else ++j;
    }
  }

  int other(int cell, int node) const {
    const int r = node_row(bi_[cell]);
    return node == r ? node_col(bj_[cell]) : r;
  }

  void potentials() {
    u_ = Vec::Zero(m_);
    v_ = Vec::Zero(n_);
    std::vector<char> seen(static_cast<std::size_t>(m_ + n_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (int c : adj_[node]) {
        const int o = other(c, node);
        if (seen[o]) continue;
        seen[o] = 1;
        if (o >= m_) v_[o - m_] = C_(bi_[c], bj_[c]) - u_[bi_[c]];
        else u_[o] = C_(bi_[c], bj_[c]) - v_[bj_[c]];
        stack.push_back(o);
      }
    }
  }

  void pivot(Eigen::Index ei, Eigen::Index ej) {
    // Tree path from the entering row to the entering column.
    const int src = node_row(ei), dst = node_col(ej);
    std::vector<int> via(static_cast<std::size_t>(m_ + n_), -2);
    std::deque<int> queue{src};
    via[src] = -1;
    while (!queue.empty() && via[dst] == -2) {
      const int node = queue.front();
      queue.pop_front();
      for (int c : adj_[node]) {
        const int o = other(c, node);
        if (via[o] != -2) continue;
        via[o] = c;
        queue.push_back(o);
      }
    }
    std::vector<int> path;
    for (int node = dst; node != src;) {
      const int c = via[node];
      path.push_back(c);
      node = other(c, node);
    }
    // path[0] touches the column: signs alternate -, +, -, ...
    int leave = -1;
    double theta = kInf;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const int c = path[k];
      const long long key = static_cast<long long>(bi_[c]) * n_ + bj_[c];
      const long long best_key = leave < 0 ? -1 : static_cast<long long>(bi_[leave]) * n_ + bj_[leave];
      if (x_[c] < theta || (x_[c] == theta && key < best_key)) {
        theta = x_[c];
        leave = c;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) x_[path[k]] += (k % 2 == 0) ? -theta : theta;

    auto drop = [&](int node, int c) {
      auto& l = adj_[node];
      l.erase(std::find(l.begin(), l.end(), c));
    };
    drop(node_row(bi_[leave]), leave);
    drop(node_col(bj_[leave]), leave);
    bi_[leave] = ei;
    bj_[leave] = ej;
    x_[leave] = theta;
    adj_[src].push_back(leave);
    adj_[dst].push_back(leave);
    potentials();
  }

  // Tree flows for the unperturbed marginals, by peeling leaves.
  TransportSolution finish(long long iter) {
    const int N = static_cast<int>(m_ + n_);
    std::vector<double> rem(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < m_; ++i) rem[node_row(i)] = a_[i];
    for (Eigen::Index j = 0; j < n_; ++j) rem[node_col(j)] = b_[j];
    std::vector<int> deg(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) deg[k] = static_cast<int>(adj_[k].size());
    std::vector<char> done(bi_.size(), 0);
    std::vector<int> leaves;
    for (int k = 0; k < N; ++k)
      if (deg[k] == 1) leaves.push_back(k);
    while (!leaves.empty()) {
      const int node = leaves.back();
      leaves.pop_back();
      if (deg[node] != 1) continue;
      int cell = -1;
      for (int c : adj_[node])
        if (!done[c]) cell = c;
      done[cell] = 1;
      x_[cell] = rem[node];
      const int o = other(cell, node);
      rem[o] -= rem[node];
      rem[node] = 0.0;
      deg[node] = 0;
      if (--deg[o] == 1) leaves.push_back(o);
    }
    TransportSolution s;
    s.pi = Mat::Zero(m_, n_);
    for (std::size_t c = 0; c < bi_.size(); ++c) s.pi(bi_[c], bj_[c]) = std::max(0.0, x_[c]);
    s.cost = (s.pi.array() * C_.array()).sum();
    s.iterations = iter;
    return s;
  }
};

}  // namespace detail

// Exact minimiser of sum_ij pi_ij C_ij over couplings of a and b.
inline TransportSolution solve_transport(const Vec& a, const Vec& b, const Mat& C) {
  if (C.rows() != a.size() || C.cols() != b.size()) throw InputError("transport: cost matrix shape mismatch");
  if (a.size() == 0 || b.size() == 0) throw InputError("transport: empty marginal");
  return detail::TransportSimplex(a, b, C).run();
}

struct TransportPlan {
  Mat pi;
  Mat cost_matrix;  // divided by exp(log_scale) when p > 8
  double log_scale = 0.0;
  EmpiricalMeasure source, target;
  double p = 1.0;
  double cost = 0.0;
  double stagnation_cost = 0.0;
};

struct DistanceResult {
  double distance = 0.0;
  TransportPlan plan;
};

namespace detail {

inline void check_pair(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
  if (mu.dim() != nu.dim()) throw InputError("transport: dimension mismatch");
  if (!(p >= 1.0)) throw DomainError("transport: p must be >= 1");
}

// log of |x_i - y_j|^p (+ |u_i - v_j|^p); -inf stands for a zero cost.
inline double log_pow(double d, double p) { return d == 0.0 ? -kInf : p * std::log(d); }

inline double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline DistanceResult solve_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p,
                                     const Vec* u, const Vec* v) {
  const Eigen::Index m = mu.size(), n = nu.size();
  Mat spatial(m, n), C(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) spatial(i, j) = (mu.atoms.row(i) - nu.atoms.row(j)).norm();
  double log_scale = 0.0;
  Mat S(m, n);
  if (p > 8.0) {
    Mat L(m, n), LS(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        LS(i, j) = log_pow(spatial(i, j), p);
        L(i, j) = u ? log_add(LS(i, j), log_pow(std::abs((*u)[i] - (*v)[j]), p)) : LS(i, j);
      }
    log_scale = std::max(0.0, L.maxCoeff());
    C = (L.array() - log_scale).exp();
    S = (LS.array() - log_scale).exp();
  } else {
    S = spatial.array().pow(p);
    C = S;
    if (u)
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) C(i, j) += std::pow(std::abs((*u)[i] - (*v)[j]), p);
  }
  TransportSolution sol = solve_transport(mu.weights, nu.weights, C);
  DistanceResult r;
  r.plan.pi = std::move(sol.pi);
  r.plan.cost_matrix = std::move(C);
  r.plan.log_scale = log_scale;
  r.plan.source = mu;
  r.plan.target = nu;
  r.plan.p = p;
  const double scaled = std::max(0.0, (r.plan.pi.array() * r.plan.cost_matrix.array()).sum());
  const double stag = std::max(0.0, (r.plan.pi.array() * S.array()).sum());
  r.plan.cost = scaled * std::exp(log_scale);
  r.plan.stagnation_cost = stag * std::exp(log_scale);
  r.distance = scaled == 0.0 ? 0.0 : std::exp((std::log(scaled) + log_scale) / p);
  return r;
}

}  // namespace detail

inline DistanceResult wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
  detail::check_pair(mu, nu, p);
  return detail::solve_distance(mu, nu, p, nullptr, nullptr);
}

inline DistanceResult tlp_distance(const TLpPoint& a, const TLpPoint& b, double p) {
  detail::check_pair(a.measure, b.measure, p);
  return detail::solve_distance(a.measure, b.measure, p, &a.values, &b.values);
}

// u_n(x_i) = sum_j pi_ij v_j / sum_j pi_ij
inline Vec barycentric_map(const TransportPlan& plan, const Vec& target_values) {
  if (target_values.size() != plan.pi.cols()) throw InputError("barycentric_map: size mismatch");
  const Vec mass = plan.pi.rowwise().sum();
  if ((mass.array() <= 0.0).any()) throw DomainError("barycentric_map: source atom with zero mass");
  return ((plan.pi * target_values).array() / mass.array()).matrix();
}

struct InterpolationReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double theta = 0.0;
  double slack = 0.0;
  bool ok = false;
};

// d_TLr <= d_r(mu, nu) + (2C)^{q(1-theta)/r} d_TLp^{theta p / r},  theta = (q-r)/(q-p).
inline InterpolationReport interpolation_bound_check(const TLpPoint& a, const TLpPoint& b, double p, double q,
                                                     double r, double C) {
  if (!(p >= 1.0 && p < q && p <= r && r < q)) throw DomainError("interpolation bound: need 1 <= p <= r < q");
  const double na = lp_norm(a, q), nb = lp_norm(b, q);
  if (std::max(na, nb) > C * (1.0 + 1e-12))
    throw DomainError("interpolation bound: C is below the L^q norms of the data");
  InterpolationReport rep;
  double qexp;
  if (std::isinf(q)) {
    rep.theta = 1.0;
    qexp = r - p;
  } else {
    rep.theta = (q - r) / (q - p);
    qexp = q * (1.0 - rep.theta);
  }
  rep.lhs = tlp_distance(a, b, r).distance;
  const double dr = wasserstein(a.measure, b.measure, r).distance;
  const double dp = tlp_distance(a, b, p).distance;
  rep.rhs = dr + std::pow(2.0 * C, qexp / r) * std::pow(dp, rep.theta * p / r);
  rep.slack = rep.rhs - rep.lhs;
  rep.ok = rep.lhs <= rep.rhs + 1e-9;
  return rep;
}

struct TestFunction {
  std::function<double(double)> f;
  double lipschitz = 1.0;
  std::string name;
};

struct PushforwardReport {
  std::vector<std::vector<double>> gaps;    // [n][f]
  std::vector<std::vector<double>> bounds;  // [n][f] = L d_TL1
  bool within_bounds = true;
  bool decreasing = true;
};

// |int f d(u_n # mu_n) - int f d(u # mu)| for each sequence element and test function.
inline PushforwardReport pushforward_weak_check(const std::vector<TLpPoint>& seq, const TLpPoint& limit,
                                                const std::vector<TestFunction>& fns) {
  auto integral = [](const TLpPoint& a, const TestFunction& tf) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.values.size(); ++i) s += a.measure.weights[i] * tf.f(a.values[i]);
    return s;
  };
  PushforwardReport rep;
  for (const auto& a : seq) {
    const double d1 = tlp_distance(a, limit, 1.0).distance;
    std::vector<double> g, b;
    for (const auto& tf : fns) {
      g.push_back(std::abs(integral(a, tf) - integral(limit, tf)));
      b.push_back(tf.lipschitz * d1);
      if (g.back() > b.back() + 1e-12) rep.within_bounds = false;
    }
    if (!rep.gaps.empty())
      for (std::size_t k = 0; k < g.size(); ++k)
        if (g[k] > rep.gaps.back()[k] + 1e-12) rep.decreasing = false;
    rep.gaps.push_back(std::move(g));
    rep.bounds.push_back(std::move(b));
  }
  return rep;
}

}  // namespace gfstack
