#pragma once

#include "gfstack/common.hpp"
#include "gfstack/transport.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace gfstack {

// Index of the limit space X_inf.
inline constexpr int kLimit = -1;

// A family of normed spaces X_n, n in a finite sample of indices plus kLimit,
// with embeddings into one metric space. distance(n, x, m, y) is d(xi_n(x), xi_m(y)).
class Stacking {
 public:
  virtual ~Stacking() = default;
  virtual std::string index_kind() const = 0;
  virtual bool has_index(int n) const = 0;
  virtual int dim(int n) const = 0;
  virtual double norm(int n, const Vec& x) const = 0;
  virtual double distance(int n, const Vec& x, int m, const Vec& y) const = 0;
  // A point of X_n close to x_inf: the constructive half of the approximation axiom.
  virtual Vec approximate(int n, const Vec& x_inf) const = 0;

  void require(int n, const Vec& x) const {
    if (!has_index(n)) throw InputError("stacking: invalid index " + std::to_string(n));
    if (x.size() != dim(n)) throw InputError("stacking: point has the wrong dimension for its space");
  }
};

inline double stacking_distance(const Stacking& s, int n, const Vec& x, int m, const Vec& y) {
  s.require(n, x);
  s.require(m, y);
  return s.distance(n, x, m, y);
}

// Coordinate subspaces R^{d_n} of R^D, embedded by zero padding.
class SubspaceStacking : public Stacking {
 public:
  SubspaceStacking(int ambient, std::map<int, int> dims) : D_(ambient), dims_(std::move(dims)) {
    for (const auto& [n, d] : dims_)
      if (d < 0 || d > D_) throw InputError("SubspaceStacking: subspace dimension out of range");
    dims_[kLimit] = D_;
  }

  std::string index_kind() const override { return "integer-sequence"; }
  bool has_index(int n) const override { return dims_.count(n) > 0; }
  int dim(int n) const override { return dims_.at(n); }
  double norm(int, const Vec& x) const override { return x.norm(); }
  double distance(int, const Vec& x, int, const Vec& y) const override { return (pad(x) - pad(y)).norm(); }
  Vec approximate(int n, const Vec& x_inf) const override { return x_inf.head(dim(n)); }

 private:
  Vec pad(const Vec& x) const {
    Vec z = Vec::Zero(D_);
    z.head(x.size()) = x;
    return z;
  }
  int D_;
  std::map<int, int> dims_;
};

// H_A = R^d with <x, y>_A = x^T A y, embedded into R^d by A^{1/2}.
class MatrixHilbertStacking : public Stacking {
 public:
  explicit MatrixHilbertStacking(Mat limit) { add(kLimit, std::move(limit)); }

  void add(int n, Mat A) {
    if (A.rows() != A.cols()) throw InputError("MatrixHilbertStacking: matrix must be square");
    if (!members_.empty() && A.rows() != members_.begin()->second.A.rows())
      throw InputError("MatrixHilbertStacking: all matrices must share one size");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()))
      throw InputError("MatrixHilbertStacking: matrix must be symmetric");
    const Mat S = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    if (es.eigenvalues().minCoeff() < 1e-12)
      throw DomainError("MatrixHilbertStacking: matrix is not positive definite above the floor 1e-12");
    members_[n] = {S, es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose()};
  }

  const Mat& matrix(int n) const { return members_.at(n).A; }
  const Mat& sqrt_matrix(int n) const { return members_.at(n).root; }

  std::string index_kind() const override { return "matrix-indexed"; }
  bool has_index(int n) const override { return members_.count(n) > 0; }
  int dim(int n) const override { return static_cast<int>(members_.at(n).A.rows()); }
  double norm(int n, const Vec& x) const override { return std::sqrt(std::max(0.0, x.dot(matrix(n) * x))); }
  double distance(int n, const Vec& x, int m, const Vec& y) const override {
    return (sqrt_matrix(n) * x - sqrt_matrix(m) * y).norm();
  }
  Vec approximate(int, const Vec& x_inf) const override { return x_inf; }

 private:
  struct Member {
    Mat A;
    Mat root;
  };
  std::map<int, Member> members_;
};

// L^p(mu_n) embedded into TL^p by u -> (u, mu_n).
class TLpStacking : public Stacking {
 public:
  TLpStacking(EmpiricalMeasure limit, double p) : p_(p) {
    if (!(p >= 1.0)) throw DomainError("TLpStacking: p must be >= 1");
    measures_.emplace(kLimit, std::move(limit));
  }

  void add(int n, EmpiricalMeasure mu) {
    if (mu.dim() != measures_.at(kLimit).dim()) throw InputError("TLpStacking: dimension mismatch");
    measures_.insert_or_assign(n, std::move(mu));
    plans_.erase(n);
  }

  double p() const { return p_; }
  const EmpiricalMeasure& measure(int n) const { return measures_.at(n); }

  // Optimal W_p plan from mu_n to mu_inf, cached.
  const TransportPlan& plan_to_limit(int n) const {
    auto it = plans_.find(n);
    if (it == plans_.end()) it = plans_.emplace(n, wasserstein(measure(n), measure(kLimit), p_).plan).first;
    return it->second;
  }

  std::string index_kind() const override { return "measure-indexed"; }
  bool has_index(int n) const override { return measures_.count(n) > 0; }
  int dim(int n) const override { return static_cast<int>(measures_.at(n).size()); }
  double norm(int n, const Vec& x) const override { return lr_norm(x, measure(n).weights, p_); }
  double distance(int n, const Vec& x, int m, const Vec& y) const override {
    return tlp_distance(TLpPoint(measure(n), x), TLpPoint(measure(m), y), p_).distance;
  }
  Vec approximate(int n, const Vec& x_inf) const override {
    if (n == kLimit) return x_inf;
    return barycentric_map(plan_to_limit(n), x_inf);
  }

 private:
  double p_;
  std::map<int, EmpiricalMeasure> measures_;
  mutable std::map<int, TransportPlan> plans_;
};

// X_n = R for every n, embedded into the unit circle by theta(x) = pi + pi x / sqrt(1 + x^2),
// with angular distance divided by pi. Compact target, so every sublevel family is
// relatively compact there, yet minimisers can escape.
class CircleStacking : public Stacking {
 public:
  static double theta(double x) { return std::numbers::pi + std::numbers::pi * x / std::sqrt(1.0 + x * x); }

  std::string index_kind() const override { return "integer-sequence"; }
  bool has_index(int) const override { return true; }
  int dim(int) const override { return 1; }
  double norm(int, const Vec& x) const override { return std::abs(x[0]); }
  double distance(int, const Vec& x, int, const Vec& y) const override {
    const double d = std::abs(theta(x[0]) - theta(y[0]));
    return std::min(d, 2.0 * std::numbers::pi - d) / std::numbers::pi;
  }
  Vec approximate(int, const Vec& x_inf) const override { return x_inf; }
};

// Phi_n(n) = 0 and |x| + 1/n elsewhere; Phi_inf = |x|.
inline double circle_energy(int n, const Vec& x) {
  if (n == kLimit) return std::abs(x[0]);
  return x[0] == static_cast<double>(n) ? 0.0 : std::abs(x[0]) + 1.0 / n;
}

struct EnergySequence {
  std::function<double(int, const Vec&)> value;  // n = kLimit gives the limit functional
  std::string name;
};

// A sampled sequence x_n (n = indices[k]) with its declared limit in X_inf.
struct StackSequence {
  std::vector<int> indices;
  std::vector<Vec> points;
  Vec limit;
  double tolerance = 1e-6;
};

// Evidence of convergence to zero: the last value is within tol and the tail half
// never rises above the head half.
inline bool decays(const std::vector<double>& d, double tol) {
  if (d.empty()) return true;
  const std::size_t h = d.size() / 2;
  const double head = h == 0 ? kInf : *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(h));
  const double tail = *std::max_element(d.begin() + static_cast<std::ptrdiff_t>(h), d.end());
  return d.back() <= tol && tail <= head + 1e-12;
}

struct AxiomReport {
  bool lipschitz = true;      // (i)
  bool approximation = true;  // (ii)
  bool algebra = true;        // (iii)
  bool norms = true;          // (iv)
  std::vector<std::vector<double>> distances;       // d(x_n, x_inf) per sequence
  std::vector<std::vector<double>> approx_gaps;     // d(approximate(n, x_inf), x_inf)
  std::vector<std::vector<double>> norm_gaps;       // | ||x_n||_n - ||x_inf|| |
  std::vector<std::vector<double>> algebra_gaps;    // max over the sum and scalings
  double max_lipschitz_excess = 0.0;
  bool all() const { return lipschitz && approximation && algebra && norms; }
};

inline AxiomReport check_stacking_axioms(const Stacking& s, const std::vector<StackSequence>& seqs) {
  AxiomReport rep;
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    const auto& q = seqs[k];
    if (q.indices.size() != q.points.size()) throw InputError("check_stacking_axioms: index/point count mismatch");
    // a partner sequence on the same indices for the sum check, itself otherwise
    const StackSequence* partner = &q;
    if (seqs.size() > 1 && seqs[(k + 1) % seqs.size()].indices == q.indices) partner = &seqs[(k + 1) % seqs.size()];
    std::vector<double> dist, approx, ngap, agap;
    for (std::size_t i = 0; i < q.indices.size(); ++i) {
      const int n = q.indices[i];
      const Vec& x = q.points[i];
      s.require(n, x);
      dist.push_back(s.distance(n, x, kLimit, q.limit));

      const Vec a = s.approximate(n, q.limit);
      approx.push_back(s.distance(n, a, kLimit, q.limit));
      const Vec zero = Vec::Zero(x.size());
      for (const Vec* y : {&zero, &a}) {
        const double excess = s.distance(n, x, n, *y) - s.norm(n, x - *y);
        rep.max_lipschitz_excess = std::max(rep.max_lipschitz_excess, excess);
        if (excess > 1e-9) rep.lipschitz = false;
      }

      ngap.push_back(std::abs(s.norm(n, x) - s.norm(kLimit, q.limit)));
      double g = s.distance(n, x + partner->points[i], kLimit, q.limit + partner->limit);
      for (double c : {-2.5, 0.5}) g = std::max(g, s.distance(n, c * x, kLimit, c * q.limit));
      agap.push_back(g);
    }
    rep.approximation = rep.approximation && decays(approx, q.tolerance);
    rep.norms = rep.norms && decays(ngap, q.tolerance);
    rep.algebra = rep.algebra && decays(agap, 3.5 * q.tolerance);
    rep.distances.push_back(std::move(dist));
    rep.approx_gaps.push_back(std::move(approx));
    rep.norm_gaps.push_back(std::move(ngap));
    rep.algebra_gaps.push_back(std::move(agap));
  }
  return rep;
}

struct GammaLiminfReport {
  std::vector<double> values;
  std::vector<double> distances;
  double liminf_estimate = 0.0;
  double limit_value = 0.0;
  bool converging = false;
  bool ok = false;
};

// liminf estimated as the minimum over the tail half of the sampled indices.
inline GammaLiminfReport gamma_liminf_check(const EnergySequence& e, const Stacking& s, const StackSequence& seq,
                                            double tolerance = 1e-6) {
  if (seq.points.empty()) throw InputError("gamma_liminf_check: empty sequence");
  GammaLiminfReport rep;
  for (std::size_t i = 0; i < seq.points.size(); ++i) {
    rep.values.push_back(e.value(seq.indices[i], seq.points[i]));
    rep.distances.push_back(stacking_distance(s, seq.indices[i], seq.points[i], kLimit, seq.limit));
  }
  const std::size_t h = rep.values.size() / 2;
  rep.liminf_estimate = *std::min_element(rep.values.begin() + static_cast<std::ptrdiff_t>(h), rep.values.end());
  rep.limit_value = e.value(kLimit, seq.limit);
  rep.converging = decays(rep.distances, seq.tolerance);
  rep.ok = rep.liminf_estimate >= rep.limit_value - tolerance;
  return rep;
}

struct RecoveryReport {
  std::vector<int> indices;
  std::vector<Vec> points;
  std::vector<double> values;
  std::vector<double> distances;
  double limsup_estimate = 0.0;
  double limit_value = 0.0;
  bool ok = false;
};

// x_n = barycentric projection of x_inf through the optimal plan mu_n -> mu_inf.
inline RecoveryReport recovery_sequence(const EnergySequence& e, const TLpStacking& s, const Vec& x_inf,
                                        const std::vector<int>& indices, double tolerance = 1e-6) {
  s.require(kLimit, x_inf);
  RecoveryReport rep;
  rep.indices = indices;
  rep.limit_value = e.value(kLimit, x_inf);
  for (int n : indices) {
    Vec x = s.approximate(n, x_inf);
    rep.values.push_back(e.value(n, x));
    rep.distances.push_back(s.distance(n, x, kLimit, x_inf));
    rep.points.push_back(std::move(x));
  }
  if (rep.values.empty()) throw InputError("recovery_sequence: no indices");
  const std::size_t h = rep.values.size() / 2;
  rep.limsup_estimate = *std::max_element(rep.values.begin() + static_cast<std::ptrdiff_t>(h), rep.values.end());
  rep.ok = std::isinf(rep.limit_value) || rep.limsup_estimate <= rep.limit_value + tolerance;
  return rep;
}

struct EquicoercivityReport {
  Mat pairwise;                             // d^{n_i, n_j}(x_i, x_j)
  std::vector<std::vector<int>> clusters;   // single linkage at the tolerance, positions into the candidates
  std::vector<int> best_cluster;
  bool sublevel_ok = true;
  bool cauchy_subsequence = false;
  std::vector<double> limit_distances;      // members of the best cluster to the supplied limit
  double best_cluster_limit = kInf;         // last of those distances
  std::string note = "sampled evidence only";
};

inline EquicoercivityReport equicoercivity_probe(const EnergySequence& e, const Stacking& s, double c,
                                                 const std::vector<int>& indices, const std::vector<Vec>& points,
                                                 double tolerance, const std::optional<Vec>& limit = std::nullopt) {
  if (indices.size() != points.size()) throw InputError("equicoercivity_probe: index/point count mismatch");
  const int N = static_cast<int>(points.size());
  EquicoercivityReport rep;
  for (int i = 0; i < N; ++i)
    if (e.value(indices[i], points[i]) > c) rep.sublevel_ok = false;
  rep.pairwise = Mat::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      rep.pairwise(i, j) = rep.pairwise(j, i) = stacking_distance(s, indices[i], points[i], indices[j], points[j]);

  std::vector<int> parent(N);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      if (rep.pairwise(i, j) <= tolerance) parent[find(i)] = find(j);
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < N; ++i) groups[find(i)].push_back(i);
  for (auto& [root, members] : groups) rep.clusters.push_back(members);

  // A Cauchy subsequence: a cluster holding at least half of the tail (and two points)
  // whose tail members are pairwise within the tolerance.
  const int tail_start = N / 2;
  const int need = std::max(2, (N - tail_start + 1) / 2);
  for (const auto& cl : rep.clusters) {
    std::vector<int> tail;
    for (int i : cl)
      if (i >= tail_start) tail.push_back(i);
    if (static_cast<int>(tail.size()) < need) continue;
    double diam = 0.0;
    for (int i : tail)
      for (int j : tail) diam = std::max(diam, rep.pairwise(i, j));
    if (diam <= tolerance && tail.size() > rep.best_cluster.size()) {
      rep.best_cluster = cl;
      rep.cauchy_subsequence = true;
    }
  }
  if (limit) {
    for (int i : rep.best_cluster) rep.limit_distances.push_back(stacking_distance(s, indices[i], points[i], kLimit, *limit));
    if (!rep.limit_distances.empty()) rep.best_cluster_limit = rep.limit_distances.back();
  }
  return rep;
}

}  // namespace gfstack
