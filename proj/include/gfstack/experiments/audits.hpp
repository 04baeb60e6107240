#pragma once

#include "gfstack/experiments/d2c.hpp"
#include "gfstack/experiments/runner.hpp"
#include "gfstack/experiments/zoo.hpp"

namespace gfstack::experiments {

inline Row flag_row(std::string experiment, long long n, std::string metric, double lhs, double rhs, bool pass) {
  return Row{std::move(experiment), n, 0.0, std::move(metric), lhs, rhs, rhs - lhs, pass};
}

inline std::vector<Row> axiom_rows(const std::string& family, const Stacking& s, const std::vector<StackSequence>& seqs) {
  const AxiomReport rep = check_stacking_axioms(s, seqs);
  const std::string ex = "stacking_axioms";
  auto last = [](const std::vector<std::vector<double>>& v) {
    double m = 0.0;
    for (const auto& row : v) m = std::max(m, row.empty() ? 0.0 : row.back());
    return m;
  };
  const double tol = seqs.front().tolerance;
  std::vector<Row> rows;
  rows.push_back(flag_row(ex, 0, family + "/lipschitz", rep.max_lipschitz_excess, 1e-9, rep.lipschitz));
  rows.push_back(flag_row(ex, 0, family + "/approximation", last(rep.approx_gaps), tol, rep.approximation));
  rows.push_back(flag_row(ex, 0, family + "/algebra", last(rep.algebra_gaps), 3.5 * tol, rep.algebra));
  rows.push_back(flag_row(ex, 0, family + "/norms", last(rep.norm_gaps), tol, rep.norms));
  for (std::size_t k = 0; k < seqs.size(); ++k)
    for (std::size_t i = 0; i < seqs[k].indices.size(); ++i)
      rows.push_back(info_row(ex, seqs[k].indices[i], 0.0, family + "/seq" + std::to_string(k) + "/distance",
                              rep.distances[k][i]));
  return rows;
}

inline std::vector<Row> matrix_axiom_rows(const ExperimentConfig& cfg) {
  MatrixHilbertStacking s(Mat::Identity(2, 2));
  for (int n : cfg.sizes) s.add(n, (1.0 + 1.0 / n) * Mat::Identity(2, 2));
  Rng rng(cfg.seed);
  const Vec x = uniform_vec(rng, 2, -1.0, 1.0), y = uniform_vec(rng, 2, -1.0, 1.0);
  const double tol = 2.0 / cfg.sizes.back();
  StackSequence a{cfg.sizes, std::vector<Vec>(cfg.sizes.size(), x), x, tol};
  StackSequence b{cfg.sizes, std::vector<Vec>(cfg.sizes.size(), y), y, tol};
  return axiom_rows("matrix", s, {a, b});
}

inline std::vector<Row> subspace_axiom_rows(const ExperimentConfig& cfg) {
  const int D = cfg.sizes.back();
  std::map<int, int> dims;
  for (int n : cfg.sizes) dims[n] = n;
  SubspaceStacking s(D, dims);
  Vec x(D);
  for (int k = 0; k < D; ++k) x[k] = 1.0 / (k + 1.0);
  StackSequence q{cfg.sizes, {}, x, 1.0 / std::sqrt(static_cast<double>(D))};
  for (int n : cfg.sizes) q.points.push_back(s.approximate(n, x));
  return axiom_rows("subspace", s, {q});
}

inline TLpStacking grid_stacking(int fine, const std::vector<int>& sizes, double p = 2.0) {
  TLpStacking s(midpoint_grid(fine), p);
  for (int n : sizes) s.add(n, midpoint_grid(n));
  return s;
}

inline std::vector<Row> tlp_axiom_rows(const ExperimentConfig& cfg) {
  const int fine = 8 * cfg.sizes.back();
  const TLpStacking s = grid_stacking(fine, cfg.sizes);
  const Vec u = d2c_initial(s.measure(kLimit), cfg.initial);
  const Vec v = s.measure(kLimit).atoms.col(0);
  StackSequence a{cfg.sizes, {}, u, 1.0 / cfg.sizes.back()};
  StackSequence b{cfg.sizes, {}, v, 1.0 / cfg.sizes.back()};
  for (int n : cfg.sizes) {
    a.points.push_back(s.approximate(n, u));
    b.points.push_back(s.approximate(n, v));
  }
  return axiom_rows("tl2", s, {a, b});
}

// Graph energies of the d2c family on TL^2 with the fine Dirichlet energy as limit.
inline EnergySequence d2c_energy_sequence(int fine, bool broken) {
  auto graphs = std::make_shared<std::map<int, GraphEnergy>>();
  auto lim = std::make_shared<GraphEnergy>(fine_dirichlet(fine));
  return EnergySequence{[graphs, lim, broken](int n, const Vec& x) {
                          if (n == kLimit) return (*lim)(x);
                          auto it = graphs->find(n);
                          if (it == graphs->end()) it = graphs->emplace(n, d2c_graph(n, broken)).first;
                          return it->second(x);
                        },
                        broken ? "broken_scaling" : "d2c"};
}

inline std::vector<Row> gamma_rows(const ExperimentConfig& cfg) {
  const int fine = 8 * cfg.sizes.back();
  std::vector<int> sizes;
  for (int n : cfg.sizes)
    if (n >= 2) sizes.push_back(n);
  const TLpStacking s = grid_stacking(fine, sizes);
  const Vec x = d2c_initial(s.measure(kLimit), cfg.initial);
  StackSequence q{sizes, {}, x, 1.0 / sizes.back()};
  for (int n : sizes) q.points.push_back(s.approximate(n, x));

  std::vector<Row> rows;
  const std::string ex = "gamma";
  const EnergySequence good = d2c_energy_sequence(fine, false);
  const double tol = 0.05 * good.value(kLimit, x);
  const auto ok = gamma_liminf_check(good, s, q, tol);
  rows.push_back(flag_row(ex, 0, "liminf/d2c", ok.limit_value - tol, ok.liminf_estimate, ok.ok && ok.converging));
  for (std::size_t i = 0; i < sizes.size(); ++i)
    rows.push_back(info_row(ex, sizes[i], 0.0, "energy/d2c", ok.values[i], ok.limit_value));

  const auto bad = gamma_liminf_check(d2c_energy_sequence(fine, true), s, q, tol);
  rows.push_back(flag_row(ex, 0, "liminf/broken_scaling/negative_control", bad.limit_value - tol,
                          bad.liminf_estimate, !bad.ok));
  for (std::size_t i = 0; i < sizes.size(); ++i)
    rows.push_back(info_row(ex, sizes[i], 0.0, "energy/broken_scaling", bad.values[i], bad.limit_value));

  const auto rec = recovery_sequence(good, s, x, sizes, tol);
  rows.push_back(flag_row(ex, 0, "limsup/recovery", rec.limsup_estimate, rec.limit_value + tol, rec.ok));
  return rows;
}

inline std::vector<Row> equicoercivity_rows() {
  const std::string ex = "equicoercivity";
  std::vector<Row> rows;
  EnergySequence zero{[](int, const Vec&) { return 0.0; }, "zero"};
  const std::vector<int> idx = {1, 2, 3, 4, 5, 6, 7, 8};
  std::map<int, int> dims;
  for (int n : idx) dims[n] = 1;
  SubspaceStacking line(1, dims);

  const auto c = equicoercivity_probe(zero, line, 1.0, idx, std::vector<Vec>(idx.size(), Vec::Constant(1, 0.5)),
                                      1e-9, Vec::Constant(1, 0.5));
  rows.push_back(flag_row(ex, 0, "constant/cauchy", c.best_cluster_limit, 1e-9, c.cauchy_subsequence));

  std::vector<Vec> escape;
  for (int n : idx) escape.push_back(Vec::Constant(1, n));
  const auto e = equicoercivity_probe(zero, line, 1.0, idx, escape, 0.1);
  rows.push_back(flag_row(ex, 0, "escaping/negative_control", static_cast<double>(e.clusters.size()),
                          static_cast<double>(idx.size()), !e.cauchy_subsequence));

  // minimisers x_n = n of the circle energies cluster in the compact target away from 0
  CircleStacking circ;
  EnergySequence ce{circle_energy, "circle"};
  const std::vector<int> big = {10, 20, 40, 80, 160, 320, 640, 1280};
  std::vector<Vec> mins;
  for (int n : big) mins.push_back(Vec::Constant(1, n));
  const auto r = equicoercivity_probe(ce, circ, 1.0, big, mins, 0.01, Vec::Zero(1));
  rows.push_back(flag_row(ex, 0, "circle/minimisers_not_converging/negative_control", 0.5, r.best_cluster_limit,
                          r.sublevel_ok && r.cauchy_subsequence && r.best_cluster_limit > 0.5));
  return rows;
}

inline std::vector<Row> run_stacking_audit(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Task> tasks{[cfg] { return matrix_axiom_rows(cfg); }, [cfg] { return subspace_axiom_rows(cfg); },
                          [cfg] { return tlp_axiom_rows(cfg); },    [cfg] { return gamma_rows(cfg); },
                          [] { return equicoercivity_rows(); }};
  return run_tasks(tasks);
}

inline std::vector<P0TestFunction> p0_test_functions() {
  return {p0_family(0.1, 0.1, 0.5, 1.0, true), p0_family(0.05, 0.2), p0_family(0.3, 0.05, 0.4, 0.5),
          p0_family(1.0, 3.0), p0_family(0.2, 0.5, 2.0, 0.9)};
}

inline std::vector<Row> counterexample_rows(int samples, std::uint64_t seed) {
  const std::string ex = "p0_counterexample";
  std::vector<Row> rows;
  for (double lam : {0.0, 1.0, 2.0, 4.0}) {
    const auto rep = counterexample_demo(lam, samples, seed);
    const double expected = -(0.5 + lam / 4.0);
    const std::string tag = "lambda=" + fmt(lam);
    rows.push_back(flag_row(ex, 0, tag + "/p0_slack", rep.p0.slack, expected,
                            std::abs(rep.p0.slack - expected) <= 1e-9));
    rows.push_back(flag_row(ex, samples, tag + "/convexity_violations",
                            static_cast<double>(rep.convexity.violations.size()), 0.0,
                            rep.convexity.violations.empty()));
  }
  return rows;
}

inline std::vector<Row> p0_graph_rows(int nodes, int samples, std::uint64_t seed, double tolerance) {
  Rng rng(seed);
  const std::string ex = "p0_graph";
  std::vector<Row> rows;
  const auto gs = p0_test_functions();
  for (LossKind loss : {LossKind::Squared, LossKind::Absolute}) {
    const GraphEnergy ge = make_graph_energy(random_adjacency(nodes, rng), Vec::Constant(nodes, 1.0), loss);
    const std::string lname = loss == LossKind::Squared ? "squared" : "absolute";
    for (int s = 0; s < samples; ++s) {
      const Vec u = uniform_vec(rng, nodes, -3.0, 3.0), v = uniform_vec(rng, nodes, -3.0, 3.0);
      double worst = kInf;
      for (const auto& g : gs) worst = std::min(worst, p0_convexity_check(ge, u, v, g).slack);
      rows.push_back(le_row(ex, nodes, 0.0, lname + "/s" + std::to_string(s), -worst, 0.0, tolerance));
    }
  }
  return rows;
}

inline std::vector<Row> run_p0_audit(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Task> tasks{[n = cfg.samples, s = cfg.seed] { return counterexample_rows(10 * n, s); }};
  for (int nodes : cfg.sizes)
    tasks.push_back([nodes, cfg] { return p0_graph_rows(nodes, cfg.samples / 4 + 1, cfg.seed + nodes, 1e-12); });
  return run_tasks(tasks);
}

}  // namespace gfstack::experiments
