#pragma once

#include "gfstack/experiments/config.hpp"
#include "gfstack/experiments/csv.hpp"
#include "gfstack/experiments/runner.hpp"
#include "gfstack/transport.hpp"

#include <numeric>

namespace gfstack::experiments {

inline Vec random_simplex_weights(Rng& rng, int n) {
  Vec w = uniform_vec(rng, n, 0.05, 1.0);
  return w / w.sum();
}

inline TLpPoint random_tlp_point(Rng& rng, int n, int d, bool uniform_weights) {
  Mat atoms = uniform_vec(rng, n * d, -1.0, 1.0).reshaped(n, d);
  Vec w = uniform_weights ? Vec::Constant(n, 1.0 / n) : random_simplex_weights(rng, n);
  return TLpPoint(EmpiricalMeasure(std::move(atoms), std::move(w)), uniform_vec(rng, n, -1.0, 1.0));
}

// min over permutations of (1/n) sum_i c(i, sigma(i)); equal uniform weights only.
inline double permutation_optimum(const TLpPoint& a, const TLpPoint& b, double p) {
  const Eigen::Index n = a.values.size();
  if (b.values.size() != n) throw InputError("permutation_optimum: sizes differ");
  Mat C(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      C(i, j) = std::pow((a.measure.atoms.row(i) - b.measure.atoms.row(j)).norm(), p) +
                std::pow(std::abs(a.values[i] - b.values[j]), p);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf;
  do {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += C(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

inline std::vector<Row> bruteforce_rows(std::uint64_t seed, int draws, int max_atoms) {
  Rng rng(seed);
  std::vector<Row> rows;
  for (int k = 0; k < draws; ++k) {
    const int n = 1 + k % max_atoms;
    const int d = 1 + (k / max_atoms) % 2;
    const TLpPoint a = random_tlp_point(rng, n, d, true), b = random_tlp_point(rng, n, d, true);
    for (double p : {1.0, 2.0, 3.0}) {
      const double lp = tlp_distance(a, b, p).plan.cost;
      const double bf = permutation_optimum(a, b, p);
      rows.push_back(le_row("tlp_bruteforce", n, 0.0, "p=" + fmt(p) + "/draw" + std::to_string(k),
                            std::abs(lp - bf), 1e-9, 0.0));
    }
  }
  return rows;
}

inline std::vector<Row> metric_rows(std::uint64_t seed, int draws) {
  Rng rng(seed);
  std::vector<Row> rows;
  for (int k = 0; k < draws; ++k) {
    const double p = 1.0 + k % 3;
    const int d = 1 + k % 2;
    const TLpPoint a = random_tlp_point(rng, 1 + k % 6, d, false);
    const TLpPoint b = random_tlp_point(rng, 1 + (k / 2) % 6, d, false);
    const TLpPoint c = random_tlp_point(rng, 1 + (k / 3) % 6, d, false);
    const double ab = tlp_distance(a, b, p).distance, ba = tlp_distance(b, a, p).distance;
    const double bc = tlp_distance(b, c, p).distance, ac = tlp_distance(a, c, p).distance;
    const std::string tag = "p=" + fmt(p) + "/draw" + std::to_string(k);
    rows.push_back(le_row("tlp_metric", a.values.size(), 0.0, "symmetry/" + tag, std::abs(ab - ba), 1e-9, 0.0));
    rows.push_back(le_row("tlp_metric", a.values.size(), 0.0, "triangle/" + tag, ac, ab + bc + 1e-9, 0.0));
  }
  return rows;
}

inline std::vector<Row> interpolation_rows(std::uint64_t seed, int draws) {
  Rng rng(seed);
  std::vector<Row> rows;
  for (int k = 0; k < draws; ++k) {
    const TLpPoint a = random_tlp_point(rng, 2 + k % 5, 1, false);
    const TLpPoint b = random_tlp_point(rng, 2 + (k / 5) % 5, 1, false);
    const double p = 1.0 + (k % 2);
    const double q = k % 3 == 0 ? kInf : p + 2.0 + (k % 4);
    const double r = p + 0.5 * (k % 3);
    const double C = std::max(lp_norm(a, q), lp_norm(b, q)) * uniform(rng, 1.0, 2.0);
    const auto rep = interpolation_bound_check(a, b, p, q, r, C);
    const std::string tag = "p=" + fmt(p) + "/q=" + (std::isinf(q) ? std::string("inf") : fmt(q)) + "/r=" + fmt(r) +
                            "/draw" + std::to_string(k);
    rows.push_back(le_row("tlp_interpolation", a.values.size(), 0.0, tag, rep.lhs, rep.rhs, 1e-9));
  }
  return rows;
}

inline std::vector<Row> run_tlp_table(const ExperimentConfig& cfg) {
  cfg.validate();
  const int max_atoms = std::min(cfg.sizes.back(), 7);
  std::vector<Task> tasks{
      [s = cfg.seed, n = cfg.samples, max_atoms] { return bruteforce_rows(s + 1, n, max_atoms); },
      [s = cfg.seed, n = cfg.samples] { return metric_rows(s + 2, 2 * n); },
      [s = cfg.seed, n = cfg.samples] { return interpolation_rows(s + 3, n); },
  };
  return run_tasks(tasks);
}

}  // namespace gfstack::experiments
