#pragma once

#include "gfstack/energies.hpp"
#include "gfstack/experiments/config.hpp"
#include "gfstack/experiments/csv.hpp"
#include "gfstack/gradient_flow.hpp"
#include "gfstack/stacking.hpp"
#include "gfstack/transport.hpp"

#include <numbers>

namespace gfstack::experiments {

inline constexpr double kTriangleMoment = 1.0 / 6.0;  // int eta(|s|) s^2 ds for the triangle kernel
inline constexpr double kD2cFlowTol = 1e-7;

inline double d2c_bandwidth(int n) { return 2.0 * std::log(static_cast<double>(n)) / n; }

// Epsilon-graph on the midpoints of (0,1) with triangle kernel,
// w_ij = eta(|x_i - x_j| / eps) / (n^2 eps^3). `broken` drops one more factor of n.
inline GraphEnergy d2c_graph(int n, bool broken = false) {
  if (n < 2) throw InputError("d2c_graph: need at least 2 points");
  const double eps = d2c_bandwidth(n);
  const double scale = 1.0 / (static_cast<double>(n) * n * eps * eps * eps) / (broken ? n : 1.0);
  Mat A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double r = std::abs(i - j) / static_cast<double>(n) / eps;
      if (i != j && r < 1.0) A(i, j) = (1.0 - r) * scale;
    }
  return make_graph_energy(A, Vec::Constant(n, 1.0 / n));
}

// Nearest-neighbour Dirichlet energy sigma * sum (u_{k+1} - u_k)^2 / h on N midpoints.
inline GraphEnergy fine_dirichlet(int N) {
  Mat A = Mat::Zero(N, N);
  for (int k = 0; k + 1 < N; ++k) A(k, k + 1) = kTriangleMoment * N;
  return make_graph_energy(A, Vec::Constant(N, 1.0 / N));
}

inline Vec d2c_initial(const EmpiricalMeasure& mu, const std::string& kind) {
  Vec x(mu.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double s = std::numbers::pi * mu.atoms(i, 0);
    x[i] = kind == "sin" ? std::sin(s) : std::cos(s);
  }
  return x;
}

// The limit side: fine grid, its energy, stacking and flow.
struct D2cLimit {
  int N = 0;
  GraphEnergy energy;
  TLpStacking stacking;
  Vec x0;
  FlowResult flow;
};

inline D2cLimit d2c_limit(int N, const std::vector<double>& times, const std::string& initial) {
  D2cLimit lim{N, fine_dirichlet(N), TLpStacking(midpoint_grid(N), 2.0), Vec(), FlowResult()};
  lim.x0 = d2c_initial(lim.stacking.measure(kLimit), initial);
  FlowOptions o;
  o.envelopes = false;
  lim.flow = gradient_flow(to_functional(lim.energy, "fine"), lim.x0, times, kD2cFlowTol, o);
  return lim;
}

// Barycentric projection of the limit datum onto the n midpoints.
inline Vec d2c_project(int n, const D2cLimit& lim) {
  return barycentric_map(wasserstein(midpoint_grid(n), lim.stacking.measure(kLimit), 2.0).plan, lim.x0);
}

struct D2cLevel {
  int n = 0;
  std::vector<double> distances;
  std::vector<double> energy_gaps;
  double sup_distance = 0.0;
  double max_energy_gap = 0.0;
  double dissipation = 0.0;        // Phi_n(x_n) - Phi_n(u_n(T)) = int_0^T |u_n'|^2
  double limit_dissipation = 0.0;  // same on the fine grid
};

// The level n = N is the limit space itself and reuses the fine energy.
inline D2cLevel d2c_level(int n, const D2cLimit& lim, const std::vector<double>& times, bool broken = false) {
  const GraphEnergy ge = n == lim.N ? lim.energy : d2c_graph(n, broken);
  const EmpiricalMeasure mu = midpoint_grid(n);
  const Vec x0 = d2c_project(n, lim);
  FlowOptions o;
  o.envelopes = false;
  const FlowResult fr = gradient_flow(to_functional(ge), x0, times, kD2cFlowTol, o);
  D2cLevel lv;
  lv.n = n;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double d = tlp_distance(TLpPoint(mu, fr.trajectory.states[k]),
                                  TLpPoint(lim.stacking.measure(kLimit), lim.flow.trajectory.states[k]), 2.0)
                         .distance;
    const double gap = std::abs(fr.energies[k] - lim.flow.energies[k]);
    lv.distances.push_back(d);
    lv.energy_gaps.push_back(gap);
    lv.sup_distance = std::max(lv.sup_distance, d);
    lv.max_energy_gap = std::max(lv.max_energy_gap, gap);
  }
  lv.dissipation = fr.energies.front() - fr.energies.back();
  lv.limit_dissipation = lim.flow.energies.front() - lim.flow.energies.back();
  return lv;
}

inline std::vector<Row> d2c_rows(const std::vector<D2cLevel>& levels, const std::vector<double>& times,
                                 double rel_tol) {
  std::vector<Row> rows;
  const std::string ex = "d2c_heat";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const D2cLevel& lv = levels[i];
    for (std::size_t k = 0; k < times.size(); ++k) {
      rows.push_back(info_row(ex, lv.n, times[k], "tl2_distance", lv.distances[k]));
      rows.push_back(info_row(ex, lv.n, times[k], "energy_gap", lv.energy_gaps[k]));
    }
    rows.push_back(info_row(ex, lv.n, times.back(), "sup_tl2_distance", lv.sup_distance));
    rows.push_back(info_row(ex, lv.n, times.back(), "max_energy_gap", lv.max_energy_gap));
    rows.push_back(le_row(ex, lv.n, times.back(), "derivative_lower_bound", (1.0 - rel_tol) * lv.limit_dissipation,
                          lv.dissipation, 0.0));
    if (i > 0) {
      rows.push_back(strict_row(ex, lv.n, times.back(), "sup_distance_decrease", lv.sup_distance,
                                levels[i - 1].sup_distance));
      rows.push_back(strict_row(ex, lv.n, times.back(), "energy_gap_decrease", lv.max_energy_gap,
                                levels[i - 1].max_energy_gap));
    }
  }
  if (levels.size() > 1)
    rows.push_back(le_row(ex, levels.back().n, times.back(), "sup_distance_quarter_of_first",
                          levels.back().sup_distance, 0.25 * levels.front().sup_distance, 0.0));
  return rows;
}

inline std::vector<Row> run_d2c_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> times = cfg.times();
  const D2cLimit lim = d2c_limit(cfg.sizes.back() * 8, times, cfg.initial);
  std::vector<D2cLevel> levels;
  for (int n : cfg.sizes) levels.push_back(d2c_level(n, lim, times));
  return d2c_rows(levels, times, cfg.tolerance);
}

}  // namespace gfstack::experiments
