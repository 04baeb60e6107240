#pragma once

#include "gfstack/experiments/d2c.hpp"
#include "gfstack/experiments/runner.hpp"
#include "gfstack/semigroup.hpp"

namespace gfstack::experiments {

inline const std::vector<double>& resolvent_lambdas() {
  static const std::vector<double> l{0.25, 0.5, 1.0};
  return l;
}

struct MatrixFamilyResult {
  std::vector<int> sizes;
  std::vector<std::vector<double>> resolvent;  // [lambda index][size index]
  std::vector<double> semigroup;
  std::vector<double> certificate;
  double fitted_C = 0.0;
};

// A_n = (1 + 1/n) I on R^3 with identity metrics, limit A = I.
inline MatrixFamilyResult matrix_family(const ExperimentConfig& cfg) {
  constexpr int d = 3;
  MatrixHilbertStacking s(Mat::Identity(d, d));
  for (int n : cfg.sizes) s.add(n, Mat::Identity(d, d));
  Rng rng(cfg.seed);
  const Vec z = uniform_vec(rng, d, -1.0, 1.0);
  const std::vector<double> times = cfg.times();

  MatrixFamilyResult out;
  out.sizes = cfg.sizes;
  out.resolvent.resize(resolvent_lambdas().size());
  const ResolventOperator Rinf = linear_scalar_operator(d, 1.0);
  for (int n : cfg.sizes) {
    const ResolventOperator Rn = linear_scalar_operator(d, 1.0 + 1.0 / n);
    for (std::size_t l = 0; l < resolvent_lambdas().size(); ++l) {
      const double lam = resolvent_lambdas()[l];
      out.resolvent[l].push_back(s.distance(n, Rn.resolve(lam, s.approximate(n, z)), kLimit, Rinf.resolve(lam, z)));
    }
    double sup = 0.0, cert = 0.0;
    for (double t : times) {
      const CLResult a = crandall_liggett(Rn, t, s.approximate(n, z), cfg.tolerance);
      const CLResult b = crandall_liggett(Rinf, t, z, cfg.tolerance);
      sup = std::max(sup, s.distance(n, a.point, kLimit, b.point));
      cert = std::max(cert, a.cert.bound + b.cert.bound);
    }
    out.semigroup.push_back(sup);
    out.certificate.push_back(cert);
  }
  // smallest C with sup-distance <= C * resolvent distance (lambda = 1/2) over the table
  for (std::size_t i = 0; i < out.sizes.size(); ++i)
    out.fitted_C = std::max(out.fitted_C, out.semigroup[i] / out.resolvent[1][i]);
  return out;
}

inline std::vector<Row> matrix_family_rows(const MatrixFamilyResult& r, double T) {
  const std::string ex = "resolvent_matrix";
  std::vector<Row> rows;
  double lo = kInf, hi = 0.0;
  for (std::size_t i = 0; i < r.sizes.size(); ++i) {
    const int n = r.sizes[i];
    for (std::size_t l = 0; l < resolvent_lambdas().size(); ++l) {
      const std::string m = "resolvent_distance/lambda=" + fmt(resolvent_lambdas()[l]);
      rows.push_back(info_row(ex, n, 0.0, m, r.resolvent[l][i]));
      if (i > 0) rows.push_back(strict_row(ex, n, 0.0, m + "/decrease", r.resolvent[l][i], r.resolvent[l][i - 1]));
    }
    rows.push_back(info_row(ex, n, T, "semigroup_sup_distance", r.semigroup[i]));
    if (i > 0)
      rows.push_back(strict_row(ex, n, T, "semigroup_sup_distance/decrease", r.semigroup[i], r.semigroup[i - 1]));
    rows.push_back(le_row(ex, n, T, "semigroup_le_C_resolvent", r.semigroup[i],
                          r.fitted_C * r.resolvent[1][i] + r.certificate[i], 0.0));
    const double ratio = r.semigroup[i] / r.resolvent[1][i];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  rows.push_back(info_row(ex, 0, T, "fitted_C", r.fitted_C));
  // the ratio must stay bounded across n for the semigroup column to be O(resolvent column)
  rows.push_back(le_row(ex, 0, T, "ratio_spread", hi / lo, 1.5, 0.0));
  return rows;
}

struct HeatFamilyResult {
  std::vector<int> sizes;
  std::vector<std::vector<double>> resolvent;
  std::vector<double> semigroup;
};

inline const std::vector<double>& heat_lambdas() {
  static const std::vector<double> l{0.01, 0.05};
  return l;
}

// TL^2 stacking of epsilon-graph heat flows against the fine-grid limit.
inline HeatFamilyResult heat_family(const ExperimentConfig& cfg) {
  const std::vector<double> times = cfg.times();
  const D2cLimit lim = d2c_limit(cfg.sizes.back() * 8, times, cfg.initial);
  const ProperFunctional finf = to_functional(lim.energy, "fine");
  HeatFamilyResult out;
  out.sizes = cfg.sizes;
  out.resolvent.resize(heat_lambdas().size());
  for (int n : cfg.sizes) {
    const GraphEnergy ge = n == lim.N ? lim.energy : d2c_graph(n);
    const ProperFunctional fn = to_functional(ge);
    const Vec zn = d2c_project(n, lim);
    const EmpiricalMeasure mu = midpoint_grid(n);
    for (std::size_t l = 0; l < heat_lambdas().size(); ++l) {
      const double lam = heat_lambdas()[l];
      out.resolvent[l].push_back(tlp_distance(TLpPoint(mu, prox(fn, lam, zn)),
                                              TLpPoint(lim.stacking.measure(kLimit), prox(finf, lam, lim.x0)), 2.0)
                                     .distance);
    }
    out.semigroup.push_back(d2c_level(n, lim, times).sup_distance);
  }
  return out;
}

inline std::vector<Row> heat_family_rows(const HeatFamilyResult& r, double T) {
  const std::string ex = "resolvent_tl2_heat";
  std::vector<Row> rows;
  for (std::size_t i = 0; i < r.sizes.size(); ++i) {
    const int n = r.sizes[i];
    for (std::size_t l = 0; l < heat_lambdas().size(); ++l) {
      const std::string m = "resolvent_distance/lambda=" + fmt(heat_lambdas()[l]);
      rows.push_back(info_row(ex, n, 0.0, m, r.resolvent[l][i]));
      if (i > 0) rows.push_back(strict_row(ex, n, 0.0, m + "/decrease", r.resolvent[l][i], r.resolvent[l][i - 1]));
    }
    rows.push_back(info_row(ex, n, T, "semigroup_sup_distance", r.semigroup[i]));
    if (i > 0)
      rows.push_back(strict_row(ex, n, T, "semigroup_sup_distance/decrease", r.semigroup[i], r.semigroup[i - 1]));
  }
  return rows;
}

inline std::vector<Row> run_resolvent_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Task> tasks;
  tasks.push_back([cfg] { return matrix_family_rows(matrix_family(cfg), cfg.T); });
  tasks.push_back([cfg] {
    ExperimentConfig h = cfg;
    h.T = std::min(cfg.T, 0.25);
    return heat_family_rows(heat_family(h), h.T);
  });
  return run_tasks(tasks);
}

}  // namespace gfstack::experiments
