#include "gfstack/experiments/zoo.hpp"
#include "gfstack/gradient_flow.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace gfstack;
using Catch::Approx;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::vector<double> uniform_grid(double T, int steps) {
  std::vector<double> t(steps + 1);
  for (int k = 0; k <= steps; ++k) t[k] = T * k / steps;
  return t;
}

// 2x2 prox of 2(u1 - u2)^2 with unit weights by Cramer's rule.
Vec two_node_prox(double g, const Vec& h) {
  const double a = 1 + 4 * g, b = -4 * g;
  const double det = a * a - b * b;
  return v2((a * h[0] - b * h[1]) / det, (a * h[1] - b * h[0]) / det);
}

}  // namespace

TEST_CASE("gradient flow examples", "[flow]") {
  const auto q = quadratic_functional(1.0);
  const auto fr = gradient_flow(q, v1(1.0), {0.0, 1.0}, 1e-8);
  CHECK(fr.trajectory.states[0][0] == 1.0);
  CHECK(fr.trajectory.states[1][0] == Approx(std::exp(-1.0)).margin(1e-7));
  CHECK(fr.energies[1] == Approx(0.5 * std::exp(-2.0)).margin(1e-7));
  CHECK(fr.energies[1] == Approx(0.067668).margin(1e-6));

  const auto a = abs_functional();
  const auto fa = gradient_flow(a, v1(2.0), {1.0}, 1e-9);
  const Vec ref = oracle::backward_euler(
      [](double h, const Vec& y) {
        const double x = y[0];
        return v1(oracle::grid_argmin_1d([&](double s) { return std::abs(s) + (s - x) * (s - x) / (2 * h); }, -4, 4));
      },
      v1(2.0), 1.0, 1000);
  CHECK(fa.trajectory.states[0][0] == Approx(1.0).margin(1e-9));
  CHECK(fa.trajectory.states[0][0] == Approx(ref[0]).margin(1e-6));
  CHECK(fa.energies[0] == Approx(1.0).margin(1e-9));
}

TEST_CASE("gradient flow validates its grid", "[flow]") {
  const auto q = quadratic_functional(1.0);
  CHECK_THROWS_AS(gradient_flow(q, v1(1), {}, 1e-6), InputError);
  CHECK_THROWS_AS(gradient_flow(q, v1(1), {0.5, 0.5}, 1e-6), InputError);
  CHECK_THROWS_AS(gradient_flow(box_indicator(), v1(3), {0.5}, 1e-6), DomainError);
}

TEST_CASE("energy bound examples", "[energy_bound]") {
  const auto q = quadratic_functional(1.0);
  const auto r = energy_bound_check(q, v1(1.0), 1.0, 1e-8);
  const double e2 = std::exp(2.0);
  CHECK(r.flow_energy == Approx(0.067668).margin(1e-6));
  CHECK(r.envelope_value == Approx(1.0 / (1.0 + e2)).margin(1e-12));
  CHECK(r.envelope_value == Approx(0.119203).margin(1e-6));
  const double gap = 1.0 / (2 * e2) * (1 - 1 / e2) / (1 + 1 / e2);
  CHECK(r.slack == Approx(gap).margin(1e-7));
  CHECK(r.slack == Approx(0.051535).margin(1e-6));
  CHECK(r.ok);

  for (double t : {0.1, 1.0, 5.0}) {
    CHECK(energy_bound_check(q, v1(0.0), t).slack == 0.0);
    CHECK(energy_bound_check(abs_functional(), v1(0.0), t).slack == 0.0);
  }
}

TEST_CASE("energy bound on the two-node graph against an independent oracle", "[energy_bound]") {
  const auto f = to_functional(experiments::two_node_graph());
  const Vec x0 = v2(1.0, 0.0);
  const auto r = energy_bound_check(f, x0, 0.5, 1e-8);
  CHECK(r.ok);
  CHECK(r.slack >= 0.0);
  const Vec u = oracle::backward_euler(two_node_prox, x0, 0.5, 200000);
  const double fu = 2 * (u[0] - u[1]) * (u[0] - u[1]);
  const Vec p = two_node_prox(0.5, x0);
  const double env = 2 * (p[0] - p[1]) * (p[0] - p[1]) + (p - x0).squaredNorm() / (2 * 0.5);
  CHECK(r.flow_energy == Approx(fu).margin(1e-6));
  CHECK(r.envelope_value == Approx(env).margin(1e-12));
  CHECK(env - fu >= 0.0);
}

TEST_CASE("decay rate examples", "[decay]") {
  const auto q = quadratic_functional(1.0);
  const auto r = decay_rate_check(q, v1(1.0), v1(0.0), 1.0, 1e-8);
  CHECK(r.lhs == Approx(0.5 * std::exp(-2.0)).margin(1e-7));
  CHECK(r.rhs == Approx(1.0 / (2 * kappa(1.0, 1.0))).margin(1e-14));
  CHECK(r.rhs == Approx(0.156518).margin(1e-6));
  CHECK(r.ok);

  const auto m = decay_rate_check(q, v1(0.0), v1(0.0), 2.0);
  CHECK(m.lhs <= 0.0);
  CHECK(m.rhs == 0.0);

  const auto a = decay_rate_check(abs_functional(), v1(2.0), v1(0.0), 1.0, 1e-9);
  CHECK(a.lhs == Approx(1.0).margin(1e-8));
  CHECK(a.rhs == Approx(2.0));
  CHECK(a.ok);

  CHECK_THROWS_AS(decay_rate_check(double_well_functional(), v1(1), v1(0), 1.0), DomainError);
}

TEST_CASE("EVI residual on the quadratic flow vanishes", "[evi]") {
  const auto q = quadratic_functional(1.0);
  const auto fr = gradient_flow(q, v1(1.0), uniform_grid(1.0, 40000), 1e-9);
  const auto rep = evi_residual(fr, q, v1(0.0));
  CHECK(rep.ok);
  double worst = 0.0;
  for (double r : rep.residuals) worst = std::max(worst, std::abs(r));
  CHECK(worst <= 1e-8);
}

TEST_CASE("EVI residual examples", "[evi]") {
  const auto z = zero_functional(2);
  const auto fz = gradient_flow(z, v2(1, 2), uniform_grid(1.0, 10), 1e-9);
  const auto rz = evi_residual(fz, z, v2(-3, 0.5));
  for (double r : rz.residuals) CHECK(r == 0.0);

  const auto a = abs_functional();
  const auto fa = gradient_flow(a, v1(2.0), uniform_grid(1.5, 300), 1e-9);
  for (double v : {-1.0, 0.0, 0.5, 3.0}) CHECK(evi_residual(fa, a, v1(v)).ok);

  const auto tv = to_functional(experiments::random_graph(3, 13, LossKind::Absolute));
  Vec x0(3);
  x0 << 1.0, -0.5, 0.2;
  const auto ft = gradient_flow(tv, x0, uniform_grid(0.2, 40), 1e-5);
  const auto rt = evi_residual(ft, tv, Vec::Constant(3, 0.1));
  CHECK(rt.max_violation <= rt.tolerance + 1e-5);

  CHECK_THROWS_AS(evi_residual(gradient_flow(a, v1(1.0), {0.0, 0.5}, 1e-6), a, v1(0)), InputError);
}

TEST_CASE("EVI on the five-node graph flow", "[evi]") {
  const auto g = to_functional(experiments::random_graph(5, 11));
  Rng rng(3);
  const Vec x0 = uniform_vec(rng, 5, -1, 1);
  const auto fr = gradient_flow(g, x0, uniform_grid(0.5, 2000), 1e-9);
  for (int k = 0; k < 5; ++k) CHECK(evi_residual(fr, g, uniform_vec(rng, 5, -1, 1)).ok);
}

TEST_CASE("metric derivative", "[metric]") {
  Trajectory c;
  c.times = {0, 0.5, 1};
  c.states = {v1(2), v1(2), v1(2)};
  for (double s : metric_derivative(c).speeds) CHECK(s == 0.0);

  Trajectory e;
  for (int k = 0; k <= 100; ++k) {
    e.times.push_back(k * 0.01);
    e.states.push_back(v1(std::exp(-k * 0.01)));
  }
  CHECK(metric_derivative(e).energy_integral == Approx((1 - std::exp(-2.0)) / 2).margin(1e-3));
  CHECK(metric_derivative(e).energy_integral == Approx(0.432332).margin(1e-3));

  Trajectory line;
  const Vec w = v2(3, -4);
  for (double t : {0.0, 0.1, 0.5, 2.0}) {
    line.times.push_back(t);
    line.states.push_back(v2(1, 1) + t * w);
  }
  for (double s : metric_derivative(line).speeds) CHECK(s == Approx(5.0));
}

TEST_CASE("flow properties over the zoo", "[flow][property]") {
  Rng rng(77);
  for (const auto& e : experiments::functional_zoo()) {
    const auto& f = e.f;
    INFO(f.name);
    const auto times = uniform_grid(1.0, 8);
    const double tol = f.name == "graph_tv3" ? 1e-4 : 1e-6;
    for (int k = 0; k < 2; ++k) {
      const Vec x = uniform_vec(rng, f.dim, e.lo, e.hi), y = uniform_vec(rng, f.dim, e.lo, e.hi);
      const auto fx = gradient_flow(f, x, times, tol);
      const auto fy = gradient_flow(f, y, times, tol);
      for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0) CHECK(fx.energies[i] <= fx.energies[i - 1] + 1e-9);
        CHECK(fx.energies[i] <= fx.envelope_bounds[i] + 1e-6);
        const double cert = fx.trajectory.error_bounds[i] + fy.trajectory.error_bounds[i];
        CHECK(f.norm(fx.trajectory.states[i] - fy.trajectory.states[i]) <=
              std::exp(-f.lambda * times[i]) * f.norm(x - y) + cert + 1e-12);
      }
      // restart from u(T1) and run for T2
      const auto a = gradient_flow(f, x, {0.7}, tol);
      const auto b = gradient_flow(f, x, {0.3}, tol);
      const auto c = gradient_flow(f, b.trajectory.states[0], {0.4}, tol);
      const double cert = a.trajectory.error_bounds[0] + c.trajectory.error_bounds[0] +
                          std::exp(-f.lambda * 0.4) * b.trajectory.error_bounds[0];
      CHECK(f.norm(a.trajectory.states[0] - c.trajectory.states[0]) <= cert + 1e-12);
    }
  }
}
