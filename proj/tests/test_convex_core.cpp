#include "gfstack/convex_core.hpp"
#include "gfstack/experiments/zoo.hpp"
#include "gfstack/functionals.hpp"
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

long double kappa_ld(long double t, long double l) {
  if (l == 0) return t;
  return std::expm1(2 * l * t) / (2 * l);
}

// Same functional with every fast path removed, so prox goes through the generic solver.
ProperFunctional strip(ProperFunctional f, bool keep_gradient) {
  f.prox_closed_form = nullptr;
  f.prox_power = nullptr;
  if (!keep_gradient) {
    f.gradient = nullptr;
    f.hessian = nullptr;
  }
  return f;
}

double brute_envelope_1d(const ProperFunctional& f, double g, double x, double lo, double hi) {
  auto obj = [&](double y) { return f(v1(y)) + (y - x) * (y - x) / (2 * g); };
  return obj(oracle::grid_argmin_1d(obj, lo, hi));
}

}  // namespace

TEST_CASE("kappa matches the formula in extended precision", "[kappa]") {
  CHECK(kappa(1.0, 0.0) == 1.0);
  CHECK(kappa(1.0, 1.0) == Approx(static_cast<double>(kappa_ld(1, 1))).epsilon(1e-14));
  CHECK(kappa(1.0, 1.0) == Approx(3.194528).margin(1e-6));
  const double km = kappa(1.0, -1.0);
  CHECK(km == Approx(static_cast<double>(kappa_ld(1, -1))).epsilon(1e-14));
  CHECK(km == Approx(0.432332).margin(1e-6));
  CHECK(km < 1.0);
}

TEST_CASE("kappa is continuous through lambda = 0 and stays in its interval", "[kappa]") {
  for (double t : {0.1, 1.0, 3.0}) {
    for (double l : {1e-9, -1e-9, 1e-7, -1e-7, 4e-7}) {
      CHECK(kappa(t, l) == Approx(static_cast<double>(kappa_ld(t, l))).epsilon(1e-13));
    }
    CHECK(kappa(t, 1e-12) == Approx(t).epsilon(1e-11));
  }
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const double t = uniform(rng, 0.01, 5.0), l = uniform(rng, -4.0, -0.01);
    const double v = kappa(t, l);
    CHECK(v > 0.0);
    CHECK(v < 1.0 / std::abs(l));
  }
}

TEST_CASE("kappa rejects non-positive t", "[kappa]") {
  CHECK_THROWS_AS(kappa(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(kappa(-1.0, 0.0), DomainError);
}

TEST_CASE("prox examples", "[prox]") {
  const auto zero = zero_functional(2);
  CHECK(prox(zero, 1.0, v2(3, -2)).isApprox(v2(3, -2)));

  const auto q = quadratic_functional(1.0);
  const double oq = oracle::grid_argmin_1d([](double y) { return 0.5 * y * y + (y - 2) * (y - 2) / (2 * 0.5); }, -4, 4);
  CHECK(prox(q, 0.5, v1(2))[0] == Approx(2.0 / 1.5).margin(1e-8));
  CHECK(prox(q, 0.5, v1(2))[0] == Approx(oq).margin(1e-6));

  const auto a = abs_functional();
  const double oa = oracle::grid_argmin_1d([](double y) { return std::abs(y) + (y - 2) * (y - 2); }, -4, 4);
  CHECK(prox(a, 0.5, v1(2))[0] == Approx(1.5).margin(1e-8));
  CHECK(prox(a, 0.5, v1(2))[0] == Approx(oa).margin(1e-6));
}

TEST_CASE("prox rejects steps outside the convexity interval", "[prox]") {
  const auto dw = double_well_functional();
  CHECK_THROWS_AS(prox(dw, 1.0, v1(0.3)), DomainError);
  CHECK_THROWS_AS(prox(dw, 2.0, v1(0.3)), DomainError);
  CHECK_NOTHROW(prox(dw, 0.99, v1(0.3)));
  CHECK_THROWS_AS(prox(quadratic_functional(1.0), 0.0, v1(1)), DomainError);
}

TEST_CASE("generic prox solvers agree with grid brute force", "[prox][solver]") {
  Rng rng(17);
  struct Case {
    ProperFunctional f;
    bool keep_gradient;
    double gmax;
  };
  std::vector<Case> cases = {{quadratic_functional(1.0), true, 3.0},
                             {quadratic_functional(1.0), false, 3.0},
                             {abs_functional(), false, 3.0},
                             {double_well_functional(), true, 0.9},
                             {softplus_functional(), true, 3.0},
                             {box_indicator(), false, 3.0}};
  for (const auto& c : cases) {
    const auto f = strip(c.f, c.keep_gradient);
    for (int k = 0; k < 20; ++k) {
      const double g = uniform(rng, 0.05, c.gmax), x = uniform(rng, -3.0, 3.0);
      auto obj = [&](double y) { return f.value(v1(y)) + (y - x) * (y - x) / (2 * g); };
      const double ref = oracle::grid_argmin_1d(obj, -4, 4);
      INFO(f.name << " gamma=" << g << " x=" << x);
      CHECK(prox(f, g, v1(x))[0] == Approx(ref).margin(1e-6));
      if (c.f.prox_closed_form) CHECK(prox(f, g, v1(x))[0] == Approx(prox(c.f, g, v1(x))[0]).margin(1e-6));
    }
  }
}

TEST_CASE("Newton prox on a 2-d quadratic agrees with a 2-d grid", "[prox][solver]") {
  const auto f = strip(counterexample_functional(0.5), true);
  const Vec x = v2(0.7, -1.3);
  const double g = 0.4;
  auto obj = [&](const Vec& y) { return f(y) + f.norm2(y - x) / (2 * g); };
  const Vec ref = oracle::grid_argmin_2d(obj, v2(-3, -3), v2(3, 3), 1001);
  const Vec got = prox(f, g, x);
  CHECK((got - ref).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("prox solver failure carries the last iterate", "[prox][solver]") {
  const auto f = strip(softplus_functional(), true);
  SolverOptions opt;
  opt.max_iter = 1;
  opt.tol = 1e-300;
  try {
    (void)prox(f, 1.0, v1(5.0), opt);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.last_iterate().size() == 1);
    CHECK(e.residual() >= 0.0);
  }
}

TEST_CASE("moreau envelope examples", "[envelope]") {
  const auto c = constant_functional(1, 2.5);
  CHECK(moreau_envelope(c, 0.7, v1(-4.0)) == Approx(2.5));

  const auto q = quadratic_functional(1.0);
  for (double g : {0.1, 1.0, 3.0})
    for (double x0 : {-2.0, 0.5, 1.0}) CHECK(moreau_envelope(q, g, v1(x0)) == Approx(x0 * x0 / (2 * (1 + g))).margin(1e-12));

  const auto a = abs_functional();
  CHECK(moreau_envelope(a, 1.0, v1(2.0)) == Approx(1.5).margin(1e-12));
  CHECK(moreau_envelope(a, 1.0, v1(2.0)) == Approx(brute_envelope_1d(a, 1.0, 2.0, -4, 4)).margin(1e-9));
}

TEST_CASE("lambda-convexity checker", "[lambda]") {
  const auto q = quadratic_functional(1.0);
  CHECK(check_lambda_convexity(q, 1.0, box_sampler(1, -5, 5, 1), 500).violations.empty());

  const auto a = abs_functional();
  const auto rep = check_lambda_convexity(a, 0.1, {{v1(-1), v1(1), 0.5}, {v1(-10), v1(10), 0.5}, {v1(-100), v1(100), 0.5}});
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].triple.x[0] == -100.0);
  CHECK(rep.max_slack_violation == Approx(400.0));

  const auto ce = counterexample_functional(0.0);
  CHECK(check_lambda_convexity(ce, 0.0, box_sampler(2, -3, 3, 5), 1000).violations.empty());
  CHECK_THROWS_AS(check_lambda_convexity(q, 1.0, box_sampler(1, -1, 1, 1), 0), InputError);
}

TEST_CASE("zoo functionals honour their declared lambda", "[lambda][zoo]") {
  for (const auto& e : experiments::functional_zoo()) {
    INFO(e.f.name);
    CHECK(check_lambda_convexity(e.f, e.f.lambda, box_sampler(e.f.dim, e.lo, e.hi, 9), 300).violations.empty());
  }
}

TEST_CASE("envelope properties over the zoo", "[envelope][property]") {
  Rng rng(2024);
  for (const auto& e : experiments::functional_zoo()) {
    const auto& f = e.f;
    const double gmax = f.lambda < 0 ? 0.9 / std::abs(f.lambda) : 2.0;
    INFO(f.name);
    for (int k = 0; k < 8; ++k) {
      const Vec x = uniform_vec(rng, f.dim, e.lo, e.hi);
      const double g = uniform(rng, 0.01, gmax), d = uniform(rng, 0.01, gmax);
      const double eg = moreau_envelope(f, std::min(g, d), x), ed = moreau_envelope(f, std::max(g, d), x);
      CHECK(eg >= ed - 1e-9);
      CHECK(eg <= f(x) + 1e-12);
      // gamma -> 0 recovers Phi(x) along a decreasing sequence
      double prev_gap = gfstack::kInf;
      for (double s : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
        const double gap = f(x) - moreau_envelope(f, s * gmax, x);
        CHECK(gap <= prev_gap + 1e-12);
        prev_gap = gap;
      }
      CHECK(prev_gap < 1e-4 * (1.0 + std::abs(f(x))));
    }
  }
}

TEST_CASE("envelope semigroup law", "[envelope][property]") {
  Rng rng(99);
  for (const auto& e : experiments::functional_zoo(false)) {
    const auto& f = e.f;
    const double gmax = f.lambda < 0 ? 0.45 / std::abs(f.lambda) : 1.0;
    INFO(f.name);
    for (int k = 0; k < 3; ++k) {
      const Vec x = uniform_vec(rng, f.dim, e.lo, e.hi);
      const double g = uniform(rng, 0.05, gmax), d = uniform(rng, 0.05, gmax);
      const auto env = envelope_functional(f, g);
      CHECK(moreau_envelope(env, d, x) == Approx(moreau_envelope(f, g + d, x)).margin(1e-7));
    }
  }
}

TEST_CASE("envelope continuity in gamma", "[envelope][property]") {
  const auto f = double_well_functional();
  const Vec x = v1(0.4);
  const double gstar = 0.5, target = moreau_envelope(f, gstar, x);
  double prev = gfstack::kInf;
  for (int n = 1; n <= 64; n *= 2) {
    const double gap = std::abs(moreau_envelope(f, gstar + 0.3 / n, x) - target);
    CHECK(gap <= prev + 1e-12);
    prev = gap;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("prox Lipschitz modulus 1/(1 + gamma lambda)", "[prox][property]") {
  Rng rng(5);
  for (const auto& e : experiments::functional_zoo()) {
    const auto& f = e.f;
    const double gmax = f.lambda < 0 ? 0.9 / std::abs(f.lambda) : 2.0;
    INFO(f.name);
    for (int k = 0; k < 40; ++k) {
      const Vec x = uniform_vec(rng, f.dim, e.lo, e.hi), y = uniform_vec(rng, f.dim, e.lo, e.hi);
      const double g = uniform(rng, 0.01, gmax);
      const double lhs = f.norm(prox(f, g, x) - prox(f, g, y));
      CHECK(lhs <= f.norm(x - y) / (1.0 + g * f.lambda) * (1.0 + 1e-6) + 1e-12);
    }
  }
}
