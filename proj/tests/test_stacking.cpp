#include "gfstack/convex_core.hpp"
#include "gfstack/stacking.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace gfstack;
using Catch::Approx;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Mat diag(std::initializer_list<double> xs) { return vec(xs).asDiagonal(); }

const std::vector<int> kSizes = {4, 8, 16, 32, 64};

MatrixHilbertStacking shrinking_identity(int d) {
  MatrixHilbertStacking s(Mat::Identity(d, d));
  for (int n : kSizes) s.add(n, (1.0 + 1.0 / n) * Mat::Identity(d, d));
  return s;
}

TLpStacking grid_stacking(int fine, const std::vector<int>& sizes, double p = 2.0) {
  TLpStacking s(midpoint_grid(fine), p);
  for (int n : sizes) s.add(n, midpoint_grid(n));
  return s;
}

StackSequence constant_sequence(const std::vector<int>& idx, const Vec& x) {
  return {idx, std::vector<Vec>(idx.size(), x), x, 1e-12};
}

}  // namespace

TEST_CASE("stacking distance examples", "[stacking]") {
  MatrixHilbertStacking id(Mat::Identity(2, 2));
  id.add(1, Mat::Identity(2, 2));
  const Vec x = vec({1, 2}), y = vec({-3, 0.5});
  CHECK(stacking_distance(id, 1, x, kLimit, y) == Approx((x - y).norm()).epsilon(1e-14));

  MatrixHilbertStacking d(diag({4, 1}));
  CHECK(d.sqrt_matrix(kLimit).isApprox(diag({2, 1}), 1e-14));
  CHECK(stacking_distance(d, kLimit, vec({1, 0}), kLimit, vec({0, 0})) == Approx(2.0).epsilon(1e-14));

  TLpStacking t(uniform_measure_1d(vec({0.0, 1.0})), 1.0);
  t.add(1, uniform_measure_1d(vec({0.0, 1.0})));
  CHECK(stacking_distance(t, 1, vec({0, 1}), kLimit, vec({1, 0})) == Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(stacking_distance(d, 3, x, kLimit, y), InputError);
  CHECK_THROWS_AS(stacking_distance(d, kLimit, vec({1, 2, 3}), kLimit, y), InputError);
}

TEST_CASE("matrix stacking validates its matrices", "[stacking]") {
  MatrixHilbertStacking s(Mat::Identity(2, 2));
  CHECK_THROWS_AS(s.add(1, diag({1, 0})), DomainError);
  CHECK_THROWS_AS(s.add(1, diag({1, -2})), DomainError);
  Mat skew(2, 2);
  skew << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(s.add(1, skew), InputError);
  CHECK_THROWS_AS(s.add(1, Mat::Identity(3, 3)), InputError);
  Mat spd(2, 2);
  spd << 2, 1, 1, 2;
  s.add(2, spd);
  CHECK((s.sqrt_matrix(2) * s.sqrt_matrix(2)).isApprox(spd, 1e-13));
}

TEST_CASE("embeddings are 1-Lipschitz and distances obey the triangle inequality across indices", "[stacking][property]") {
  Rng rng(3);
  SubspaceStacking sub(5, {{1, 2}, {2, 3}, {3, 5}});
  MatrixHilbertStacking mat(diag({1.5, 0.7, 2.0}));
  for (int n : {1, 2, 3}) {
    const Mat B = uniform_vec(rng, 9, -1, 1).reshaped(3, 3);
    mat.add(n, B * B.transpose() + 0.3 * Mat::Identity(3, 3));
  }
  TLpStacking tlp = grid_stacking(12, {2, 3, 5}, 1.5);
  TLpStacking rnd(uniform_measure(Mat(uniform_vec(rng, 6, 0, 1))), 2.0);
  rnd.add(1, uniform_measure(Mat(uniform_vec(rng, 4, 0, 1))));
  rnd.add(2, EmpiricalMeasure(Mat(uniform_vec(rng, 3, 0, 1)), vec({0.2, 0.3, 0.5})));
  CircleStacking circ;

  const std::vector<std::pair<const Stacking*, std::vector<int>>> cases = {
      {&sub, {1, 2, 3, kLimit}}, {&mat, {1, 2, 3, kLimit}}, {&tlp, {2, 3, 5, kLimit}},
      {&rnd, {1, 2, kLimit}},    {&circ, {1, 2, 7, kLimit}}};
  for (const auto& [s, idx] : cases) {
    INFO(s->index_kind());
    for (int k = 0; k < 40; ++k) {
      const int a = idx[k % idx.size()], b = idx[(k / 2) % idx.size()], c = idx[(k / 3) % idx.size()];
      const Vec x = uniform_vec(rng, s->dim(a), -3, 3), x2 = uniform_vec(rng, s->dim(a), -3, 3);
      const Vec y = uniform_vec(rng, s->dim(b), -3, 3), z = uniform_vec(rng, s->dim(c), -3, 3);
      CHECK(stacking_distance(*s, a, x, a, x2) <= s->norm(a, x - x2) + 1e-9);
      const double xy = stacking_distance(*s, a, x, b, y);
      CHECK(std::abs(xy - stacking_distance(*s, b, y, a, x)) <= 1e-9);
      CHECK(xy <= stacking_distance(*s, a, x, c, z) + stacking_distance(*s, c, z, b, y) + 1e-9);
    }
  }
}

TEST_CASE("zero converges along the shipped index sequences", "[stacking]") {
  const auto mat = shrinking_identity(3);
  const auto tlp = grid_stacking(64, {4, 8, 16, 32});
  SubspaceStacking sub(4, {{4, 1}, {8, 2}, {16, 4}});
  for (int n : {4, 8, 16}) CHECK(stacking_distance(sub, n, Vec::Zero(sub.dim(n)), kLimit, Vec::Zero(4)) == 0.0);
  for (int n : kSizes) CHECK(stacking_distance(mat, n, Vec::Zero(3), kLimit, Vec::Zero(3)) == 0.0);
  for (int n : {4, 8, 16, 32}) {
    const double d = stacking_distance(tlp, n, Vec::Zero(n), kLimit, Vec::Zero(64));
    // W_2 between midpoint grids: every coarse cell spreads evenly over its fine block
    const double oracle = std::sqrt((1.0 / (n * n) - 1.0 / (64.0 * 64.0)) / 12.0);
    CHECK(d == Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("stacking axioms on the shrinking identity family", "[stacking][axioms]") {
  const auto s = shrinking_identity(2);
  const Vec x = vec({1, 2}), y = vec({-0.5, 0.25});
  StackSequence a{kSizes, std::vector<Vec>(kSizes.size(), x), x, 0.02};
  StackSequence b{kSizes, std::vector<Vec>(kSizes.size(), y), y, 0.02};
  const auto rep = check_stacking_axioms(s, {a, b});
  CHECK(rep.all());
  for (std::size_t k = 0; k < kSizes.size(); ++k) {
    const double n = kSizes[k];
    CHECK(rep.norm_gaps[0][k] == Approx((std::sqrt(1 + 1 / n) - 1) * x.norm()).epsilon(1e-12));
    CHECK(rep.distances[0][k] == Approx((std::sqrt(1 + 1 / n) - 1) * x.norm()).epsilon(1e-12));
  }

  StackSequence wrong = a;
  wrong.limit = vec({1, 2.5});
  CHECK_FALSE(check_stacking_axioms(s, {wrong}).norms);
}

TEST_CASE("constant sequences pass every axiom", "[stacking][axioms]") {
  MatrixHilbertStacking fixed(diag({2, 3}));
  for (int n : kSizes) fixed.add(n, diag({2, 3}));
  CHECK(check_stacking_axioms(fixed, {constant_sequence(kSizes, vec({1, -1}))}).all());

  SubspaceStacking sub(3, {{1, 3}, {2, 3}});
  CHECK(check_stacking_axioms(sub, {constant_sequence({1, 2}, vec({0.1, 0.2, 0.3}))}).all());

  TLpStacking tlp(midpoint_grid(5), 2.0);
  for (int n : {1, 2, 3}) tlp.add(n, midpoint_grid(5));
  CHECK(check_stacking_axioms(tlp, {constant_sequence({1, 2, 3}, vec({1, 0, 2, 0, 1}))}).all());
}

TEST_CASE("TLp stacking with barycentric sequences on midpoint grids", "[stacking][axioms]") {
  const std::vector<int> sizes = {4, 8, 16, 32};
  const int fine = 256;
  const auto s = grid_stacking(fine, sizes);
  const Vec uinf = s.measure(kLimit).atoms.col(0);
  StackSequence q{sizes, {}, uinf, 0.02};
  for (int n : sizes) q.points.push_back(s.approximate(n, uinf));
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    // each coarse cell averages its fine block, which reproduces the coarse midpoints
    CHECK((q.points[k] - s.measure(sizes[k]).atoms.col(0)).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  const auto rep = check_stacking_axioms(s, {q});
  CHECK(rep.all());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const double n = sizes[k];
    const double oracle = std::sqrt(1.0 / 3 - 1.0 / (12 * fine * fine)) - std::sqrt(1.0 / 3 - 1.0 / (12 * n * n));
    CHECK(rep.norm_gaps[0][k] == Approx(oracle).epsilon(1e-8));
    CHECK(rep.norm_gaps[0][k] * n <= 1.0);
  }
}

TEST_CASE("gamma liminf probe", "[gamma]") {
  const auto s = shrinking_identity(2);
  const Vec x = vec({1, -1});
  EnergySequence same{[](int, const Vec& v) { return 0.5 * v.squaredNorm(); }, "same"};
  std::vector<Vec> pts;
  for (int n : kSizes) pts.push_back(x + Vec::Constant(2, 1.0 / n));
  const StackSequence q{kSizes, pts, x, 0.05};
  const auto ok = gamma_liminf_check(same, s, q);
  CHECK(ok.converging);
  CHECK(ok.ok);
  CHECK(ok.limit_value == Approx(1.0));

  EnergySequence broken{[](int n, const Vec& v) { return n == kLimit ? v.squaredNorm() : v.squaredNorm() / n; },
                        "broken"};
  const auto bad = gamma_liminf_check(broken, s, q);
  CHECK_FALSE(bad.ok);
  CHECK(bad.liminf_estimate < bad.limit_value);
}

TEST_CASE("recovery sequences", "[gamma]") {
  TLpStacking same(midpoint_grid(6), 2.0);
  for (int n : {1, 2}) same.add(n, midpoint_grid(6));
  const Vec x = vec({0.3, -1, 2, 0, 0.5, 1});
  EnergySequence l2{[&](int n, const Vec& v) { return lr_norm(v, same.measure(n).weights, 2.0); }, "l2"};
  const auto r = recovery_sequence(l2, same, x, {1, 2});
  for (const auto& p : r.points) CHECK((p - x).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK(r.limsup_estimate == Approx(r.limit_value));
  CHECK(r.ok);

  EnergySequence inf{[](int n, const Vec& v) { return n == kLimit ? kInf : v.squaredNorm(); }, "inf"};
  CHECK(recovery_sequence(inf, same, x, {1, 2}).ok);

  // discrete Dirichlet energies of barycentric projections of a smooth function
  const std::vector<int> sizes = {8, 16, 32, 64};
  const auto s = grid_stacking(512, sizes);
  auto dirichlet = [](int, const Vec& u) {
    const double h = 1.0 / static_cast<double>(u.size());
    return 0.5 * (u.tail(u.size() - 1) - u.head(u.size() - 1)).squaredNorm() / h;
  };
  const Vec xinf = s.measure(kLimit).atoms.col(0).array().sin().matrix();
  const auto d = recovery_sequence({dirichlet, "dirichlet"}, s, xinf, sizes);
  CHECK(d.ok);
  for (std::size_t k = 1; k < sizes.size(); ++k) CHECK(d.distances[k] < d.distances[k - 1]);
}

TEST_CASE("equicoercivity probe", "[gamma]") {
  EnergySequence zero{[](int, const Vec&) { return 0.0; }, "zero"};
  SubspaceStacking line(1, {{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1}});
  const std::vector<int> idx = {1, 2, 3, 4, 5, 6};

  const auto c = equicoercivity_probe(zero, line, 1.0, idx, std::vector<Vec>(6, vec({0.5})), 1e-9, vec({0.5}));
  CHECK(c.cauchy_subsequence);
  CHECK(c.sublevel_ok);
  CHECK(c.best_cluster_limit == 0.0);

  std::vector<Vec> escape;
  for (int n : idx) escape.push_back(vec({static_cast<double>(n)}));
  const auto e = equicoercivity_probe(zero, line, 1.0, idx, escape, 0.1);
  CHECK_FALSE(e.cauchy_subsequence);
  CHECK(e.pairwise(0, 5) == Approx(5.0));
  CHECK(e.clusters.size() == 6);

  // circle fixture: minimisers n of Phi_n cluster in the compact target but stay away
  // from the minimiser 0 of the limit
  CircleStacking circ;
  EnergySequence ce{circle_energy, "circle"};
  const std::vector<int> big = {10, 20, 40, 80, 160, 320};
  std::vector<Vec> mins;
  for (int n : big) {
    mins.push_back(vec({static_cast<double>(n)}));
    CHECK(circle_energy(n, mins.back()) == 0.0);
    CHECK(circle_energy(n, vec({n + 0.5})) > 0.0);
  }
  const auto r = equicoercivity_probe(ce, circ, 1.0, big, mins, 0.01, vec({0.0}));
  CHECK(r.sublevel_ok);
  CHECK(r.cauchy_subsequence);
  CHECK(r.best_cluster_limit > 0.99);
}

TEST_CASE("uniform lower bound and minimiser convergence for 1-convex quadratic families", "[gamma][property]") {
  // Phi_n(x) = 1/2 <x, x>_{A_n} - b_n . x on H_{A_n} with A_n, b_n converging; minimisers by prox fixed points.
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 3;
    const Vec ainf = uniform_vec(rng, d, 0.5, 3.0), binf = uniform_vec(rng, d, -2, 2);
    MatrixHilbertStacking s(Mat(ainf.asDiagonal()));
    std::vector<double> mins;
    std::vector<Vec> argmins;
    std::vector<int> idx = kSizes;
    idx.push_back(kLimit);
    for (int n : idx) {
      const double h = n == kLimit ? 0.0 : 1.0 / n;
      const Vec a = (ainf.array() * (1.0 + h * uniform_vec(rng, d, -1, 1).array())).matrix();
      const Vec b = binf + h * uniform_vec(rng, d, -1, 1);
      if (n != kLimit) s.add(n, Mat(a.asDiagonal()));
      ProperFunctional f;
      f.dim = d;
      f.weights = a;
      f.lambda = 1.0;
      f.value = [a, b](const Vec& x) { return 0.5 * (a.array() * x.array().square()).sum() - b.dot(x); };
      f.gradient = [a, b](const Vec& x) -> Vec { return (a.array() * x.array()).matrix() - b; };
      REQUIRE(check_lambda_convexity(f, 1.0, box_sampler(d, -3, 3, 1), 200).violations.empty());
      Vec x = Vec::Zero(d);
      for (int it = 0; it < 80; ++it) x = prox(f, 1.0, x);
      const Vec exact = (b.array() / a.array()).matrix();
      CHECK((x - exact).lpNorm<Eigen::Infinity>() <= 1e-9);
      mins.push_back(f(x));
      argmins.push_back(x);
    }
    const double L = -0.5 * (binf.cwiseAbs().array() + 1.0).square().sum() / (0.5 * ainf.minCoeff());
    for (double m : mins) CHECK(m >= L);
    const Vec xinf = argmins.back();
    std::vector<double> dist, gap;
    for (std::size_t k = 0; k < kSizes.size(); ++k) {
      dist.push_back(stacking_distance(s, kSizes[k], argmins[k], kLimit, xinf));
      gap.push_back(std::abs(mins[k] - mins.back()));
      CHECK(dist.back() * kSizes[k] <= 50.0);
      CHECK(gap.back() * kSizes[k] <= 50.0);
    }
    CHECK(dist.back() < dist.front());
  }
}
