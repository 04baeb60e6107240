#pragma once

#include "gfstack/energies.hpp"

#include <vector>

namespace gfstack::experiments {

struct ZooEntry {
  ProperFunctional f;
  double lo = -2.0;  // sampling box for test points
  double hi = 2.0;
};

inline GraphEnergy two_node_graph() {
  Mat A = Mat::Zero(2, 2);
  A(0, 1) = A(1, 0) = 1.0;
  return make_graph_energy(A, Vec::Ones(2));
}

inline GraphEnergy random_graph(int n, std::uint64_t seed, LossKind loss = LossKind::Squared) {
  Rng rng(seed);
  const Mat A = random_adjacency(n, rng);
  Vec w = uniform_vec(rng, n, 0.5, 1.5);
  w /= w.sum();
  return make_graph_energy(A, w, loss);
}

// The shipped functional zoo. Graph TV is included only when `with_tv` is set,
// since its prox is iterative and slower.
inline std::vector<ZooEntry> functional_zoo(bool with_tv = true) {
  std::vector<ZooEntry> z;
  z.push_back({zero_functional(1)});
  z.push_back({constant_functional(1, 2.5)});
  for (double l : {0.5, 1.0, 2.0}) {
    auto q = quadratic_functional(l);
    q.name = "quadratic_l" + std::to_string(l).substr(0, 3);
    z.push_back({q});
  }
  z.push_back({abs_functional(1)});
  {
    auto a = abs_functional(3, Vec::Constant(3, 1.0 / 3.0));
    a.name = "l1_3d";
    z.push_back({a});
  }
  z.push_back({double_well_functional(1)});
  z.push_back({softplus_functional(1)});
  z.push_back({box_indicator(1), -1.0, 1.0});
  for (double l : {0.0, 1.0}) {
    auto c = counterexample_functional(l);
    c.name = l == 0.0 ? "counterexample_l0" : "counterexample_l1";
    z.push_back({c});
  }
  z.push_back({to_functional(two_node_graph(), "graph2")});
  z.push_back({to_functional(random_graph(5, 11), "graph5")});
  z.push_back({to_functional(random_graph(16, 12), "graph16")});
  if (with_tv) z.push_back({to_functional(random_graph(3, 13, LossKind::Absolute), "graph_tv3")});
  return z;
}

}  // namespace gfstack::experiments
