// TL^2 distance between a function on 4 points and one on 6 points.
#include "gfstack/transport.hpp"

#include <cstdio>
#include <numbers>

using namespace gfstack;

int main() {
  const EmpiricalMeasure mu = midpoint_grid(4), nu = midpoint_grid(6);
  Vec u(4), v(6);
  for (int i = 0; i < 4; ++i) u[i] = std::sin(std::numbers::pi * mu.atoms(i, 0));
  for (int j = 0; j < 6; ++j) v[j] = std::sin(std::numbers::pi * nu.atoms(j, 0));

  for (double p : {1.0, 2.0, 4.0}) {
    const DistanceResult w = wasserstein(mu, nu, p);
    const DistanceResult d = tlp_distance(TLpPoint(mu, u), TLpPoint(nu, v), p);
    std::printf("p = %g   W_p = %.10f   d_TLp = %.10f\n", p, w.distance, d.distance);
  }

  const DistanceResult d = tlp_distance(TLpPoint(mu, u), TLpPoint(nu, v), 2.0);
  std::printf("\noptimal plan (rows: 4-point grid, columns: 6-point grid)\n");
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 6; ++j) std::printf(" %8.5f", d.plan.pi(i, j));
    std::printf("\n");
  }
}
