// A lambda-convex quadratic on R^2 that fails the P0 inequality.
#include "gfstack/energies.hpp"

#include <cstdio>

using namespace gfstack;

int main() {
  for (double lambda : {0.0, 1.0, 4.0}) {
    const CounterexampleReport r = counterexample_demo(lambda);
    std::printf("lambda = %g: convexity violations %zu, P0 lhs %.6f rhs %.6f slack %.6f\n", lambda,
                r.convexity.violations.size(), r.p0.lhs, r.p0.rhs, r.p0.slack);
  }
  const P0TestFunction g = counterexample_g();
  std::printf("g(1) = %.12f, g(-1) = %.12f\n", g(1.0), g(-1.0));
}
