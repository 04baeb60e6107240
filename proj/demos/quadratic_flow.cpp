// Gradient flow of x^2/2 from x0 = 1 against the envelope bound.
#include "gfstack/functionals.hpp"
#include "gfstack/gradient_flow.hpp"

#include <cstdio>

using namespace gfstack;

int main() {
  const ProperFunctional phi = quadratic_functional(1.0);
  const Vec x0 = Vec::Constant(1, 1.0);
  const std::vector<double> times{0.0, 0.25, 0.5, 1.0, 2.0};

  const FlowResult fr = gradient_flow(phi, x0, times, 1e-8);
  std::printf("%6s %14s %14s %14s %14s\n", "t", "u(t)", "exp(-t)", "Phi(u(t))", "envelope");
  for (std::size_t k = 0; k < times.size(); ++k)
    std::printf("%6.2f %14.10f %14.10f %14.10f %14.10f\n", times[k], fr.trajectory.states[k][0],
                std::exp(-times[k]), fr.energies[k], fr.envelope_bounds[k]);
  std::printf("steps %lld, certified %s\n", fr.trajectory.meta.steps, fr.trajectory.meta.certified ? "yes" : "no");
}
