// Graph heat flows on n points approaching the fine-grid heat flow in TL^2.
#include "gfstack/experiments/d2c.hpp"

#include <cstdio>

using namespace gfstack;
using namespace gfstack::experiments;

int main() {
  ExperimentConfig cfg = default_config(Kind::D2cHeat);
  const auto times = cfg.times();
  const D2cLimit lim = d2c_limit(cfg.sizes.back() * 8, times, cfg.initial);

  std::printf("%5s %16s %16s %14s %14s\n", "n", "sup TL2 dist", "max energy gap", "dissipation", "limit");
  for (int n : cfg.sizes) {
    const D2cLevel lv = d2c_level(n, lim, times);
    std::printf("%5d %16.10f %16.10f %14.10f %14.10f\n", n, lv.sup_distance, lv.max_energy_gap, lv.dissipation,
                lv.limit_dissipation);
  }
}
