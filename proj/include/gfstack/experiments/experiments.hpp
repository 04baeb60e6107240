#pragma once

#include "gfstack/experiments/audits.hpp"
#include "gfstack/experiments/bounds.hpp"
#include "gfstack/experiments/config.hpp"
#include "gfstack/experiments/csv.hpp"
#include "gfstack/experiments/d2c.hpp"
#include "gfstack/experiments/resolvents.hpp"
#include "gfstack/experiments/runner.hpp"
#include "gfstack/experiments/tlp.hpp"

namespace gfstack::experiments {

inline std::vector<Row> run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case Kind::D2cHeat: return run_d2c_experiment(cfg);
    case Kind::BoundSuite: return run_bound_suite(cfg);
    case Kind::TlpTable: return run_tlp_table(cfg);
    case Kind::StackingAudit: return run_stacking_audit(cfg);
    case Kind::P0Audit: return run_p0_audit(cfg);
    case Kind::Resolvents: return run_resolvent_convergence(cfg);
  }
  return {};
}

}  // namespace gfstack::experiments
