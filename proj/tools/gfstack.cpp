#include "gfstack/experiments/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ex = gfstack::experiments;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  bool json = false;
};

ex::ExperimentConfig resolve_config(ex::Kind kind, const CommonFlags& f) {
  ex::ExperimentConfig cfg = ex::default_config(kind);
  if (!f.config.empty()) {
    cfg = ex::load_config(f.config, cfg);
    if (cfg.kind != kind)
      throw gfstack::InputError("config kind " + ex::kind_name(cfg.kind) + " does not match the subcommand");
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.tol) cfg.tolerance = *f.tol;
  if (!f.out.empty()) cfg.output = f.out;
  cfg.validate();
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw gfstack::InputError("cannot write " + path);
  os << text;
}

int emit(const std::vector<ex::Row>& rows, const std::string& out, bool json) {
  std::ostringstream csv;
  ex::write_csv(csv, rows);
  if (out.empty()) std::cout << csv.str();
  else write_file(out, csv.str());
  if (json) {
    std::ostringstream js;
    ex::write_json(js, rows);
    if (out.empty()) std::cout << js.str();
    else write_file(out + ".json", js.str());
  }
  int failed = 0;
  for (const auto& r : rows)
    if (!r.pass) {
      ++failed;
      std::cerr << "FAILED " << r.experiment << " n=" << r.n << " t=" << ex::fmt(r.t) << " " << r.metric
                << " lhs=" << ex::fmt(r.lhs) << " rhs=" << ex::fmt(r.rhs) << '\n';
    }
  return failed == 0 ? 0 : 1;
}

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--out", f.out, "output CSV path (stdout when omitted)");
  sub->add_option("--tol", f.tol, "tolerance");
  sub->add_flag("--json", f.json, "also write a JSON mirror (<out>.json)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gfstack: gradient flow and stacking experiments"};
  app.footer(std::string("\n") + ex::config_schema() +
             "environment: GFSTACK_THREADS caps the worker pool\n"
             "exit status: 0 when every row passes, 1 when a row fails, 2 on bad input\n");
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, ex::Kind>> kinds = {
      {"bounds", ex::Kind::BoundSuite},          {"d2c", ex::Kind::D2cHeat},
      {"resolvents", ex::Kind::Resolvents},      {"tlp", ex::Kind::TlpTable},
      {"audit-stacking", ex::Kind::StackingAudit}, {"audit-p0", ex::Kind::P0Audit}};
  const std::map<std::string, std::string> help = {
      {"bounds", "energy bound, decay, contraction and Crandall-Liggett rows over the functional zoo"},
      {"d2c", "graph heat flows against the fine-grid limit in TL^2"},
      {"resolvents", "resolvent and semigroup distances on a matrix family and a TL^2 heat family"},
      {"tlp", "TL^p solver against brute force, metric axioms, interpolation bound"},
      {"audit-stacking", "stacking axioms, Gamma-liminf, recovery and equicoercivity probes"},
      {"audit-p0", "P0-convexity of graph energies and the lambda-convex counterexample"}};

  CommonFlags flags;
  std::map<CLI::App*, ex::Kind> subs;
  for (const auto& [name, kind] : kinds) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    add_common(sub, flags);
    subs[sub] = kind;
  }
  std::string all_dir;
  std::optional<std::uint64_t> all_seed;
  CLI::App* all = app.add_subcommand("all", "run every experiment with its defaults, one CSV per kind");
  all->add_option("--out", all_dir, "output directory")->required();
  all->add_option("--seed", all_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (all->parsed()) {
      std::filesystem::create_directories(all_dir);
      int status = 0;
      for (const auto& [name, kind] : kinds) {
        ex::ExperimentConfig cfg = ex::default_config(kind);
        if (all_seed) cfg.seed = *all_seed;
        const auto rows = ex::run_experiment(cfg);
        status = std::max(status, emit(rows, (std::filesystem::path(all_dir) / (name + ".csv")).string(), false));
      }
      return status;
    }
    for (const auto& [sub, kind] : subs) {
      if (!sub->parsed()) continue;
      const ex::ExperimentConfig cfg = resolve_config(kind, flags);
      return emit(ex::run_experiment(cfg), cfg.output, flags.json);
    }
  } catch (const gfstack::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
