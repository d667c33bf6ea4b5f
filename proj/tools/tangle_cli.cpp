#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "tangle/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tangle;

namespace {

void add_common(CLI::App& app, RunConfig& cfg) {
  app.add_option("--map", cfg.map, "henon-shear or henon")->capture_default_str();
  app.add_option("--a", cfg.a, "quadratic coefficient of henon-shear")->capture_default_str();
  app.add_option("--b", cfg.b, "second coefficient of henon")->capture_default_str();
  app.add_option("--lambda-tilde", cfg.lambda_tilde)->capture_default_str();
  app.add_option("--j-minus", cfg.j_minus)->capture_default_str();
  app.add_option("--j-plus", cfg.j_plus)->capture_default_str();
  app.add_option("--hump-j-minus", cfg.hump_j_minus, "window of one hump in n-hump orbits")->capture_default_str();
  app.add_option("--hump-j-plus", cfg.hump_j_plus)->capture_default_str();
  app.add_option("--tol", cfg.tol)->capture_default_str();
  app.add_option("--lambda-window", [&cfg](const CLI::results_t& v) {
       if (v.size() != 2) return false;
       cfg.lambda_min = std::stod(v[0]);
       cfg.lambda_max = std::stod(v[1]);
       return true;
     }, "lower and upper lambda bound")
      ->expected(2);
  app.add_option("--n", cfg.n)->capture_default_str();
  app.add_option("--out", cfg.out)->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--threads", cfg.threads, "0 uses every core");
  app.add_option("--partition-budget", cfg.partition_budget)->capture_default_str();
}

void finish(const fs::path& dir, const RunConfig& cfg, const std::string& cmd, const std::vector<std::string>& files,
            const std::vector<std::string>& warnings, const std::vector<std::string>& failures) {
  write_json(dir / "manifest.json", manifest(cfg, cmd, files, warnings, failures));
}

int cmd_primary(const RunConfig& cfg) {
  const fs::path dir = fs::path(cfg.out) / "primary";
  PrimaryResult r = run_primary(cfg);
  auto files = write_primary(dir, r);
  std::vector<std::string> failures;
  if (!r.branch.closed) failures.push_back("branch not closed");
  for (const auto& f : r.folds)
    if (!f.error.empty()) failures.push_back(f.name + ": " + f.error);
  finish(dir, cfg, "primary", files, r.warnings, failures);
  std::cout << "primary: " << r.branch.crossings.size() << " crossings, " << r.branch.folds.size() << " folds";
  for (const auto& f : r.folds) std::cout << " " << f.name << "=" << format_double(f.event.lambda);
  std::cout << (r.branch.closed ? ", closed" : ", open") << "\n";
  return failures.empty() ? 0 : 2;
}

int cmd_multihump(const RunConfig& cfg) {
  const fs::path primary = fs::path(cfg.out) / "primary";
  std::vector<std::string> warnings;
  std::vector<OrbitSegment> orbits;
  if (fs::exists(primary / "orbits.json")) {
    orbits = read_primary_orbits(primary);
  } else {
    warnings.push_back("no primary artifacts; primary run performed first");
    RunConfig pc = cfg;
    pc.n = 1;
    PrimaryResult r = run_primary(pc, false);
    finish(primary, pc, "primary", write_primary(primary, r), r.warnings, {});
    orbits = r.orbits;
  }
  const fs::path dir = fs::path(cfg.out) / ("multihump-n" + std::to_string(cfg.n));
  MultihumpResult r = run_multihump(cfg, orbits);
  auto files = write_multihump(dir, r);
  warnings.insert(warnings.end(), r.components.warnings.begin(), r.components.warnings.end());
  std::vector<std::string> failures = r.catalog.failures;
  if (r.components.covered() != static_cast<int>(r.catalog.symbols.size()))
    failures.push_back("cycles cover " + std::to_string(r.components.covered()) + " of " +
                       std::to_string(r.catalog.symbols.size()) + " symbols");
  finish(dir, cfg, "multihump", files, warnings, failures);
  std::cout << table_csv(cfg.n, r.components.table);
  return failures.empty() ? 0 : 2;
}

int cmd_graph(const RunConfig& cfg) {
  const fs::path dir = fs::path(cfg.out) / ("graph-n" + std::to_string(cfg.n));
  const fs::path mh = fs::path(cfg.out) / ("multihump-n" + std::to_string(cfg.n));
  std::vector<EmpiricalCycle> cycles;
  const bool have = fs::exists(mh / "cycles.json");
  if (have) cycles = read_empirical_cycles(mh);
  GraphResult r = run_graph(cfg.n, cfg.partition_budget, have ? &cycles : nullptr);
  auto files = write_graph(dir, r);
  std::vector<std::string> warnings, failures;
  if (r.budget_exceeded) warnings.push_back("BudgetExceeded: enumeration stopped after " + std::to_string(r.total));
  if (!r.report.ok()) failures.push_back(r.report.violation.value_or("P1 report not ok"));
  if (r.cross && !r.cross->ok())
    for (const auto& d : r.cross->diagnostics) failures.push_back("cross-validation: " + d);
  finish(dir, cfg, "graph", files, warnings, failures);
  std::cout << "graph n=" << cfg.n << ": " << r.total << " partitions, P1 " << (r.report.ok() ? "ok" : "violated");
  if (r.cross) std::cout << ", cross-validation " << (r.cross->ok() ? "ok" : "failed");
  std::cout << "\n";
  return failures.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homoclinic tangle continuation and transition graphs"};
  app.set_config("--config", "", "INI or TOML file with option values");
  app.require_subcommand(1);
  RunConfig cfg;
  auto* primary = app.add_subcommand("primary", "trace the one-hump branch and analyse its folds");
  auto* multihump = app.add_subcommand("multihump", "n-hump catalog and cycle table");
  auto* graph = app.add_subcommand("graph", "transition graph, LR-cycle covers and the cycle-length report");
  // options live on the top level so that config files use flat keys
  for (auto* sc : {primary, multihump, graph}) sc->fallthrough();
  add_common(app, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    cfg.validate();
    if (primary->parsed()) return cmd_primary(cfg);
    if (multihump->parsed()) return cmd_multihump(cfg);
    return cmd_graph(cfg);
  } catch (const Error& e) {
    json err = {{"error", error_name(e.code())}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    try {
      write_json(fs::path(cfg.out) / "error.json", err);
    } catch (const Error&) {
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
}
