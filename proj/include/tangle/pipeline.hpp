#ifndef TANGLE_PIPELINE_HPP
#define TANGLE_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tangle/fold.hpp"
#include "tangle/graph.hpp"
#include "tangle/io.hpp"
#include "tangle/multihump.hpp"

namespace tangle {

struct RunConfig {
  std::string map = "henon-shear";
  double a = 1.4;
  double b = 1.4;
  double lambda_tilde = 0.35;
  int j_minus = -20;
  int j_plus = 21;
  // window of one hump in multi-hump pseudo-orbits; gap = j_plus - j_minus + 1
  int hump_j_minus = -6;
  int hump_j_plus = 7;
  double tol = 1e-10;
  double lambda_min = 0.02;
  double lambda_max = 0.98;
  int n = 1;
  std::string out = "out";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::uint64_t partition_budget = 100000000;

  void validate() const;
  // Stable text form of every field that influences results (not `out`, not `threads`).
  std::string canonical() const;
  std::uint64_t hash() const { return fnv1a(canonical()); }
  ContinuationSettings continuation() const;
};

struct PrimaryFold {
  std::string name;  // e.g. "r01": side and the symbols of the neighbouring crossings
  FoldEvent event;
  std::optional<TangencyData> tangency;
  std::vector<FitReport> fits;  // one per entry of kFitScales
  double c_x_doubled = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

inline constexpr double kFitScales[] = {0.1, 0.05, 0.02, 0.01};

struct PrimaryResult {
  MapPtr map;
  Eigen::VectorXd xi;
  OrbitSegment seed;
  Branch branch;
  std::vector<OrbitSegment> orbits;       // indexed by symbol
  std::vector<int> crossing_symbols;      // aligned with branch.crossings
  std::vector<PrimaryFold> folds;         // branch order
  bool orderings_hold = false;
  std::vector<std::string> warnings;

  HomoclinicBVP bvp(int n_minus, int n_plus) const { return HomoclinicBVP(map, xi, n_minus, n_plus); }
  const PrimaryFold* fold(const std::string& name) const;
};

MapPtr config_map(const RunConfig& cfg);
// The saddle on the hump side: the fixed point with the largest first coordinate.
Eigen::VectorXd config_fixed_point(const RunConfig& cfg);

// Seeds, traces the branch through lambda_tilde, labels the crossings and analyses every fold.
// Symbols: 0 is the crossing of least amplitude; the others follow along the branch in the
// direction in which the fold after 0 is a right fold.
PrimaryResult run_primary(const RunConfig& cfg, bool analyse_folds = true);

PrimarySet primary_set(const RunConfig& cfg, const std::vector<OrbitSegment>& orbits);

struct MultihumpResult {
  PrimarySet primaries;
  OrbitCatalog catalog;
  ComponentResult components;
};

MultihumpResult run_multihump(const RunConfig& cfg, const std::vector<OrbitSegment>& primary_orbits);

struct CrossValidation {
  bool cycles_valid = false;
  bool covers = false;  // every vertex on exactly one cycle
  std::optional<std::uint64_t> partition_index;
  std::vector<std::string> diagnostics;
  bool ok() const { return cycles_valid && covers && partition_index.has_value(); }
};

LRCycle to_lr_cycle(const EmpiricalCycle& c);
CrossValidation cross_validate(const TransitionGraph& g, const std::vector<EmpiricalCycle>& cycles,
                               std::uint64_t budget = 100000000);

// Artifact writers; each returns the list of files written relative to the run directory.
json manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& files,
              const std::vector<std::string>& warnings, const std::vector<std::string>& failures);

std::vector<std::string> write_primary(const std::filesystem::path& dir, const PrimaryResult& r);
std::vector<OrbitSegment> read_primary_orbits(const std::filesystem::path& dir);
std::vector<std::string> write_multihump(const std::filesystem::path& dir, const MultihumpResult& r);
std::vector<EmpiricalCycle> read_empirical_cycles(const std::filesystem::path& dir);

struct GraphResult {
  TransitionGraph graph;
  P1Report report;
  std::vector<CyclePartition> listed;  // first partitions in enumeration order
  std::uint64_t total = 0;
  bool budget_exceeded = false;
  std::optional<CrossValidation> cross;
};

inline constexpr std::size_t kListedPartitions = 100;

GraphResult run_graph(int n, std::uint64_t budget, const std::vector<EmpiricalCycle>* empirical = nullptr);
std::vector<std::string> write_graph(const std::filesystem::path& dir, const GraphResult& r);

}  // namespace tangle

#endif
