#ifndef TANGLE_MULTIHUMP_HPP
#define TANGLE_MULTIHUMP_HPP

#include <map>
#include <string>
#include <vector>

#include "tangle/continuation.hpp"
#include "tangle/orbit.hpp"

namespace tangle {

using Symbol = std::vector<int>;

std::string symbol_string(const Symbol& s);
Symbol parse_symbol(const std::string& s);
// All of {0,1,2,3}^n in lexicographic order.
std::vector<Symbol> all_symbols(int n);

enum class PseudoMode { Concat, Additive };

// The four one-hump orbits on a common window, indexed by their symbol.
struct PrimarySet {
  std::vector<OrbitSegment> orbits;
  Eigen::VectorXd xi;
  double lambda = 0.0;
  int n_minus = 0;
  int n_plus = 0;
  int gap() const { return n_plus - n_minus + 1; }
};

struct PseudoOrbit {
  Symbol symbol;
  PseudoMode mode = PseudoMode::Concat;
  int gap = 0;
  OrbitSegment segment;
};

inline constexpr int kMinimumGap = 10;

// Humps sit at offsets 0, gap, 2 gap, ...; the result lives on
// [n_minus, n_minus + n * gap - 1].
PseudoOrbit build_pseudo_orbit(const PrimarySet& primaries, const Symbol& s, PseudoMode mode,
                               int min_gap = kMinimumGap);

// p_n = xi + sum_l (x^{s_l}_{n - offset_l} - xi) on [n_minus, n_plus]; primaries are
// taken as xi outside their stored window.
OrbitSegment additive_pseudo_orbit(const PrimarySet& primaries, const Symbol& s, const std::vector<int>& offsets,
                                   int n_minus, int n_plus);

// Sup-norm of the interior equations x_{n+1} - f(x_n).
double dynamics_residual(const Map& f, const OrbitSegment& orbit);

struct ShadowResult {
  OrbitSegment orbit;
  double pseudo_residual = 0.0;
  double distance = 0.0;  // sup-norm distance to the pseudo-orbit
  std::vector<double> history;
};

// `bvp` supplies the map, the fixed point and the boundary condition; its window
// is replaced by the pseudo-orbit's.
ShadowResult shadow_orbit(const HomoclinicBVP& bvp, const PseudoOrbit& p,
                          const NewtonSettings& settings = {1e-10, 40, 0.5});

struct OrbitCatalog {
  int n = 0;
  double lambda_tilde = 0.0;
  std::vector<Symbol> symbols;       // lexicographic
  std::vector<OrbitSegment> orbits;  // aligned with symbols; failed entries are empty
  std::vector<bool> solved;
  std::vector<std::string> failures;
  double min_separation = 0.0;

  bool complete() const { return failures.empty(); }
  const OrbitSegment& at(const Symbol& s) const;
};

OrbitCatalog enumerate_catalog(const HomoclinicBVP& bvp, const PrimarySet& primaries, int n,
                               const NewtonSettings& settings = {1e-10, 40, 0.5}, unsigned threads = 0);

struct SymbolMatch {
  Symbol symbol;
  double distance = 0.0;
  double runner_up = 0.0;
  int shift = 0;
};

// Nearest catalog entry in sup norm over shifts in [-max_shift, max_shift]; the
// winner must beat the runner-up by the factor `margin`.
SymbolMatch identify_symbol(const OrbitSegment& orbit, const OrbitCatalog& catalog, int max_shift = 2,
                            double margin = 2.0);

struct EmpiricalCycle {
  std::vector<Symbol> vertices;
  std::vector<FoldSide> labels;  // labels[i]: fold between vertices[i] and vertices[i+1]
  int branch_id = 0;
  bool closed = false;
  bool consistent = false;  // closed, one fold between consecutive crossings, no repeats
  std::vector<double> fold_lambdas;
  std::string note;
};

struct ComponentResult {
  std::vector<EmpiricalCycle> cycles;
  std::map<int, int> table;  // cycle length -> count, consistent cycles only
  std::vector<std::string> warnings;
  int total_steps = 0;

  int covered() const;
};

ComponentResult trace_all_components(const OrbitCatalog& catalog, const HomoclinicBVP& bvp,
                                     const ContinuationSettings& settings);

}  // namespace tangle

#endif
