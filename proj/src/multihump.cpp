#include "tangle/multihump.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace tangle {

std::string symbol_string(const Symbol& s) {
  std::string out;
  for (int d : s) out.push_back(static_cast<char>('0' + d));
  return out;
}

Symbol parse_symbol(const std::string& s) {
  Symbol out;
  for (char c : s) {
    if (c < '0' || c > '3') throw Error(ErrorCode::InvalidArgument, "bad symbol '" + s + "'");
    out.push_back(c - '0');
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty symbol");
  return out;
}

std::vector<Symbol> all_symbols(int n) {
  std::vector<Symbol> out;
  std::size_t total = std::size_t(1) << (2 * n);
  for (std::size_t code = 0; code < total; ++code) {
    Symbol s(static_cast<std::size_t>(n));
    for (int j = n - 1, c = static_cast<int>(code); j >= 0; --j, c /= 4) s[static_cast<std::size_t>(j)] = c % 4;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::size_t symbol_index(const Symbol& s) {
  std::size_t i = 0;
  for (int d : s) i = i * 4 + static_cast<std::size_t>(d);
  return i;
}

void check_symbol(const PrimarySet& p, const Symbol& s) {
  if (s.empty()) throw Error(ErrorCode::InvalidArgument, "empty symbol");
  for (int d : s)
    if (d < 0 || d >= static_cast<int>(p.orbits.size()))
      throw Error(ErrorCode::InvalidArgument, "symbol entry without a primary orbit");
}

}  // namespace

OrbitSegment additive_pseudo_orbit(const PrimarySet& primaries, const Symbol& s, const std::vector<int>& offsets,
                                   int n_minus, int n_plus) {
  check_symbol(primaries, s);
  if (offsets.size() != s.size()) throw Error(ErrorCode::InvalidArgument, "one offset per symbol entry");
  const Eigen::Index k = primaries.xi.size();
  OrbitSegment o;
  o.n_minus = n_minus;
  o.n_plus = n_plus;
  o.lambda = primaries.lambda;
  o.points.resize(k, n_plus - n_minus + 1);
  for (int n = n_minus; n <= n_plus; ++n) {
    Eigen::VectorXd disp = Eigen::VectorXd::Zero(k);
    for (std::size_t l = 0; l < s.size(); ++l) {
      const OrbitSegment& x = primaries.orbits[static_cast<std::size_t>(s[l])];
      const int m = n - offsets[l];
      if (m >= x.n_minus && m <= x.n_plus) disp += x.point(m) - primaries.xi;
    }
    o.points.col(n - n_minus) = primaries.xi + disp;
  }
  return o;
}

PseudoOrbit build_pseudo_orbit(const PrimarySet& primaries, const Symbol& s, PseudoMode mode, int min_gap) {
  check_symbol(primaries, s);
  const int gap = primaries.gap();
  if (s.size() > 1 && gap < min_gap)
    throw Error(ErrorCode::GapTooSmall, "hump gap " + std::to_string(gap) + " below " + std::to_string(min_gap));
  const int n = static_cast<int>(s.size());
  PseudoOrbit p;
  p.symbol = s;
  p.mode = mode;
  p.gap = gap;
  const int lo = primaries.n_minus, hi = primaries.n_minus + n * gap - 1;
  if (mode == PseudoMode::Concat) {
    OrbitSegment& o = p.segment;
    o.n_minus = lo;
    o.n_plus = hi;
    o.lambda = primaries.lambda;
    o.points.resize(primaries.xi.size(), hi - lo + 1);
    for (int i = 0; i < n; ++i) o.points.middleCols(i * gap, gap) = primaries.orbits[static_cast<std::size_t>(s[i])].points;
  } else {
    std::vector<int> offsets;
    for (int i = 0; i < n; ++i) offsets.push_back(i * gap);
    p.segment = additive_pseudo_orbit(primaries, s, offsets, lo, hi);
  }
  return p;
}

double dynamics_residual(const Map& f, const OrbitSegment& orbit) {
  double r = 0.0;
  for (Eigen::Index i = 0; i + 1 < orbit.points.cols(); ++i)
    r = std::max(r, (orbit.points.col(i + 1) - f.evaluate(orbit.points.col(i), orbit.lambda)).lpNorm<Eigen::Infinity>());
  return r;
}

ShadowResult shadow_orbit(const HomoclinicBVP& bvp, const PseudoOrbit& p, const NewtonSettings& settings) {
  HomoclinicBVP target = bvp.with_window(p.segment.n_minus, p.segment.n_plus);
  OrbitSegment seed = p.segment;
  seed.bc = target.bc();
  ShadowResult r;
  r.pseudo_residual = dynamics_residual(bvp.map(), seed);
  NewtonResult nr = newton_solve(target, seed, settings);
  r.orbit = std::move(nr.orbit);
  r.history = std::move(nr.history);
  r.distance = (r.orbit.points - seed.points).lpNorm<Eigen::Infinity>();
  return r;
}

const OrbitSegment& OrbitCatalog::at(const Symbol& s) const { return orbits.at(symbol_index(s)); }

OrbitCatalog enumerate_catalog(const HomoclinicBVP& bvp, const PrimarySet& primaries, int n,
                               const NewtonSettings& settings, unsigned threads) {
  OrbitCatalog cat;
  cat.n = n;
  cat.lambda_tilde = primaries.lambda;
  cat.symbols = all_symbols(n);
  const std::size_t total = cat.symbols.size();
  cat.orbits.resize(total);
  cat.solved.assign(total, false);
  std::vector<std::string> errors(total);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        PseudoOrbit p = build_pseudo_orbit(primaries, cat.symbols[i], PseudoMode::Concat);
        cat.orbits[i] = shadow_orbit(bvp, p, settings).orbit;
        cat.solved[i] = true;
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(total));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < total; ++i)
    if (!cat.solved[i]) cat.failures.push_back(symbol_string(cat.symbols[i]) + ": " + errors[i]);

  cat.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = i + 1; j < total; ++j)
      if (cat.solved[i] && cat.solved[j])
        cat.min_separation = std::min(cat.min_separation, sup_distance(cat.orbits[i], cat.orbits[j]));
  if (cat.min_separation < 1e-4)
    cat.failures.push_back("catalog entries closer than 1e-4: " + std::to_string(cat.min_separation));
  return cat;
}

SymbolMatch identify_symbol(const OrbitSegment& orbit, const OrbitCatalog& catalog, int max_shift, double margin) {
  double best = std::numeric_limits<double>::infinity(), second = best;
  SymbolMatch m;
  for (std::size_t i = 0; i < catalog.orbits.size(); ++i) {
    if (!catalog.solved[i]) continue;
    double d = std::numeric_limits<double>::infinity();
    int shift = 0;
    for (int s = -max_shift; s <= max_shift; ++s) {
      double ds = sup_distance(orbit, catalog.orbits[i], s);
      if (ds < d) {
        d = ds;
        shift = s;
      }
    }
    if (d < best) {
      second = best;
      best = d;
      m.symbol = catalog.symbols[i];
      m.shift = shift;
    } else if (d < second) {
      second = d;
    }
  }
  m.distance = best;
  m.runner_up = second;
  if (m.symbol.empty()) throw Error(ErrorCode::AmbiguousMatch, "empty catalog");
  if (best * margin > second)
    throw Error(ErrorCode::AmbiguousMatch, "distance " + std::to_string(best) + " vs runner-up " + std::to_string(second));
  return m;
}

int ComponentResult::covered() const {
  int c = 0;
  for (const auto& [len, count] : table) c += len * count;
  return c;
}

ComponentResult trace_all_components(const OrbitCatalog& catalog, const HomoclinicBVP& bvp,
                                     const ContinuationSettings& settings) {
  ComponentResult out;
  const std::size_t total = catalog.symbols.size();
  std::vector<bool> visited(total, false);
  ContinuationSettings st = settings;
  st.lambda_tilde = catalog.lambda_tilde;

  int branch_id = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (visited[i] || !catalog.solved[i]) continue;
    const OrbitSegment& orbit = catalog.orbits[i];
    HomoclinicBVP problem = bvp.with_window(orbit.n_minus, orbit.n_plus);
    BranchPoint start = make_branch_point(problem, orbit.stacked(), orbit.lambda, st.direction);
    Branch br = trace_branch(problem, start, st);
    out.total_steps += static_cast<int>(br.points.size());

    EmpiricalCycle cyc;
    cyc.branch_id = branch_id++;
    cyc.closed = br.closed;
    cyc.consistent = br.closed;
    for (const auto& f : br.folds) cyc.fold_lambdas.push_back(f.lambda);

    std::vector<double> svals;
    for (const auto& c : br.crossings) {
      try {
        if (!c.converged) throw Error(ErrorCode::NoConvergence, "crossing re-solve failed");
        OrbitSegment seg = problem.segment(c.x, c.lambda);
        cyc.vertices.push_back(identify_symbol(seg, catalog).symbol);
        svals.push_back(c.s);
      } catch (const Error& e) {
        cyc.consistent = false;
        cyc.note += std::string("crossing at s=") + std::to_string(c.s) + ": " + e.what() + "; ";
      }
    }
    if (cyc.vertices.empty() || cyc.vertices.front() != catalog.symbols[i]) {
      cyc.consistent = false;
      cyc.note += "start symbol not recovered; ";
    }

    const std::size_t nv = cyc.vertices.size();
    for (std::size_t v = 0; v < nv; ++v) {
      const double a = svals[v], b = v + 1 < nv ? svals[v + 1] : std::numeric_limits<double>::infinity();
      int count = 0;
      FoldSide side = FoldSide::R;
      for (const auto& f : br.folds)
        if (f.s > a && f.s <= b) {
          ++count;
          side = f.side;
        }
      cyc.labels.push_back(side);
      if (count != 1) {
        cyc.consistent = false;
        cyc.note += std::to_string(count) + " folds between crossings " + std::to_string(v) + " and " +
                    std::to_string((v + 1) % nv) + "; ";
      }
    }

    std::vector<std::size_t> idx;
    for (const auto& s : cyc.vertices) idx.push_back(symbol_index(s));
    std::vector<std::size_t> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      cyc.consistent = false;
      cyc.note += "symbol repeated along the branch; ";
    }
    bool reaches_visited = false;
    for (std::size_t v = 1; v < idx.size(); ++v)
      if (visited[idx[v]]) reaches_visited = true;
    if (!br.closed) {
      out.warnings.push_back("OpenBranch: branch from " + symbol_string(catalog.symbols[i]) + " (" + br.stop_reason +
                             ") excluded from the table");
    }
    if (reaches_visited) {
      out.warnings.push_back("branch from " + symbol_string(catalog.symbols[i]) +
                             " reaches an already visited symbol; skipped");
      visited[i] = true;
      cyc.consistent = false;
      out.cycles.push_back(std::move(cyc));
      continue;
    }
    for (std::size_t v : idx) visited[v] = true;
    visited[i] = true;
    if (cyc.consistent) ++out.table[static_cast<int>(nv)];
    else if (br.closed) out.warnings.push_back("inconsistent cycle from " + symbol_string(catalog.symbols[i]) + ": " + cyc.note);
    out.cycles.push_back(std::move(cyc));
  }
  return out;
}

}  // namespace tangle
