#include "tangle/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#ifndef TANGLE_VERSION
#define TANGLE_VERSION "0"
#endif

namespace tangle {

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (!(tol > 0)) fail("tolerance must be positive");
  if (n < 1) fail("n must be at least 1");
  if (n > 8) fail("n above 8 is not supported");
  if (j_minus >= j_plus) fail("window J must satisfy j_minus < j_plus");
  if (hump_j_minus >= hump_j_plus) fail("hump window must satisfy hump_j_minus < hump_j_plus");
  if (!(lambda_min < lambda_max)) fail("lambda window must be increasing");
  if (!(lambda_tilde > lambda_min && lambda_tilde < lambda_max)) fail("lambda_tilde outside the lambda window");
  if (map != "henon" && map != "henon-shear") fail("unknown map '" + map + "'");
}

std::string RunConfig::canonical() const {
  std::string s;
  auto add = [&](const char* k, const std::string& v) { s += std::string(k) + "=" + v + "\n"; };
  add("map", map);
  add("a", format_double(a));
  add("b", format_double(b));
  add("lambda_tilde", format_double(lambda_tilde));
  add("j_minus", std::to_string(j_minus));
  add("j_plus", std::to_string(j_plus));
  add("hump_j_minus", std::to_string(hump_j_minus));
  add("hump_j_plus", std::to_string(hump_j_plus));
  add("tol", format_double(tol));
  add("lambda_min", format_double(lambda_min));
  add("lambda_max", format_double(lambda_max));
  add("n", std::to_string(n));
  add("seed", std::to_string(seed));
  add("partition_budget", std::to_string(partition_budget));
  return s;
}

ContinuationSettings RunConfig::continuation() const {
  ContinuationSettings st;
  st.tolerance = tol;
  st.lambda_min = lambda_min;
  st.lambda_max = lambda_max;
  st.lambda_tilde = lambda_tilde;
  return st;
}

MapPtr config_map(const RunConfig& cfg) { return make_map(cfg.map, cfg.a, cfg.b); }

Eigen::VectorXd config_fixed_point(const RunConfig& cfg) {
  auto fps = fixed_points(*config_map(cfg), cfg.lambda_tilde);
  if (fps.empty()) throw Error(ErrorCode::NotHyperbolic, "no fixed point at lambda_tilde");
  Eigen::VectorXd xi = fps.front().xi;
  for (const auto& f : fps)
    if (f.xi(0) > xi(0)) xi = f.xi;
  return xi;
}

const PrimaryFold* PrimaryResult::fold(const std::string& name) const {
  for (const auto& f : folds)
    if (f.name == name) return &f;
  return nullptr;
}

namespace {

void analyse_fold(const RunConfig& cfg, const HomoclinicBVP& bvp, PrimaryFold& pf) {
  try {
    TangencyData d = kernel_and_adjoint(bvp, pf.event);
    for (double tau : kFitScales) {
      auto pts = sample_near_fold(bvp, pf.event, tau);
      pf.fits.push_back(quadratic_fit_check(pts, d, tau));
    }
    HomoclinicBVP doubled = bvp.with_window(2 * cfg.j_minus, 2 * cfg.j_plus);
    TangencyData d2 = kernel_and_adjoint(doubled, relocate_fold(doubled, bvp, pf.event));
    pf.c_x_doubled = d2.c_x;
    pf.tangency = std::move(d);
  } catch (const Error& e) {
    pf.error = e.what();
  }
}

}  // namespace

PrimaryResult run_primary(const RunConfig& cfg, bool analyse_folds) {
  cfg.validate();
  PrimaryResult r;
  r.map = config_map(cfg);
  r.xi = config_fixed_point(cfg);
  HomoclinicBVP bvp = r.bvp(cfg.j_minus, cfg.j_plus);
  r.seed = seed_homoclinic(bvp, cfg.lambda_tilde, 1).front();

  ContinuationSettings st = cfg.continuation();
  r.branch = trace_branch(bvp, make_branch_point(bvp, r.seed.stacked(), r.seed.lambda, 1), st);
  const Branch& br = r.branch;
  if (!br.closed) r.warnings.push_back("branch did not close: " + br.stop_reason);

  const std::size_t m = br.crossings.size();
  if (m == 0) throw Error(ErrorCode::Degenerate, "branch has no crossing of lambda_tilde");
  if (m != 4) r.warnings.push_back("expected 4 crossings of lambda_tilde, found " + std::to_string(m));
  if (br.folds.size() != 4) r.warnings.push_back("expected 4 folds, found " + std::to_string(br.folds.size()));

  std::vector<double> amp;
  for (const auto& c : br.crossings) amp.push_back(amplitude(bvp.segment(c.x, c.lambda), r.xi));
  const std::size_t zero = static_cast<std::size_t>(std::min_element(amp.begin(), amp.end()) - amp.begin());

  // folds between consecutive crossings in branch order; for a closed branch the
  // last gap wraps around
  auto gap_of = [&](const FoldEvent& f) -> std::optional<std::size_t> {
    std::size_t i = 0;
    while (i < m && br.crossings[i].s < f.s) ++i;
    if (i == 0) return br.closed ? std::optional<std::size_t>(m - 1) : std::nullopt;
    if (i == m && !br.closed) return std::nullopt;
    return i - 1;
  };
  bool forward = true;
  for (const auto& f : br.folds)
    if (gap_of(f) == zero) forward = f.side == FoldSide::R;
  r.crossing_symbols.assign(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = forward ? (zero + j) % m : (zero + m - j) % m;
    r.crossing_symbols[i] = static_cast<int>(j);
  }
  r.orbits.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    OrbitSegment o = bvp.segment(br.crossings[i].x, br.crossings[i].lambda);
    o.residual = gamma_residual(bvp, o).lpNorm<Eigen::Infinity>();
    r.orbits[static_cast<std::size_t>(r.crossing_symbols[i])] = std::move(o);
  }

  for (const auto& f : br.folds) {
    PrimaryFold pf;
    pf.event = f;
    auto g = gap_of(f);
    std::string name(1, f.side == FoldSide::R ? 'r' : 'l');
    if (g) {
      int a = r.crossing_symbols[*g], b = r.crossing_symbols[(*g + 1) % m];
      if (!forward) std::swap(a, b);
      name += std::to_string(a) + std::to_string(b);
    } else {
      name += "?";
    }
    pf.name = name;
    if (analyse_folds) analyse_fold(cfg, bvp, pf);
    r.folds.push_back(std::move(pf));
  }

  const PrimaryFold *r01 = r.fold("r01"), *r23 = r.fold("r23"), *l12 = r.fold("l12"), *l30 = r.fold("l30");
  r.orderings_hold = r01 && r23 && l12 && l30 && r23->event.lambda > r01->event.lambda &&
                     l12->event.lambda > l30->event.lambda;
  if (!r.orderings_hold) r.warnings.push_back("fold orderings do not hold or folds are missing");
  return r;
}

PrimarySet primary_set(const RunConfig& cfg, const std::vector<OrbitSegment>& orbits) {
  if (orbits.size() != 4) throw Error(ErrorCode::InvalidArgument, "need the four primary orbits");
  PrimarySet p;
  p.xi = config_fixed_point(cfg);
  HomoclinicBVP bvp(config_map(cfg), p.xi, cfg.hump_j_minus, cfg.hump_j_plus);
  p.lambda = orbits.front().lambda;
  p.n_minus = cfg.hump_j_minus;
  p.n_plus = cfg.hump_j_plus;
  p.xi = bvp.fixed_point(p.lambda);
  for (const auto& o : orbits) p.orbits.push_back(rewindow(bvp, o, {cfg.tol, 40, 0.5}));
  return p;
}

MultihumpResult run_multihump(const RunConfig& cfg, const std::vector<OrbitSegment>& primary_orbits) {
  cfg.validate();
  MultihumpResult r;
  r.primaries = primary_set(cfg, primary_orbits);
  HomoclinicBVP bvp(config_map(cfg), r.primaries.xi, cfg.hump_j_minus, cfg.hump_j_plus);
  r.catalog = enumerate_catalog(bvp, r.primaries, cfg.n, {cfg.tol, 40, 0.5}, cfg.threads);
  if (!r.catalog.complete()) {
    r.components.warnings.push_back("catalog incomplete; components not traced");
    return r;
  }
  r.components = trace_all_components(r.catalog, bvp, cfg.continuation());
  return r;
}

LRCycle to_lr_cycle(const EmpiricalCycle& c) {
  LRCycle out;
  for (const auto& s : c.vertices) out.vertices.push_back(vertex_from_digits(s));
  for (FoldSide s : c.labels) out.labels.push_back(s == FoldSide::R ? EdgeLabel::R : EdgeLabel::L);
  return out;
}

CrossValidation cross_validate(const TransitionGraph& g, const std::vector<EmpiricalCycle>& cycles,
                               std::uint64_t budget) {
  CrossValidation cv;
  cv.cycles_valid = true;
  CyclePartition p;
  std::vector<int> seen(g.vertex_count(), 0);
  for (const auto& c : cycles) {
    if (!c.consistent) {
      cv.cycles_valid = false;
      cv.diagnostics.push_back("branch " + std::to_string(c.branch_id) + " is not a consistent closed cycle");
      continue;
    }
    if (!c.vertices.empty() && static_cast<int>(c.vertices.front().size()) != g.n) {
      cv.cycles_valid = false;
      cv.diagnostics.push_back("branch " + std::to_string(c.branch_id) + " has the wrong symbol length");
      continue;
    }
    LRCycle lr = to_lr_cycle(c);
    Validation v = validate_cycle(g, lr);
    if (!v.ok) {
      cv.cycles_valid = false;
      cv.diagnostics.push_back("branch " + std::to_string(c.branch_id) + ": " + v.diagnostic);
    }
    for (Vertex x : lr.vertices) ++seen[x];
    p.cycles.push_back(std::move(lr));
  }
  cv.covers = std::all_of(seen.begin(), seen.end(), [](int k) { return k == 1; });
  if (!cv.covers) cv.diagnostics.push_back("empirical cycles do not cover every vertex exactly once");
  if (cv.cycles_valid && cv.covers) {
    cv.partition_index = find_partition(g, canonical(p), budget);
    if (!cv.partition_index) cv.diagnostics.push_back("empirical partition not found among the enumerated covers");
  }
  return cv;
}

json manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& files,
              const std::vector<std::string>& warnings, const std::vector<std::string>& failures) {
  json config = {{"map", cfg.map},
                 {"a", cfg.a},
                 {"b", cfg.b},
                 {"lambda_tilde", cfg.lambda_tilde},
                 {"j_minus", cfg.j_minus},
                 {"j_plus", cfg.j_plus},
                 {"hump_j_minus", cfg.hump_j_minus},
                 {"hump_j_plus", cfg.hump_j_plus},
                 {"tol", cfg.tol},
                 {"lambda_window", {cfg.lambda_min, cfg.lambda_max}},
                 {"n", cfg.n},
                 {"seed", cfg.seed},
                 {"partition_budget", cfg.partition_budget}};
  return {{"command", command},
          {"version", TANGLE_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"config", config},
          {"config_hash", hex64(cfg.hash())},
          {"files", files},
          {"warnings", warnings},
          {"failures", failures},
          {"status", failures.empty() ? "ok" : "partial"}};
}

namespace {

json fold_json(const PrimaryFold& f) {
  json j = {{"name", f.name},         {"side", std::string(1, side_char(f.event.side))},
            {"lambda", f.event.lambda}, {"s", f.event.s},
            {"refined", f.event.refined}, {"quadratic", f.event.quadratic}};
  return j;
}

}  // namespace

std::vector<std::string> write_primary(const std::filesystem::path& dir, const PrimaryResult& r) {
  const Branch& br = r.branch;
  json pts = json::array(), cross = json::array(), folds = json::array();
  std::string csv = "s,lambda,amplitude\n";
  for (const auto& p : br.points) {
    pts.push_back({{"s", p.s}, {"lambda", p.lambda}, {"amplitude", p.amplitude}});
    csv += format_double(p.s) + "," + format_double(p.lambda) + "," + format_double(p.amplitude) + "\n";
  }
  for (std::size_t i = 0; i < br.crossings.size(); ++i)
    cross.push_back({{"s", br.crossings[i].s},
                     {"symbol", r.crossing_symbols[i]},
                     {"converged", br.crossings[i].converged},
                     {"amplitude", amplitude(r.orbits[static_cast<std::size_t>(r.crossing_symbols[i])], r.xi)}});
  for (const auto& f : r.folds) folds.push_back(fold_json(f));
  write_json(dir / "branch.json", {{"closed", br.closed},
                                   {"stop_reason", br.stop_reason},
                                   {"rejected_steps", br.rejected_steps},
                                   {"orderings_hold", r.orderings_hold},
                                   {"folds", folds},
                                   {"crossings", cross},
                                   {"points", pts}});
  write_text(dir / "branch.csv", csv);

  json orbits = json::object();
  for (std::size_t i = 0; i < r.orbits.size(); ++i) orbits[std::to_string(i)] = orbit_to_json(r.orbits[i]);
  write_json(dir / "orbits.json", {{"xi", std::vector<double>(r.xi.data(), r.xi.data() + r.xi.size())},
                                   {"seed", orbit_to_json(r.seed)},
                                   {"orbits", orbits}});

  json reports = json::array();
  for (const auto& f : r.folds) {
    json j = fold_json(f);
    if (f.tangency) {
      // the gating fit is the one at tau_max = 0.02
      const FitReport& main = f.fits.at(2);
      j.update(tangency_to_json(*f.tangency, main));
      j["fit_tau_max"] = main.tau_max;
      j["sigma_min"] = f.tangency->sigma_min;
      j["c_x_doubled_window"] = f.c_x_doubled;
      json fits = json::array();
      for (const auto& fit : f.fits) fits.push_back(fit_to_json(fit));
      j["fits"] = fits;
    } else {
      j["error"] = f.error;
    }
    reports.push_back(j);
  }
  write_json(dir / "tangency.json", reports);
  return {"branch.json", "branch.csv", "orbits.json", "tangency.json"};
}

std::vector<OrbitSegment> read_primary_orbits(const std::filesystem::path& dir) {
  json j = read_json(dir / "orbits.json");
  std::vector<OrbitSegment> out;
  try {
    for (int s = 0; j.at("orbits").contains(std::to_string(s)); ++s)
      out.push_back(orbit_from_json(j.at("orbits").at(std::to_string(s))));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("orbits.json: ") + e.what());
  }
  return out;
}

std::vector<std::string> write_multihump(const std::filesystem::path& dir, const MultihumpResult& r) {
  std::vector<std::string> files;
  const OrbitCatalog& cat = r.catalog;
  json entries = json::object();
  for (std::size_t i = 0; i < cat.symbols.size(); ++i) {
    if (!cat.solved[i]) continue;
    const std::string sym = symbol_string(cat.symbols[i]);
    const std::string rel = "orbits/" + sym + ".json";
    write_json(dir / rel, orbit_to_json(cat.orbits[i]));
    entries[sym] = rel;
  }
  write_json(dir / "catalog.json", {{"n", cat.n},
                                    {"lambda_tilde", cat.lambda_tilde},
                                    {"hump_window", {r.primaries.n_minus, r.primaries.n_plus}},
                                    {"min_separation", std::isfinite(cat.min_separation) ? json(cat.min_separation)
                                                                                         : json(nullptr)},
                                    {"failures", cat.failures},
                                    {"entries", entries}});
  files.push_back("catalog.json");
  files.push_back("orbits/");
  write_text(dir / "table.csv", table_csv(cat.n, r.components.table));
  files.push_back("table.csv");
  json cycles = json::array();
  for (const auto& c : r.components.cycles) cycles.push_back(empirical_cycle_to_json(c));
  write_json(dir / "cycles.json", {{"n", cat.n},
                                   {"covered", r.components.covered()},
                                   {"total_steps", r.components.total_steps},
                                   {"warnings", r.components.warnings},
                                   {"cycles", cycles}});
  files.push_back("cycles.json");
  return files;
}

std::vector<EmpiricalCycle> read_empirical_cycles(const std::filesystem::path& dir) {
  json j = read_json(dir / "cycles.json");
  std::vector<EmpiricalCycle> out;
  for (const auto& c : j.at("cycles")) out.push_back(empirical_cycle_from_json(c));
  return out;
}

GraphResult run_graph(int n, std::uint64_t budget, const std::vector<EmpiricalCycle>* empirical) {
  GraphResult r;
  r.graph = build_graph(n);
  r.report = theorem_p1_report(r.graph, budget);
  r.total = r.report.partitions_checked;
  r.budget_exceeded = r.report.budget_exceeded;
  for_each_partition(r.graph, budget, [&](const Matching& ml, const Matching& mr) {
    r.listed.push_back(canonical(partition_from_matchings(r.graph, ml, mr)));
    return r.listed.size() < kListedPartitions;
  });
  if (empirical) r.cross = cross_validate(r.graph, *empirical, budget);
  return r;
}

std::vector<std::string> write_graph(const std::filesystem::path& dir, const GraphResult& r) {
  const int n = r.graph.n;
  write_text(dir / "edges.txt", edge_list(r.graph));
  json parts = json::array();
  for (const auto& p : r.listed) parts.push_back(partition_to_json(p, n));
  write_json(dir / "partitions.json", {{"n", n},
                                       {"total", r.total},
                                       {"budget_exceeded", r.budget_exceeded},
                                       {"listed", r.listed.size()},
                                       {"partitions", parts}});
  const P1Report& p = r.report;
  json hist = json::object();
  for (const auto& [len, count] : p.length_histogram) hist[std::to_string(len)] = count;
  json rep = {{"n", n},
              {"vertices", r.graph.vertex_count()},
              {"edges_l", r.graph.edge_count(EdgeLabel::L)},
              {"edges_r", r.graph.edge_count(EdgeLabel::R)},
              {"partitions_checked", p.partitions_checked},
              {"budget_exceeded", p.budget_exceeded},
              {"lengths_mod4", p.lengths_mod4},
              {"s0_s2_same_cycle", p.s0_s2_same_cycle},
              {"long_enough", p.long_enough},
              {"min_s0_cycle_length", p.min_s0_cycle_length},
              {"explicit_cycle_valid", p.explicit_cycle_valid},
              {"explicit_cycle_length", p.explicit_cycle_length},
              {"length_histogram", hist},
              {"violation", p.violation ? json(*p.violation) : json(nullptr)},
              {"ok", p.ok()}};
  if (r.cross) {
    rep["cross_validation"] = {{"cycles_valid", r.cross->cycles_valid},
                               {"covers", r.cross->covers},
                               {"partition_index", r.cross->partition_index ? json(*r.cross->partition_index)
                                                                            : json(nullptr)},
                               {"diagnostics", r.cross->diagnostics},
                               {"ok", r.cross->ok()}};
  }
  write_json(dir / "p1_report.json", rep);
  return {"edges.txt", "partitions.json", "p1_report.json"};
}

}  // namespace tangle
