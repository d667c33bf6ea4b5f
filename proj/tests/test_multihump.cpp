#include <doctest.h>

#include <random>

#include "tangle/pipeline.hpp"

using namespace tangle;
using Eigen::VectorXd;

namespace {

const PrimaryResult& primary() {
  static const PrimaryResult r = run_primary(RunConfig{}, false);
  return r;
}

PrimarySet humps(int jm, int jp) {
  RunConfig cfg;
  cfg.hump_j_minus = jm;
  cfg.hump_j_plus = jp;
  return primary_set(cfg, primary().orbits);
}

HomoclinicBVP hump_bvp(const PrimarySet& p) { return HomoclinicBVP(primary().map, p.xi, p.n_minus, p.n_plus); }

std::map<int, int> table_for(int n) {
  RunConfig cfg;
  cfg.n = n;
  return run_multihump(cfg, primary().orbits).components.table;
}

}  // namespace

TEST_CASE("symbols") {
  CHECK(symbol_string(parse_symbol("0312")) == "0312");
  CHECK_THROWS_AS(parse_symbol("04"), Error);
  CHECK_THROWS_AS(parse_symbol(""), Error);
  auto all = all_symbols(2);
  REQUIRE(all.size() == 16);
  CHECK(symbol_string(all.front()) == "00");
  CHECK(symbol_string(all[6]) == "12");
  CHECK(std::is_sorted(all.begin(), all.end()));
}

TEST_CASE("a single hump reproduces the primary orbit") {
  PrimarySet p = humps(-20, 21);
  HomoclinicBVP bvp = hump_bvp(p);
  for (int s = 0; s < 4; ++s) {
    for (PseudoMode mode : {PseudoMode::Concat, PseudoMode::Additive}) {
      PseudoOrbit q = build_pseudo_orbit(p, {s}, mode);
      CHECK((q.segment.points - p.orbits[s].points).lpNorm<Eigen::Infinity>() <= 1e-15);
      CHECK(dynamics_residual(bvp.map(), q.segment) ==
            doctest::Approx(dynamics_residual(bvp.map(), p.orbits[s])).epsilon(1e-3));
    }
    ShadowResult r = shadow_orbit(bvp, build_pseudo_orbit(p, {s}, PseudoMode::Concat));
    CHECK((r.orbit.points - p.orbits[s].points).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("two-hump pseudo-orbit at gap 42") {
  PrimarySet p = humps(-20, 21);
  HomoclinicBVP bvp = hump_bvp(p);
  PseudoOrbit c = build_pseudo_orbit(p, {0, 1}, PseudoMode::Concat);
  CHECK(c.segment.n_minus == -20);
  CHECK(c.segment.length() == 84);
  // largest defect sits at the splice
  double worst = 0.0;
  int at = 0;
  for (int j = 0; j + 1 < c.segment.length(); ++j) {
    double e = (c.segment.points.col(j + 1) - bvp.map().evaluate(c.segment.points.col(j), p.lambda))
                   .lpNorm<Eigen::Infinity>();
    if (e > worst) worst = e, at = j;
  }
  CHECK(worst <= 1e-3);
  CHECK(at == 41);
  PseudoOrbit a = build_pseudo_orbit(p, {0, 1}, PseudoMode::Additive);
  CHECK((a.segment.points - c.segment.points).lpNorm<Eigen::Infinity>() <= 1e-3);
}

TEST_CASE("gap below the minimum is refused") {
  PrimarySet p = humps(-4, 4);
  CHECK_THROWS_AS(build_pseudo_orbit(p, {0, 1}, PseudoMode::Concat), Error);
  try {
    build_pseudo_orbit(p, {0, 1}, PseudoMode::Concat);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GapTooSmall);
  }
}

TEST_CASE("additive pseudo-orbit commutes with the shift") {
  PrimarySet p = humps(-20, 21);
  Symbol s{2, 0, 3};
  OrbitSegment a = additive_pseudo_orbit(p, s, {0, 30, 60}, -30, 90);
  OrbitSegment b = additive_pseudo_orbit(p, s, {-1, 29, 59}, -30, 90);
  for (int n = -30; n < 90; ++n) CHECK((b.point(n) - a.point(n + 1)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("shadowing distance shrinks with the gap") {
  std::vector<double> dist, res;
  for (int half : {20, 40}) {
    PrimarySet p = humps(-half + 1, half);
    ShadowResult r = shadow_orbit(hump_bvp(p), build_pseudo_orbit(p, {0, 1}, PseudoMode::Concat), {1e-14, 40, 0.5});
    dist.push_back(r.distance);
    res.push_back(r.pseudo_residual);
  }
  CHECK(dist[1] < dist[0]);
  CHECK(res[1] < res[0]);
}

TEST_CASE("catalogs") {
  PrimarySet p = humps(-6, 7);
  HomoclinicBVP bvp = hump_bvp(p);
  OrbitCatalog c1 = enumerate_catalog(bvp, p, 1);
  CHECK(c1.complete());
  CHECK(c1.orbits.size() == 4);
  OrbitCatalog c2 = enumerate_catalog(bvp, p, 2, {1e-10, 40, 0.5}, 2);
  REQUIRE(c2.complete());
  CHECK(c2.orbits.size() == 16);
  CHECK(c2.min_separation >= 1e-4);
  for (const auto& o : c2.orbits) CHECK(gamma_residual(bvp.with_window(o.n_minus, o.n_plus), o).lpNorm<Eigen::Infinity>() <= 1e-10);
  OrbitCatalog single = enumerate_catalog(bvp, p, 2, {1e-10, 40, 0.5}, 1);
  for (std::size_t i = 0; i < 16; ++i) CHECK(single.orbits[i].points == c2.orbits[i].points);

  SUBCASE("identification") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> N(0, 1e-6);
    for (std::size_t i = 0; i < 16; ++i) {
      SymbolMatch m = identify_symbol(c2.orbits[i], c2);
      CHECK(m.symbol == c2.symbols[i]);
      CHECK(m.distance == 0.0);
      OrbitSegment noisy = c2.orbits[i];
      noisy.points += Eigen::MatrixXd::NullaryExpr(noisy.points.rows(), noisy.points.cols(), [&] { return N(rng); });
      CHECK(identify_symbol(noisy, c2).symbol == c2.symbols[i]);
    }
    OrbitSegment off = c2.orbits[3];
    off.points.array() += 1e-3;
    CHECK_THROWS_AS(identify_symbol(off, c2, 2, 1e300), Error);
  }
}

TEST_CASE("crossings of the one-hump branch are identified in branch order") {
  PrimarySet p = humps(-20, 21);
  HomoclinicBVP bvp = hump_bvp(p);
  OrbitCatalog cat = enumerate_catalog(bvp, p, 1);
  const PrimaryResult& r = primary();
  for (std::size_t i = 0; i < r.branch.crossings.size(); ++i) {
    const Crossing& c = r.branch.crossings[i];
    SymbolMatch m = identify_symbol(bvp.segment(c.x, c.lambda), cat);
    CHECK(m.symbol == Symbol{r.crossing_symbols[i]});
  }
  for (const char* name : {"r01", "l12", "r23", "l30"}) CHECK(r.fold(name) != nullptr);
}

TEST_CASE("component tables for one and two humps") {
  CHECK(table_for(1) == std::map<int, int>{{4, 1}});
  CHECK(table_for(2) == std::map<int, int>{{4, 2}, {8, 1}});
}

TEST_CASE("two-hump cycles are LR-cycles of the graph") {
  RunConfig cfg;
  cfg.n = 2;
  MultihumpResult r = run_multihump(cfg, primary().orbits);
  CHECK(r.components.covered() == 16);
  CHECK(r.components.warnings.empty());
  for (const auto& c : r.components.cycles) {
    CHECK(c.consistent);
    CHECK(c.vertices.size() % 4 == 0);
    CHECK(std::count(c.labels.begin(), c.labels.end(), FoldSide::L) ==
          std::count(c.labels.begin(), c.labels.end(), FoldSide::R));
  }
  CrossValidation cv = cross_validate(build_graph(2), r.components.cycles);
  CHECK(cv.ok());
}
