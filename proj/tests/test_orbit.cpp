#include <doctest.h>

#include <cmath>

#include "tangle/orbit.hpp"

using namespace tangle;
using Eigen::VectorXd;

namespace {

struct Setup {
  MapPtr map = make_map("henon-shear");
  double lambda = 0.35;
  VectorXd xi = fixed_points(*map, 0.35)[0].xi;
  HomoclinicBVP bvp{map, xi, -20, 21};
};

const std::vector<OrbitSegment>& primaries() {
  static const std::vector<OrbitSegment> orbits = [] {
    Setup s;
    return seed_homoclinic(s.bvp, s.lambda, 4);
  }();
  return orbits;
}

OrbitSegment constant(const VectorXd& xi, int nm, int np, double lambda) {
  OrbitSegment o;
  o.n_minus = nm;
  o.n_plus = np;
  o.lambda = lambda;
  o.points = xi.replicate(1, np - nm + 1);
  return o;
}

// primary orbit from the shorter window [-12,13] padded with xi up to [-20,21]
OrbitSegment padded_pseudo_orbit(const Setup& s) {
  HomoclinicBVP small(s.map, s.xi, -12, 13);
  OrbitSegment o = rewindow(small, primaries()[0]);
  OrbitSegment p = constant(s.xi, -20, 21, s.lambda);
  for (int n = -12; n <= 13; ++n) p.points.col(n + 20) = o.point(n);
  return p;
}

double linear_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxy / sxx;
}

}  // namespace

TEST_CASE("constant fixed point segment solves the boundary value problem") {
  Setup s;
  CHECK(gamma_residual(s.bvp, constant(s.xi, -20, 21, s.lambda)).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("exact finite orbit with wrong endpoints only violates boundary rows") {
  Setup s;
  OrbitSegment o = constant(s.xi, -20, 21, s.lambda);
  VectorXd x = s.xi + VectorXd::Constant(2, 0.01);
  for (int j = 0; j < o.length(); ++j) {
    o.points.col(j) = x;
    x = s.map->evaluate(x, s.lambda);
  }
  VectorXd r = gamma_residual(s.bvp, o);
  const Eigen::Index interior = 2 * (o.length() - 1);
  CHECK(r.head(interior).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(r.tail(2).lpNorm<Eigen::Infinity>() > 1e-3);
}

TEST_CASE("residual of a one-hump pseudo-orbit") {
  Setup s;
  CHECK(gamma_residual(s.bvp, padded_pseudo_orbit(s)).lpNorm<Eigen::Infinity>() <= 1e-3);
}

TEST_CASE("linearization matches finite differences") {
  Setup s;
  const OrbitSegment& o = primaries()[1];
  VectorXd x = o.stacked();
  Eigen::MatrixXd J = s.bvp.jacobian(x, s.lambda);
  Eigen::MatrixXd F(J.rows(), J.cols());
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    VectorXd e = VectorXd::Zero(x.size());
    e(j) = h;
    F.col(j) = (s.bvp.residual(x + e, s.lambda) - s.bvp.residual(x - e, s.lambda)) / (2 * h);
  }
  CHECK((J - F).norm() / J.norm() <= 1e-5);
  VectorXd dl = (s.bvp.residual(x, s.lambda + h) - s.bvp.residual(x, s.lambda - h)) / (2 * h);
  CHECK((s.bvp.dlambda(x, s.lambda) - dl).norm() / dl.norm() <= 1e-5);
}

TEST_CASE("newton at an exact solution") {
  Setup s;
  NewtonResult r = newton_solve(s.bvp, primaries()[0], {1e-10, 30, std::nullopt});
  CHECK(r.history.size() <= 2);
  CHECK((r.orbit.points - primaries()[0].points).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK(gamma_residual(s.bvp, r.orbit).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("newton converges quadratically from a pseudo-orbit") {
  Setup s;
  NewtonResult r = newton_solve(s.bvp, padded_pseudo_orbit(s), {1e-12, 30, std::nullopt});
  CHECK(r.history.back() <= 1e-12);
  CHECK(gamma_residual(s.bvp, r.orbit).lpNorm<Eigen::Infinity>() <= 1e-12);
  REQUIRE(r.history.size() >= 2);
  for (std::size_t i = 0; i + 1 < r.history.size(); ++i)
    if (r.history[i] > 1e-8) CHECK(r.history[i + 1] / (r.history[i] * r.history[i]) <= 1e3);
  CHECK(tails_decay(r.orbit, s.xi));
}

TEST_CASE("newton from zeros is deterministic") {
  Setup s;
  OrbitSegment z = constant(VectorXd::Zero(2), -20, 21, s.lambda);
  auto run = [&]() -> std::string {
    try {
      NewtonResult r = newton_solve(s.bvp, z, {1e-10, 30, std::nullopt});
      bool trivial = (r.orbit.points.colwise() - s.xi).lpNorm<Eigen::Infinity>() <= 1e-8;
      bool tails = tails_decay(r.orbit, s.xi);
      return std::string(trivial ? "trivial" : "nontrivial") + (tails ? "+tails" : "-tails");
    } catch (const Error& e) {
      return error_name(e.code());
    }
  };
  std::string a = run();
  CHECK(a == run());
  MESSAGE("outcome from zeros: " << a);
}

TEST_CASE("amplitude") {
  Setup s;
  OrbitSegment c = constant(s.xi, -3, 3, s.lambda);
  CHECK(amplitude(c, s.xi) == 0.0);
  c.points.col(2) += Eigen::Vector2d(3, 4);
  CHECK(amplitude(c, s.xi) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("seeding finds four distinct primary orbits") {
  Setup s;
  const auto& o = primaries();
  REQUIRE(o.size() == 4);
  for (const auto& x : o) {
    CHECK(gamma_residual(s.bvp, x).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(tails_decay(x, s.xi));
    CHECK(amplitude(x, s.xi) > 1.0);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      CHECK(sup_distance(o[i], o[j]) >= 1e-3);
      CHECK(std::abs(amplitude(o[i], s.xi) - amplitude(o[j], s.xi)) >= 1e-3);
    }
}

TEST_CASE("seeding below the tangencies finds nothing") {
  Setup s;
  CHECK_THROWS_AS(seed_homoclinic(s.bvp.with_window(-20, 21), 0.05, 1), Error);
}

TEST_CASE("periodic and projection solutions approach each other") {
  Setup s;
  double prev = std::numeric_limits<double>::infinity();
  for (int half : {10, 20, 40}) {
    HomoclinicBVP proj(s.map, s.xi, -half, half + 1);
    OrbitSegment a = rewindow(proj, primaries()[0]);
    HomoclinicBVP per = proj.with_bc(BoundaryKind::Periodic);
    OrbitSegment seed = a;
    seed.bc = BoundaryKind::Periodic;
    OrbitSegment b = newton_solve(per, seed, {1e-12, 30, 0.5}).orbit;
    double d = (a.points - b.points).lpNorm<Eigen::Infinity>();
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("tail decay rates follow the eigenvalues") {
  Setup s;
  auto fp = fixed_points(*s.map, s.lambda)[0];
  const double ls = std::log(std::abs(fp.eigenvalues(0).real())), lu = std::log(std::abs(fp.eigenvalues(1).real()));
  const OrbitSegment& o = primaries()[0];
  std::vector<double> n, y;
  for (int k = 4; k <= 12; ++k) n.push_back(k), y.push_back(std::log((o.point(k) - s.xi).norm()));
  CHECK(linear_slope(n, y) == doctest::Approx(ls).epsilon(0.2));
  n.clear();
  y.clear();
  for (int k = -18; k <= -8; ++k) n.push_back(-k), y.push_back(std::log((o.point(k) - s.xi).norm()));
  CHECK(linear_slope(n, y) == doctest::Approx(-lu).epsilon(0.2));
}

TEST_CASE("stacked layout round trip") {
  const OrbitSegment& o = primaries()[2];
  OrbitSegment b = OrbitSegment::from_stacked(o.stacked(), 2, o.n_minus, o.lambda);
  CHECK(b.points == o.points);
  CHECK(b.n_plus == o.n_plus);
}
