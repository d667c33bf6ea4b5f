#include <doctest.h>

#include <random>

#include "tangle/map.hpp"

using namespace tangle;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

VectorXd v2(double a, double b) { return Vector2d(a, b); }

// Independent oracle: central differences of the bare formula.
VectorXd henon_formula(const VectorXd& x, double l) { return v2(1 + x(1) - l * x(0) * x(0), 1.4 * x(0)); }

}  // namespace

TEST_CASE("henon evaluation") {
  HenonMap<double> f;
  CHECK((f.evaluate(v2(0, 0), 0.35) - v2(1, 0)).norm() == 0.0);
  CHECK((f.evaluate(v2(1, 0), 0.35) - v2(0.65, 1.4)).norm() < 1e-15);
  auto fps = fixed_points(f, 0.35);
  for (const auto& p : fps) CHECK((f.evaluate(p.xi, 0.35) - p.xi).norm() <= 1e-12);
}

TEST_CASE("henon derivatives") {
  HenonMap<double> f;
  Eigen::Matrix2d J0;
  J0 << 0, 1, 1.4, 0;
  CHECK((f.jacobian(v2(0, 0), 0.35) - J0).norm() == 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int i = 0; i < 10; ++i) {
    VectorXd x = v2(U(rng), U(rng));
    CHECK((f.second(x, 0.35, v2(1, 0), v2(1, 0)) - v2(-0.7, 0)).norm() < 1e-15);
  }
}

TEST_CASE("analytic derivatives agree with central differences") {
  FiniteDifferenceMap<double> fd(2, henon_formula);
  HenonMap<double> f;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> X(-3, 3), L(0.1, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    VectorXd x = v2(X(rng), X(rng));
    double l = L(rng);
    Eigen::MatrixXd Ja = f.jacobian(x, l), Jf = fd.jacobian(x, l);
    worst = std::max(worst, (Ja - Jf).norm() / Ja.norm());
    VectorXd da = f.dlambda(x, l), df = fd.dlambda(x, l);
    worst = std::max(worst, (da - df).norm() / std::max(1.0, da.norm()));
    VectorXd u = v2(X(rng), X(rng));
    VectorXd sa = f.second(x, l, u, u), sf = fd.second(x, l, u, u);
    worst = std::max(worst, (sa - sf).norm() / std::max(1.0, sa.norm()));
  }
  CHECK(worst <= 1e-6);

  HenonShearMap<double> g;
  FiniteDifferenceMap<double> gfd(2, [](const VectorXd& x, double l) { return v2(1 + x(1) - 1.4 * x(0) * x(0), l * x(0)); });
  for (int i = 0; i < 100; ++i) {
    VectorXd x = v2(X(rng), X(rng));
    double l = L(rng);
    CHECK((g.jacobian(x, l) - gfd.jacobian(x, l)).norm() <= 1e-6 * g.jacobian(x, l).norm());
    CHECK((g.dlambda(x, l) - gfd.dlambda(x, l)).norm() <= 1e-6 * std::max(1.0, g.dlambda(x, l).norm()));
    // nested differences: cancellation noise of order eps / h^2
    CHECK((g.jacobian_dlambda(x, l) - gfd.jacobian_dlambda(x, l)).norm() <= 1e-5);
  }
}

TEST_CASE("constant jacobian determinant") {
  HenonMap<double> f;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> X(-3, 3), L(0.1, 1.0);
  for (int i = 0; i < 200; ++i) {
    double d = f.jacobian(v2(X(rng), X(rng)), L(rng)).determinant();
    CHECK(std::abs(d + 1.4) <= 1e-12);
  }
}

TEST_CASE("henon fixed points and eigenvalues") {
  HenonMap<double> f;
  auto fps = fixed_points(f, 0.35);
  REQUIRE(fps.size() == 2);
  const auto& xp = fps[0];
  double nu = (1 + std::sqrt(9.75)) / 1.75;
  CHECK(xp.xi(0) == doctest::Approx(nu).epsilon(1e-14));
  CHECK(xp.xi(0) == doctest::Approx(2.3557137).epsilon(1e-7));
  CHECK(xp.xi(1) == doctest::Approx(3.2979992).epsilon(1e-7));
  REQUIRE(xp.hyperbolic);
  // roots of mu^2 + 2 lambda nu mu - 1.4
  double p = 2 * 0.35 * nu, mu_u = (-p - std::sqrt(p * p + 5.6)) / 2, mu_s = (-p + std::sqrt(p * p + 5.6)) / 2;
  CHECK(xp.eigenvalues(0).real() == doctest::Approx(mu_s).epsilon(1e-12));
  CHECK(xp.eigenvalues(1).real() == doctest::Approx(mu_u).epsilon(1e-12));
  CHECK(mu_u == doctest::Approx(-2.2667).epsilon(1e-4));
  CHECK(mu_s == doctest::Approx(0.6177).epsilon(1e-4));
  CHECK(std::abs((xp.eigenvalues(0) * xp.eigenvalues(1)).real() + 1.4) <= 1e-10);
}

TEST_CASE("fixed point branches merge where the discriminant vanishes") {
  HenonMap<double> f;
  auto pts = f.closed_form_fixed_points(-1.0 / 25);
  REQUIRE(pts.size() == 2);
  CHECK((pts[0] - pts[1]).norm() < 1e-6);
  CHECK_THROWS_AS(f.closed_form_fixed_points(-0.05), Error);
  try {
    f.closed_form_fixed_points(-0.05);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Degenerate);
  }
}

TEST_CASE("shear family fixed point") {
  HenonShearMap<double> g;
  auto fps = fixed_points(g, 0.35);
  const auto& xp = fps[0];
  CHECK(xp.xi(0) == doctest::Approx(0.64431).epsilon(1e-5));
  CHECK(xp.xi(1) == doctest::Approx(0.22551).epsilon(1e-5));
  CHECK(xp.eigenvalues(1).real() == doctest::Approx(-1.98078).epsilon(1e-5));
  CHECK(xp.eigenvalues(0).real() == doctest::Approx(0.17670).epsilon(1e-4));
}

TEST_CASE("hyperbolic splitting") {
  for (auto map : {make_map("henon"), make_map("henon-shear")}) {
    auto fp = fixed_points(*map, 0.35)[0];
    auto s = hyperbolic_splitting(fp);
    Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    CHECK((s.P_s + s.P_u - I).norm() <= 1e-12);
    CHECK((s.P_s * s.P_s - s.P_s).norm() <= 1e-12);
    CHECK((s.P_u * s.P_u - s.P_u).norm() <= 1e-12);
    Eigen::MatrixXd A = map->jacobian(fp.xi, 0.35);
    CHECK((A * s.P_s - s.P_s * A).norm() <= 1e-10);
    CHECK((s.B_s * s.unstable_basis).norm() <= 1e-12);
    CHECK((s.B_u * s.stable_basis).norm() <= 1e-12);
  }
}

TEST_CASE("generic maps use Newton from seeds") {
  FiniteDifferenceMap<double> fd(2, henon_formula);
  CHECK_THROWS_AS(fixed_points(fd, 0.35), Error);
  auto fps = fixed_points(fd, 0.35, {v2(2.3, 3.3)});
  REQUIRE(fps.size() == 1);
  CHECK(fps[0].xi(0) == doctest::Approx(2.3557137).epsilon(1e-7));
  CHECK_FALSE(fd.analytic_derivatives());
}

TEST_CASE("non-hyperbolic points are rejected") {
  // rotation by a small angle has eigenvalues on the unit circle
  FiniteDifferenceMap<double> rot(2, [](const VectorXd& x, double l) {
    return v2(std::cos(l) * x(0) - std::sin(l) * x(1), std::sin(l) * x(0) + std::cos(l) * x(1));
  });
  CHECK_THROWS_AS(fixed_point_data(rot, v2(0, 0), 0.3), Error);
}
