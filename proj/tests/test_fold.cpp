#include <doctest.h>

#include <random>

#include "tangle/pipeline.hpp"

using namespace tangle;
using Eigen::VectorXd;

namespace {

const PrimaryResult& primary() {
  static const PrimaryResult r = run_primary(RunConfig{});
  return r;
}

HomoclinicBVP base() { return primary().bvp(-20, 21); }

VectorXd flat(const Eigen::MatrixXd& m) { return Eigen::Map<const VectorXd>(m.data(), m.size()); }

}  // namespace

TEST_CASE("kernel and adjoint at the primary folds") {
  HomoclinicBVP bvp = base();
  REQUIRE(primary().folds.size() == 4);
  for (const auto& f : primary().folds) {
    CAPTURE(f.name);
    REQUIRE(f.tangency);
    const TangencyData& d = *f.tangency;
    CHECK(d.sigma_min <= 1e-6);
    CHECK(d.sigma_second >= 1e-2);
    CHECK(d.sv_gap() >= 1e3);
    CHECK(flat(d.u).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(flat(d.w).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(variational_residual(bvp, d) <= 1e-8);
    CHECK(adjoint_residual(bvp, d) <= 1e-8);
    // both decay toward the ends of the window
    auto ends_small = [](const Eigen::MatrixXd& m) {
      double mx = m.colwise().norm().maxCoeff();
      return m.col(0).norm() <= 1e-2 * mx && m.col(m.cols() - 1).norm() <= 1e-2 * mx;
    };
    CHECK(ends_small(d.u));
    CHECK(ends_small(d.w));
    // singular vector against the augmented-system kernel
    VectorXd u = flat(d.u), v = f.event.kernel;
    CHECK(std::min((u - v).norm(), (u + v).norm()) <= 1e-6);
  }
}

TEST_CASE("sign conventions") {
  for (const auto& f : primary().folds) {
    CAPTURE(f.name);
    const TangencyData& d = *f.tangency;
    CHECK(d.c_lambda > 0);
    const double pred = -d.c_x / d.c_lambda;
    if (f.event.side == FoldSide::R)
      CHECK(pred < 0);
    else
      CHECK(pred > 0);
  }
}

TEST_CASE("ratio is invariant under sign flips of u and w") {
  HomoclinicBVP bvp = base();
  const TangencyData& d = *primary().folds[0].tangency;
  TangencyData a = d;
  a.u = -a.u;
  tangency_constants(bvp, a);
  CHECK(a.ratio() == d.ratio());
  TangencyData b = d;
  b.w = -b.w;
  tangency_constants(bvp, b);
  CHECK(b.ratio() == d.ratio());
  CHECK(b.c_lambda == -d.c_lambda);
}

TEST_CASE("tangency constants are stable under doubling the window") {
  for (const auto& f : primary().folds) {
    CAPTURE(f.name);
    CHECK(std::abs(f.c_x_doubled - f.tangency->c_x) <= 1e-6 * std::abs(f.tangency->c_x));
  }
}

TEST_CASE("adjoint annihilates the range") {
  HomoclinicBVP bvp = base();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  for (const auto& f : primary().folds) {
    CAPTURE(f.name);
    // full left singular vector against the full Jacobian on J
    const TangencyData& d = *f.tangency;
    Eigen::MatrixXd J = bvp.jacobian(f.event.x, f.event.lambda);
    // interior part on the doubled window, where the boundary rows no longer leak into it
    HomoclinicBVP wide = bvp.with_window(-40, 42);
    TangencyData d2 = kernel_and_adjoint(wide, relocate_fold(wide, bvp, f.event));
    Eigen::MatrixXd J2 = wide.jacobian(d2.orbit.stacked(), d2.lambda_bar).topRows(d2.w.size());
    VectorXd w2 = flat(d2.w);
    for (int i = 0; i < 20; ++i) {
      VectorXd v = VectorXd::NullaryExpr(J.cols(), [&] { return N(rng); });
      CHECK(std::abs(d.w_full.dot(J * v)) <= 1e-8 * v.norm());
      VectorXd v2 = VectorXd::NullaryExpr(J2.cols(), [&] { return N(rng); });
      CHECK(std::abs(w2.dot(J2 * v2)) <= 1e-8 * v2.norm());
    }
  }
}

TEST_CASE("quadratic fold law") {
  for (const auto& f : primary().folds) {
    CAPTURE(f.name);
    REQUIRE(f.fits.size() == 4);
    // tau_max 0.1, 0.05, 0.02, 0.01
    for (std::size_t i = 0; i < 4; ++i) CHECK(f.fits[i].deviation <= 0.1);
    for (std::size_t i = 0; i + 1 < 4; ++i) CHECK(f.fits[i + 1].deviation <= f.fits[i].deviation);
    CHECK(f.fits[2].r2 >= 0.999);
    CHECK(f.fits[3].r2 >= 0.999);
  }
}

TEST_CASE("synthetic normal form is fitted exactly") {
  TangencyData d;
  d.lambda_bar = 0.3;
  d.c_lambda = 2.0;
  d.c_x = -0.5;
  d.orbit = OrbitSegment::from_stacked(VectorXd::LinSpaced(6, 0, 1), 2, -1, 0.3);
  VectorXd u = VectorXd::Ones(6).normalized();
  d.u = Eigen::Map<const Eigen::MatrixXd>(u.data(), 2, 3);
  std::vector<BranchPoint> pts;
  for (int i = -10; i <= 10; ++i) {
    const double tau = 0.01 * i;
    BranchPoint p;
    p.x = d.orbit.stacked() + tau * u;
    p.lambda = d.lambda_bar - d.c_x / d.c_lambda * tau * tau;
    pts.push_back(p);
  }
  FitReport r = quadratic_fit_check(pts, d, 0.1);
  CHECK(r.deviation <= 1e-12);
  CHECK(r.r2 == doctest::Approx(1.0).epsilon(1e-12));
  pts.resize(5);
  CHECK_THROWS_AS(quadratic_fit_check(pts, d, 0.1), Error);
}

TEST_CASE("fold genericity") {
  for (const auto& f : primary().folds) {
    CAPTURE(f.name);
    CHECK(f.event.quadratic == (std::abs(f.tangency->c_x) > 1e-8));
    CHECK(std::abs(f.tangency->c_lambda) > 1e-8);
  }
}

TEST_CASE("regular points have no kernel") {
  HomoclinicBVP bvp = base();
  FoldEvent fake;
  fake.x = primary().seed.stacked();
  fake.lambda = primary().seed.lambda;
  CHECK_THROWS_AS(kernel_and_adjoint(bvp, fake), Error);
}
