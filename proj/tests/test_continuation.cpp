#include <doctest.h>

#include <cmath>

#include "tangle/continuation.hpp"
#include "tangle/pipeline.hpp"

using namespace tangle;
using Eigen::VectorXd;

namespace {

// x^2 + lambda^2 - 1 = 0
class Circle : public ContinuationProblem {
public:
  Eigen::Index dimension() const override { return 1; }
  VectorXd residual(const VectorXd& x, double l) const override { return VectorXd::Constant(1, x(0) * x(0) + l * l - 1); }
  Eigen::MatrixXd jacobian(const VectorXd& x, double) const override { return Eigen::MatrixXd::Constant(1, 1, 2 * x(0)); }
  VectorXd dlambda(const VectorXd&, double l) const override { return VectorXd::Constant(1, 2 * l); }
};

VectorXd scalar(double v) { return VectorXd::Constant(1, v); }

const PrimaryResult& primary() {
  static const PrimaryResult r = run_primary(RunConfig{}, false);
  return r;
}

}  // namespace

TEST_CASE("circle tangents") {
  Circle c;
  VectorXd t = branch_tangent(c, scalar(0), -1);
  CHECK(std::abs(std::abs(t(0)) - 1) <= 1e-14);
  CHECK(std::abs(t(1)) <= 1e-14);
  t = branch_tangent(c, scalar(1), 0);
  CHECK(std::abs(t(0)) <= 1e-14);
  CHECK(std::abs(std::abs(t(1)) - 1) <= 1e-14);
  VectorXd prev(2);
  prev << 0, -1;
  CHECK(branch_tangent(c, scalar(1), 0, &prev)(1) == doctest::Approx(-1.0));
}

TEST_CASE("circle predictor-corrector step") {
  Circle c;
  BranchPoint p = make_branch_point(c, scalar(0), -1);
  BranchPoint q = predictor_corrector_step(c, p, 0.1);
  CHECK(std::abs(q.x(0) * q.x(0) + q.lambda * q.lambda - 1) <= 1e-12);
  CHECK(q.s - p.s == doctest::Approx(0.1).epsilon(1e-2));
  BranchPoint z = predictor_corrector_step(c, p, 0.0);
  CHECK(z.x(0) == doctest::Approx(p.x(0)));
  CHECK(z.lambda == doctest::Approx(p.lambda));
}

TEST_CASE("circle branch closes with folds at plus and minus one") {
  Circle c;
  ContinuationSettings st;
  st.h_max = 0.05;
  st.lambda_tilde = 0.0;
  Branch br = trace_branch(c, make_branch_point(c, scalar(1), 0, 1), st);
  REQUIRE(br.closed);
  CHECK(br.points.back().s == doctest::Approx(2 * M_PI).epsilon(0.01));
  REQUIRE(br.folds.size() == 2);
  for (const auto& f : br.folds) {
    CHECK(f.refined);
    if (f.side == FoldSide::R)
      CHECK(std::abs(f.lambda - 1) <= 1e-10);
    else
      CHECK(std::abs(f.lambda + 1) <= 1e-10);
  }
  CHECK(br.folds[0].side != br.folds[1].side);
  CHECK(br.crossings.size() == 2);
}

TEST_CASE("locate_fold needs a sign change") {
  Circle c;
  BranchPoint a = make_branch_point(c, scalar(-0.6), -0.8);
  BranchPoint b = predictor_corrector_step(c, a, 0.01);
  CHECK_THROWS_AS(locate_fold(c, a, b), Error);
}

TEST_CASE("one-hump branch") {
  const Branch& br = primary().branch;
  REQUIRE(br.closed);
  CHECK(br.crossings.size() == 4);
  REQUIRE(br.folds.size() == 4);
  int nl = 0, nr = 0;
  for (std::size_t i = 0; i < br.folds.size(); ++i) {
    (br.folds[i].side == FoldSide::L ? nl : nr)++;
    CHECK(br.folds[i].side != br.folds[(i + 1) % br.folds.size()].side);
    CHECK(br.folds[i].refined);
  }
  CHECK(nl == nr);
  CHECK(primary().orderings_hold);
  for (std::size_t i = 1; i < br.points.size(); ++i) {
    CHECK(br.points[i].tangent.dot(br.points[i - 1].tangent) > 0.9);
  }
}

TEST_CASE("every accepted point solves the system") {
  const PrimaryResult& r = primary();
  HomoclinicBVP bvp = r.bvp(-20, 21);
  ContinuationSettings st = RunConfig{}.continuation();
  st.h_initial = 0.005;
  st.h_max = 0.005;
  Branch br = trace_branch(bvp, make_branch_point(bvp, r.seed.stacked(), r.seed.lambda, 1), st);
  CHECK(br.closed);
  CHECK(br.points.size() >= 1000);
  double worst = 0.0;
  for (const auto& p : br.points) worst = std::max(worst, bvp.residual(p.x, p.lambda).lpNorm<Eigen::Infinity>());
  CHECK(worst <= st.tolerance);
  REQUIRE(br.folds.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(br.folds[i].lambda - r.branch.folds[i].lambda) <= 1e-8);
}

TEST_CASE("retracing from another crossing gives the same folds") {
  const PrimaryResult& r = primary();
  HomoclinicBVP bvp = r.bvp(-20, 21);
  const Crossing& c = r.branch.crossings[2];
  Branch br = trace_branch(bvp, make_branch_point(bvp, c.x, c.lambda, -1), RunConfig{}.continuation());
  REQUIRE(br.closed);
  REQUIRE(br.folds.size() == 4);
  std::vector<double> a, b;
  for (const auto& f : r.branch.folds) a.push_back(f.lambda);
  for (const auto& f : br.folds) b.push_back(f.lambda);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-8);
}

TEST_CASE("lambda is quadratic in arclength at the folds") {
  const PrimaryResult& r = primary();
  HomoclinicBVP bvp = r.bvp(-20, 21);
  ContinuationSettings st;
  st.tolerance = 1e-11;
  st.min_cosine = -1;
  st.max_first_correction = std::numeric_limits<double>::infinity();
  for (const auto& f : r.branch.folds) {
    BranchPoint centre;
    centre.x = f.x;
    centre.lambda = f.lambda;
    centre.tangent = VectorXd::Zero(bvp.dimension() + 1);
    centre.tangent.head(bvp.dimension()) = f.kernel;
    const double h = 0.002;
    std::vector<double> s2, dl;
    for (int dir : {1, -1}) {
      BranchPoint cur = centre;
      cur.tangent *= dir;
      for (int i = 0; i < 10; ++i) {
        cur = predictor_corrector_step(bvp, cur, h, st);
        s2.push_back(cur.s * cur.s);
        dl.push_back(cur.lambda - f.lambda);
      }
    }
    double stt = 0, sty = 0, mean = 0;
    for (std::size_t i = 0; i < s2.size(); ++i) stt += s2[i] * s2[i], sty += s2[i] * dl[i], mean += dl[i];
    mean /= dl.size();
    const double a = sty / stt;
    double res = 0, tot = 0;
    for (std::size_t i = 0; i < s2.size(); ++i) res += std::pow(dl[i] - a * s2[i], 2), tot += std::pow(dl[i] - mean, 2);
    CHECK(1 - res / tot >= 0.999);
    CHECK((f.side == FoldSide::R ? a < 0 : a > 0));
  }
}
