#include "tangle/fold.hpp"

#include <cmath>

namespace tangle {

TangencyData kernel_and_adjoint(const HomoclinicBVP& bvp, const FoldEvent& fold, const KernelSettings& ks) {
  const int k = bvp.k(), N = bvp.length();
  const Eigen::Index m = bvp.dimension();
  Eigen::MatrixXd J = bvp.jacobian(fold.x, fold.lambda);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();

  TangencyData d;
  d.lambda_bar = fold.lambda;
  d.orbit = bvp.segment(fold.x, fold.lambda);
  d.sigma_min = sv(m - 1);
  d.sigma_second = sv(m - 2);
  if (!(d.sigma_min <= ks.max_small) || !(d.sigma_second >= ks.min_second))
    throw Error(ErrorCode::KernelNotSimple, "singular values " + std::to_string(d.sigma_min) + ", " +
                                                std::to_string(d.sigma_second));

  Eigen::VectorXd u = svd.matrixV().col(m - 1);
  if (fold.kernel.size() == m && u.dot(fold.kernel) < 0) u = -u;
  d.u = Eigen::Map<const Eigen::MatrixXd>(u.data(), k, N);

  d.w_full = svd.matrixU().col(m - 1);
  Eigen::VectorXd w = d.w_full.head(static_cast<Eigen::Index>(k) * (N - 1));
  w.normalize();
  d.w = Eigen::Map<const Eigen::MatrixXd>(w.data(), k, N - 1);

  tangency_constants(bvp, d);
  if (d.c_lambda < 0) {
    d.w = -d.w;
    d.w_full = -d.w_full;
    d.c_lambda = -d.c_lambda;
    d.c_x = -d.c_x;
  }
  return d;
}

std::pair<double, double> tangency_constants(const HomoclinicBVP& bvp, TangencyData& d) {
  const Map& f = bvp.map();
  const int N = static_cast<int>(d.orbit.points.cols());
  double cl = 0.0, cx = 0.0;
  for (int i = 0; i + 1 < N; ++i) {
    Eigen::VectorXd x = d.orbit.points.col(i), ui = d.u.col(i), wi = d.w.col(i);
    cl += wi.dot(f.dlambda(x, d.lambda_bar));
    cx += 0.5 * wi.dot(f.second(x, d.lambda_bar, ui, ui));
  }
  d.c_lambda = cl;
  d.c_x = cx;
  return {cl, cx};
}

double variational_residual(const HomoclinicBVP& bvp, const TangencyData& d) {
  const int N = static_cast<int>(d.u.cols());
  double r = 0.0;
  for (int i = 0; i + 1 < N; ++i) {
    Eigen::VectorXd e = d.u.col(i + 1) - bvp.map().jacobian(d.orbit.points.col(i), d.lambda_bar) * d.u.col(i);
    r = std::max(r, e.lpNorm<Eigen::Infinity>());
  }
  return r;
}

double adjoint_residual(const HomoclinicBVP& bvp, const TangencyData& d) {
  const int M = static_cast<int>(d.w.cols());
  double r = 0.0;
  for (int i = 1; i < M; ++i) {
    Eigen::VectorXd e =
        d.w.col(i - 1) - bvp.map().jacobian(d.orbit.points.col(i), d.lambda_bar).transpose() * d.w.col(i);
    r = std::max(r, e.lpNorm<Eigen::Infinity>());
  }
  return r;
}

FitReport quadratic_fit_check(const std::vector<BranchPoint>& points, const TangencyData& d, double tau_max,
                              int min_points) {
  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(d.u.data(), d.u.size());
  Eigen::VectorXd xbar = d.orbit.stacked();
  std::vector<double> t2, y;
  for (const auto& p : points) {
    if (p.x.size() != xbar.size()) continue;
    double tau = u.dot(p.x - xbar);
    if (std::abs(tau) > tau_max) continue;
    t2.push_back(tau * tau);
    y.push_back(p.lambda - d.lambda_bar);
  }
  FitReport rep;
  rep.points = static_cast<int>(y.size());
  rep.tau_max = tau_max;
  rep.predicted = -d.c_x / d.c_lambda;
  if (rep.points < min_points)
    throw Error(ErrorCode::InsufficientPoints, std::to_string(rep.points) + " points within tau_max");
  double stt = 0.0, sty = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    stt += t2[i] * t2[i];
    sty += t2[i] * y[i];
    mean += y[i];
  }
  mean /= static_cast<double>(y.size());
  rep.slope = sty / stt;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += std::pow(y[i] - rep.slope * t2[i], 2);
    ss_tot += std::pow(y[i] - mean, 2);
  }
  rep.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  rep.deviation = std::abs(rep.slope - rep.predicted) / std::abs(rep.predicted);
  return rep;
}

FoldEvent relocate_fold(const HomoclinicBVP& target, const HomoclinicBVP& source, const FoldEvent& fold, double h) {
  const int k = source.k();
  const Eigen::VectorXd xi = target.fixed_point(fold.lambda);
  const Eigen::Index m = target.dimension();
  Eigen::VectorXd x(m), u = Eigen::VectorXd::Zero(m);
  for (int n = target.n_minus(); n <= target.n_plus(); ++n) {
    const Eigen::Index j = static_cast<Eigen::Index>(n - target.n_minus()) * k;
    if (n >= source.n_minus() && n <= source.n_plus()) {
      const Eigen::Index i = static_cast<Eigen::Index>(n - source.n_minus()) * k;
      x.segment(j, k) = fold.x.segment(i, k);
      u.segment(j, k) = fold.kernel.segment(i, k);
    } else {
      x.segment(j, k) = xi;
    }
  }
  BranchPoint centre;
  centre.x = x;
  centre.lambda = fold.lambda;
  centre.tangent = Eigen::VectorXd::Zero(m + 1);
  centre.tangent.head(m) = u.normalized();

  ContinuationSettings st;
  st.tolerance = 1e-11;
  st.corrector_iterations = 20;
  st.min_cosine = -1.0;
  st.max_first_correction = std::numeric_limits<double>::infinity();
  BranchPoint a = predictor_corrector_step(target, centre, -h, st);
  a.tangent = branch_tangent(target, a.x, a.lambda, &centre.tangent);
  BranchPoint b = predictor_corrector_step(target, centre, h, st);
  b.tangent = branch_tangent(target, b.x, b.lambda, &centre.tangent);
  return locate_fold(target, a, b, st);
}

std::vector<BranchPoint> sample_near_fold(const ContinuationProblem& p, const FoldEvent& fold, double tau_max,
                                          int per_side, double tolerance) {
  const Eigen::Index m = p.dimension();
  BranchPoint centre;
  centre.x = fold.x;
  centre.lambda = fold.lambda;
  centre.amplitude = p.amplitude(fold.x, fold.lambda);
  centre.tangent = Eigen::VectorXd::Zero(m + 1);
  centre.tangent.head(m) = fold.kernel.normalized();

  ContinuationSettings st;
  st.tolerance = tolerance;
  st.corrector_iterations = 20;
  st.min_cosine = -1.0;
  st.max_first_correction = std::numeric_limits<double>::infinity();

  const double h = tau_max / per_side;
  const Eigen::VectorXd u = fold.kernel.normalized();
  std::vector<BranchPoint> out{centre};
  for (int dir : {1, -1}) {
    BranchPoint cur = centre;
    cur.tangent = dir * centre.tangent;
    for (int i = 0; i < 4 * per_side; ++i) {
      BranchPoint next = predictor_corrector_step(p, cur, h, st);
      if (std::abs(u.dot(next.x - fold.x)) > tau_max) break;
      out.push_back(next);
      cur = std::move(next);
    }
  }
  return out;
}

}  // namespace tangle
