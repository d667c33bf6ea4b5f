#include "tangle/orbit.hpp"

#include <algorithm>
#include <cmath>

namespace tangle {

namespace {

constexpr double kBoundaryLambdaStep = 1e-6;

double sup(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace

std::string to_string(BoundaryKind bc) { return bc == BoundaryKind::Periodic ? "periodic" : "projection"; }

BoundaryKind boundary_from_string(const std::string& s) {
  if (s == "periodic") return BoundaryKind::Periodic;
  if (s == "projection") return BoundaryKind::Projection;
  throw Error(ErrorCode::InvalidArgument, "unknown boundary condition '" + s + "'");
}

Eigen::VectorXd OrbitSegment::stacked() const {
  return Eigen::Map<const Eigen::VectorXd>(points.data(), points.size());
}

OrbitSegment OrbitSegment::from_stacked(const Eigen::VectorXd& x, int k, int n_minus, double lambda,
                                        BoundaryKind bc) {
  OrbitSegment o;
  const int N = static_cast<int>(x.size() / k);
  o.n_minus = n_minus;
  o.n_plus = n_minus + N - 1;
  o.points = Eigen::Map<const Eigen::MatrixXd>(x.data(), k, N);
  o.lambda = lambda;
  o.bc = bc;
  return o;
}

HomoclinicBVP::HomoclinicBVP(MapPtr map, Eigen::VectorXd xi_ref, int n_minus, int n_plus, BoundaryKind bc)
    : map_(std::move(map)), xi_ref_(std::move(xi_ref)), n_minus_(n_minus), n_plus_(n_plus), bc_(bc) {
  k_ = map_->dimension();
  if (n_plus_ - n_minus_ + 1 < 3) throw Error(ErrorCode::InvalidArgument, "window needs at least 3 points");
  if (xi_ref_.size() != k_) throw Error(ErrorCode::InvalidArgument, "reference fixed point has wrong dimension");
}

Eigen::VectorXd HomoclinicBVP::fixed_point(double lambda) const {
  auto closed = map_->closed_form_fixed_points(lambda);
  if (closed.empty()) return refine_fixed_point(*map_, xi_ref_, lambda);
  auto best = std::min_element(closed.begin(), closed.end(), [&](const auto& a, const auto& b) {
    return (a - xi_ref_).norm() < (b - xi_ref_).norm();
  });
  return *best;
}

FixedPointData<double> HomoclinicBVP::fixed_point_data(double lambda) const {
  return tangle::fixed_point_data(*map_, fixed_point(lambda), lambda);
}

HyperbolicSplitting<double> HomoclinicBVP::splitting(double lambda) const {
  return hyperbolic_splitting(fixed_point_data(lambda));
}

Eigen::VectorXd HomoclinicBVP::boundary_rows(const Eigen::VectorXd& x, double lambda) const {
  const int N = length();
  auto first = x.head(k_);
  auto last = x.segment(static_cast<Eigen::Index>(k_) * (N - 1), k_);
  if (bc_ == BoundaryKind::Periodic) return first - last;
  Eigen::VectorXd xi = fixed_point(lambda);
  auto S = splitting(lambda);
  Eigen::VectorXd b(k_);
  b.head(S.B_s.rows()) = S.B_s * (first - xi);
  b.tail(S.B_u.rows()) = S.B_u * (last - xi);
  return b;
}

Eigen::VectorXd HomoclinicBVP::residual(const Eigen::VectorXd& x, double lambda) const {
  const int N = length();
  Eigen::VectorXd r(dimension());
  for (int i = 0; i + 1 < N; ++i) {
    const Eigen::Index o = static_cast<Eigen::Index>(k_) * i;
    r.segment(o, k_) = x.segment(o + k_, k_) - map_->evaluate(x.segment(o, k_), lambda);
  }
  r.tail(k_) = boundary_rows(x, lambda);
  return r;
}

Eigen::MatrixXd HomoclinicBVP::jacobian(const Eigen::VectorXd& x, double lambda) const {
  const int N = length();
  const Eigen::Index m = dimension();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i + 1 < N; ++i) {
    const Eigen::Index o = static_cast<Eigen::Index>(k_) * i;
    J.block(o, o, k_, k_) = -map_->jacobian(x.segment(o, k_), lambda);
    J.block(o, o + k_, k_, k_).setIdentity();
  }
  const Eigen::Index rb = m - k_, last = m - k_;
  if (bc_ == BoundaryKind::Periodic) {
    J.block(rb, 0, k_, k_).setIdentity();
    J.block(rb, last, k_, k_) = -Eigen::MatrixXd::Identity(k_, k_);
  } else {
    auto S = splitting(lambda);
    const Eigen::Index ns = S.B_s.rows();
    J.block(rb, 0, ns, k_) = S.B_s;
    J.block(rb + ns, last, S.B_u.rows(), k_) = S.B_u;
  }
  return J;
}

Eigen::VectorXd HomoclinicBVP::dlambda(const Eigen::VectorXd& x, double lambda) const {
  const int N = length();
  Eigen::VectorXd d(dimension());
  for (int i = 0; i + 1 < N; ++i) {
    const Eigen::Index o = static_cast<Eigen::Index>(k_) * i;
    d.segment(o, k_) = -map_->dlambda(x.segment(o, k_), lambda);
  }
  if (bc_ == BoundaryKind::Periodic) {
    d.tail(k_).setZero();
  } else {
    const double h = kBoundaryLambdaStep;
    d.tail(k_) = (boundary_rows(x, lambda + h) - boundary_rows(x, lambda - h)) / (2 * h);
  }
  return d;
}

Eigen::MatrixXd HomoclinicBVP::jacobian_directional(const Eigen::VectorXd& x, double lambda,
                                                    const Eigen::VectorXd& u) const {
  const int N = length();
  const Eigen::Index m = dimension();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i + 1 < N; ++i) {
    const Eigen::Index o = static_cast<Eigen::Index>(k_) * i;
    Eigen::VectorXd xi = x.segment(o, k_), ui = u.segment(o, k_);
    for (int j = 0; j < k_; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(k_, j);
      M.block(o, o + j, k_, 1) = -map_->second(xi, lambda, ui, e);
    }
  }
  return M;
}

Eigen::VectorXd HomoclinicBVP::jacobian_dlambda(const Eigen::VectorXd& x, double lambda,
                                                const Eigen::VectorXd& u) const {
  const int N = length();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(dimension());
  for (int i = 0; i + 1 < N; ++i) {
    const Eigen::Index o = static_cast<Eigen::Index>(k_) * i;
    d.segment(o, k_) = -map_->jacobian_dlambda(x.segment(o, k_), lambda) * u.segment(o, k_);
  }
  if (bc_ == BoundaryKind::Projection) {
    const double h = kBoundaryLambdaStep;
    auto Sp = splitting(lambda + h), Sm = splitting(lambda - h);
    const Eigen::Index ns = Sp.B_s.rows(), m = dimension();
    d.segment(m - k_, ns) = (Sp.B_s - Sm.B_s) / (2 * h) * u.head(k_);
    d.tail(Sp.B_u.rows()) = (Sp.B_u - Sm.B_u) / (2 * h) * u.tail(k_);
  }
  return d;
}

double HomoclinicBVP::amplitude(const Eigen::VectorXd& x, double lambda) const {
  return tangle::amplitude(segment(x, lambda), fixed_point(lambda));
}

OrbitSegment HomoclinicBVP::segment(const Eigen::VectorXd& x, double lambda) const {
  OrbitSegment o = OrbitSegment::from_stacked(x, k_, n_minus_, lambda, bc_);
  o.residual = sup(residual(x, lambda));
  return o;
}

HomoclinicBVP HomoclinicBVP::with_window(int n_minus, int n_plus) const {
  return HomoclinicBVP(map_, xi_ref_, n_minus, n_plus, bc_);
}

HomoclinicBVP HomoclinicBVP::with_bc(BoundaryKind bc) const {
  return HomoclinicBVP(map_, xi_ref_, n_minus_, n_plus_, bc);
}

Eigen::VectorXd gamma_residual(const HomoclinicBVP& bvp, const OrbitSegment& orbit) {
  if (orbit.n_minus != bvp.n_minus() || orbit.n_plus != bvp.n_plus() || orbit.dim() != bvp.k())
    throw Error(ErrorCode::InvalidArgument, "orbit window does not match the boundary value problem");
  return bvp.residual(orbit.stacked(), orbit.lambda);
}

NewtonResult newton_solve(const HomoclinicBVP& bvp, const OrbitSegment& seed, const NewtonSettings& settings) {
  if (settings.tolerance <= 0 || settings.max_iterations < 1)
    throw Error(ErrorCode::InvalidArgument, "Newton settings need tolerance > 0 and at least one iteration");
  const double lambda = seed.lambda;
  Eigen::VectorXd x = seed.stacked();
  Eigen::VectorXd r = gamma_residual(bvp, seed);
  if (!r.allFinite()) throw Error(ErrorCode::NoConvergence, "seed residual is not finite");
  NewtonResult out;
  double rn = sup(r);
  out.history.push_back(rn);
  for (int it = 0; it < settings.max_iterations && rn > settings.tolerance; ++it) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bvp.jacobian(x, lambda));
    if (!(lu.rcond() > 1e-15)) throw Error(ErrorCode::SingularJacobian, "Newton system is singular");
    Eigen::VectorXd dx = lu.solve(r);
    double a = 1.0;
    Eigen::VectorXd xn = x - dx, rnew = bvp.residual(xn, lambda);
    if (settings.damping) {
      while ((!rnew.allFinite() || sup(rnew) >= rn) && a > 1e-4) {
        a *= *settings.damping;
        xn = x - a * dx;
        rnew = bvp.residual(xn, lambda);
      }
    }
    if (!rnew.allFinite()) throw Error(ErrorCode::NoConvergence, "iterate left the finite domain");
    x = xn;
    r = rnew;
    rn = sup(r);
    out.history.push_back(rn);
  }
  if (!(rn <= settings.tolerance))
    throw Error(ErrorCode::NoConvergence, "residual " + std::to_string(rn) + " after " +
                                              std::to_string(settings.max_iterations) + " iterations");
  out.orbit = bvp.segment(x, lambda);
  return out;
}

double amplitude(const OrbitSegment& orbit, const Eigen::VectorXd& xi) {
  return (orbit.points.colwise() - xi).norm();
}

bool tails_decay(const OrbitSegment& orbit, const Eigen::VectorXd& xi, double threshold) {
  return (orbit.points.col(0) - xi).norm() <= threshold &&
         (orbit.points.col(orbit.points.cols() - 1) - xi).norm() <= threshold;
}

double sup_distance(const OrbitSegment& a, const OrbitSegment& b, int shift) {
  // compare a_n with b_{n+shift}
  int lo = std::max(a.n_minus, b.n_minus - shift), hi = std::min(a.n_plus, b.n_plus - shift);
  if (lo > hi) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (int n = lo; n <= hi; ++n) d = std::max(d, (a.point(n) - b.point(n + shift)).lpNorm<Eigen::Infinity>());
  return d;
}

namespace {

// Point at t along the unstable eigenvector after `iterates` applications of f.
Eigen::VectorXd iterate_from(const Map& f, const Eigen::VectorXd& xi, const Eigen::VectorXd& vu, double t,
                             int iterates, double lambda) {
  Eigen::VectorXd y = xi + t * vu;
  for (int i = 0; i < iterates; ++i) y = f.evaluate(y, lambda);
  return y;
}

bool duplicate(const OrbitSegment& o, const std::vector<OrbitSegment>& found, double tol) {
  for (const auto& f : found)
    for (int s = -3; s <= 3; ++s)
      if (sup_distance(o, f, s) < tol) return true;
  return false;
}

}  // namespace

std::vector<OrbitSegment> seed_homoclinic(const HomoclinicBVP& bvp, double lambda, int count,
                                          const SeedSettings& st) {
  if (bvp.k() != 2) throw Error(ErrorCode::InvalidArgument, "manifold seeding is implemented for planar maps");
  const Map& f = bvp.map();
  auto fp = bvp.fixed_point_data(lambda);
  if (fp.n_stable != 1 || fp.n_unstable != 1)
    throw Error(ErrorCode::InvalidArgument, "seeding needs one-dimensional stable and unstable manifolds");
  const Eigen::VectorXd xi = fp.xi;
  const double mu_s = fp.eigenvalues(0).real(), mu_u = fp.eigenvalues(1).real();
  const Eigen::VectorXd vs = fp.basis.col(0), vu = fp.basis.col(1);
  auto S = hyperbolic_splitting(fp);
  const Eigen::RowVectorXd bs = S.B_s.row(0), bu = S.B_u.row(0);

  std::vector<int> sides = mu_u < 0 ? std::vector<int>{1} : std::vector<int>{1, -1};
  const double span = mu_u < 0 ? mu_u * mu_u : mu_u;
  // t runs over one fundamental domain of the unstable branch (two if mu_u > 0)
  std::vector<Eigen::VectorXd> ts;
  std::vector<Eigen::MatrixXd> Ys;
  for (int side : sides) {
    ts.push_back(Eigen::VectorXd::LinSpaced(st.samples, side * st.t0, side * st.t0 * span));
    Eigen::MatrixXd Y(2, st.samples);
    for (int i = 0; i < st.samples; ++i) Y.col(i) = xi + ts.back()(i) * vu;
    Ys.push_back(std::move(Y));
  }

  std::vector<OrbitSegment> found;
  const Eigen::VectorXd xi_l = bvp.fixed_point(lambda);
  for (int K = 1; K <= st.max_iterates && static_cast<int>(found.size()) < count; ++K) {
    std::vector<double> hits;
    for (std::size_t sd = 0; sd < sides.size(); ++sd) {
      Eigen::MatrixXd& Y = Ys[sd];
      for (int i = 0; i < st.samples; ++i)
        if (Y.col(i).allFinite()) Y.col(i) = f.evaluate(Y.col(i), lambda);
      for (int i = 0; i + 1 < st.samples; ++i) {
        Eigen::Vector2d d0 = Y.col(i) - xi, d1 = Y.col(i + 1) - xi;
        if (!d0.allFinite() || !d1.allFinite() || d0.norm() >= st.near || d1.norm() >= st.near) continue;
        double g0 = bu.dot(d0), g1 = bu.dot(d1);
        if ((g0 < 0) == (g1 < 0)) continue;
        double lo = ts[sd](i), hi = ts[sd](i + 1), glo = g0;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          double gm = bu.dot(iterate_from(f, xi, vu, mid, K, lambda) - xi);
          if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        hits.push_back(0.5 * (lo + hi));
      }
    }
    std::sort(hits.begin(), hits.end());

    for (double t : hits) {
      if (static_cast<int>(found.size()) >= count) break;
      // backward tail on the unstable line, the computed arc, forward tail on the stable line
      const int pad = std::max(-bvp.n_minus(), bvp.n_plus()) + 5;
      std::vector<Eigen::VectorXd> full;
      for (int j = pad; j >= 1; --j) full.push_back(xi + t * std::pow(mu_u, -j) * vu);
      Eigen::VectorXd y = xi + t * vu;
      full.push_back(y);
      for (int i = 0; i < K; ++i) {
        y = f.evaluate(y, lambda);
        full.push_back(y);
      }
      const double c = bs.dot(y - xi);
      for (int j = 1; j <= pad; ++j) full.push_back(xi + c * std::pow(mu_s, j) * vs);

      int centre = 0;
      double dmax = -1;
      for (int i = 0; i < static_cast<int>(full.size()); ++i) {
        double d = (full[i] - xi).norm();
        if (d > dmax) {
          dmax = d;
          centre = i;
        }
      }
      if (centre + bvp.n_minus() < 0 || centre + bvp.n_plus() >= static_cast<int>(full.size())) continue;
      OrbitSegment seed;
      seed.n_minus = bvp.n_minus();
      seed.n_plus = bvp.n_plus();
      seed.lambda = lambda;
      seed.bc = bvp.bc();
      seed.points.resize(2, seed.length());
      for (int n = seed.n_minus; n <= seed.n_plus; ++n) seed.points.col(n - seed.n_minus) = full[centre + n];

      OrbitSegment orbit;
      try {
        orbit = newton_solve(bvp, seed, st.newton).orbit;
      } catch (const Error&) {
        continue;
      }
      if (amplitude(orbit, xi_l) < st.min_amplitude || !tails_decay(orbit, xi_l)) continue;
      if (duplicate(orbit, found, st.distinct)) continue;
      found.push_back(orbit);
    }
  }
  if (found.empty()) throw Error(ErrorCode::NoIntersectionFound, "no homoclinic crossing within the search budget");
  return found;
}

OrbitSegment rewindow(const HomoclinicBVP& target, const OrbitSegment& orbit, const NewtonSettings& settings) {
  Eigen::VectorXd xi = target.fixed_point(orbit.lambda);
  OrbitSegment seed;
  seed.n_minus = target.n_minus();
  seed.n_plus = target.n_plus();
  seed.lambda = orbit.lambda;
  seed.bc = target.bc();
  seed.points.resize(target.k(), seed.length());
  for (int n = seed.n_minus; n <= seed.n_plus; ++n)
    seed.points.col(n - seed.n_minus) = (n >= orbit.n_minus && n <= orbit.n_plus) ? orbit.point(n) : xi;
  return newton_solve(target, seed, settings).orbit;
}

}  // namespace tangle
