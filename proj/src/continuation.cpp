#include "tangle/continuation.hpp"

#include <cmath>

namespace tangle {

namespace {

double sup(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

Eigen::VectorXd join(const Eigen::VectorXd& x, double lambda) {
  Eigen::VectorXd z(x.size() + 1);
  z << x, lambda;
  return z;
}

// [[F_x, F_lambda], [t^T]]
Eigen::MatrixXd bordered(const ContinuationProblem& p, const Eigen::VectorXd& x, double lambda,
                         const Eigen::VectorXd& t) {
  const Eigen::Index m = p.dimension();
  Eigen::MatrixXd M(m + 1, m + 1);
  M.topLeftCorner(m, m) = p.jacobian(x, lambda);
  M.topRightCorner(m, 1) = p.dlambda(x, lambda);
  M.bottomRows(1) = t.transpose();
  return M;
}

int det_sign(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
  int s = static_cast<int>(lu.permutationP().determinant());
  const auto d = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) == 0.0) return 0;
    if (d(i) < 0) s = -s;
  }
  return s;
}

int sign_of(double v) { return (v > 0) - (v < 0); }

}  // namespace

Eigen::MatrixXd ContinuationProblem::jacobian_directional(const Eigen::VectorXd& x, double lambda,
                                                          const Eigen::VectorXd& u) const {
  const Eigen::Index m = dimension();
  const double h = 1e-6;
  Eigen::MatrixXd M(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e(j) = h;
    M.col(j) = (jacobian(x + e, lambda) * u - jacobian(x - e, lambda) * u) / (2 * h);
  }
  return M;
}

Eigen::VectorXd ContinuationProblem::jacobian_dlambda(const Eigen::VectorXd& x, double lambda,
                                                      const Eigen::VectorXd& u) const {
  const double h = 1e-6;
  return (jacobian(x, lambda + h) * u - jacobian(x, lambda - h) * u) / (2 * h);
}

Eigen::VectorXd branch_tangent(const ContinuationProblem& p, const Eigen::VectorXd& x, double lambda,
                               const Eigen::VectorXd* previous) {
  const Eigen::Index m = p.dimension();
  if (previous) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bordered(p, x, lambda, *previous));
    if (!(lu.rcond() > 1e-15)) throw Error(ErrorCode::RankDeficient, "bordered tangent system is singular");
    Eigen::VectorXd t = lu.solve(Eigen::VectorXd::Unit(m + 1, m));
    t.normalize();
    if (t.dot(*previous) < 0) t = -t;
    return t;
  }
  Eigen::MatrixXd A(m, m + 1);
  A.leftCols(m) = p.jacobian(x, lambda);
  A.rightCols(1) = p.dlambda(x, lambda);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.transpose());
  if (qr.rank() < m) throw Error(ErrorCode::RankDeficient, "extended Jacobian has a kernel of dimension > 1");
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd t = Q.col(m);
  return t.normalized();
}

Eigen::VectorXd branch_tangent(const ContinuationProblem& p, const BranchPoint& point) {
  return branch_tangent(p, point.x, point.lambda, point.tangent.size() ? &point.tangent : nullptr);
}

BranchPoint make_branch_point(const ContinuationProblem& p, const Eigen::VectorXd& x, double lambda, int direction) {
  BranchPoint b;
  b.x = x;
  b.lambda = lambda;
  b.amplitude = p.amplitude(x, lambda);
  b.tangent = branch_tangent(p, x, lambda);
  const Eigen::Index m = p.dimension();
  double tl = b.tangent(m);
  if (std::abs(tl) > 1e-14) {
    if (sign_of(tl) != (direction >= 0 ? 1 : -1)) b.tangent = -b.tangent;
  } else {
    Eigen::Index i;
    b.tangent.cwiseAbs().maxCoeff(&i);
    if (b.tangent(i) < 0) b.tangent = -b.tangent;
  }
  return b;
}

StepResult corrector_step(const ContinuationProblem& p, const BranchPoint& point, double h,
                          const ContinuationSettings& st) {
  const Eigen::Index m = p.dimension();
  const Eigen::VectorXd& t = point.tangent;
  const Eigen::VectorXd z = join(point.x, point.lambda);
  const Eigen::VectorXd zp = z + h * t;
  Eigen::VectorXd y = zp;
  StepResult out;
  bool converged = false;
  for (int it = 0; it <= st.corrector_iterations; ++it) {
    Eigen::VectorXd r(m + 1);
    r.head(m) = p.residual(y.head(m), y(m));
    r(m) = t.dot(y - zp);
    if (!r.allFinite()) throw Error(ErrorCode::StepFailed, "corrector left the finite domain");
    if (sup(r) <= st.tolerance) {
      converged = true;
      break;
    }
    if (it == st.corrector_iterations) break;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bordered(p, y.head(m), y(m), t));
    Eigen::VectorXd d = lu.solve(r);
    if (!d.allFinite()) throw Error(ErrorCode::StepFailed, "singular corrector system");
    if (it == 0) {
      out.first_correction = d.norm();
      if (out.first_correction > st.max_first_correction * std::abs(h) && std::abs(h) > 1e-6)
        throw Error(ErrorCode::StepFailed, "first correction too large for the step");
    }
    y -= d;
  }
  if (!converged) throw Error(ErrorCode::StepFailed, "corrector did not converge");

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(bordered(p, y.head(m), y(m), t));
  Eigen::VectorXd tn = lu.solve(Eigen::VectorXd::Unit(m + 1, m));
  if (!tn.allFinite() || tn.norm() == 0.0) throw Error(ErrorCode::StepFailed, "tangent system is singular");
  tn.normalize();
  if (tn.dot(t) < 0) tn = -tn;
  if (tn.dot(t) < st.min_cosine) throw Error(ErrorCode::StepFailed, "tangent turned too far");
  out.orientation = det_sign(lu);

  out.point.x = y.head(m);
  out.point.lambda = y(m);
  out.point.amplitude = p.amplitude(out.point.x, out.point.lambda);
  out.point.s = point.s + (y - z).norm();
  out.point.tangent = tn;
  return out;
}

BranchPoint predictor_corrector_step(const ContinuationProblem& p, const BranchPoint& point, double h,
                                     const ContinuationSettings& settings) {
  return corrector_step(p, point, h, settings).point;
}

Eigen::VectorXd solve_at_lambda(const ContinuationProblem& p, Eigen::VectorXd x, double lambda, double tolerance,
                                int max_iterations) {
  for (int it = 0; it <= max_iterations; ++it) {
    Eigen::VectorXd r = p.residual(x, lambda);
    if (!r.allFinite()) break;
    if (sup(r) <= tolerance) return x;
    if (it == max_iterations) break;
    x -= p.jacobian(x, lambda).partialPivLu().solve(r);
  }
  throw Error(ErrorCode::NoConvergence, "Newton at frozen parameter");
}

namespace {

struct FoldSolve {
  Eigen::VectorXd x, u;
  double lambda = 0.0;
  bool ok = false;
};

FoldSolve moore_spence(const ContinuationProblem& p, Eigen::VectorXd x, Eigen::VectorXd u, double lambda,
                       double tolerance) {
  const Eigen::Index m = p.dimension();
  u.normalize();
  FoldSolve out;
  for (int it = 0; it <= 25; ++it) {
    Eigen::MatrixXd Fx = p.jacobian(x, lambda);
    Eigen::VectorXd R(2 * m + 1);
    R.head(m) = p.residual(x, lambda);
    R.segment(m, m) = Fx * u;
    R(2 * m) = u.squaredNorm() - 1.0;
    if (!R.allFinite()) return out;
    if (sup(R) <= tolerance) {
      out = {x, u, lambda, true};
      return out;
    }
    if (it == 25) break;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * m + 1, 2 * m + 1);
    A.block(0, 0, m, m) = Fx;
    A.block(0, 2 * m, m, 1) = p.dlambda(x, lambda);
    A.block(m, 0, m, m) = p.jacobian_directional(x, lambda, u);
    A.block(m, m, m, m) = Fx;
    A.block(m, 2 * m, m, 1) = p.jacobian_dlambda(x, lambda, u);
    A.block(2 * m, m, 1, m) = 2.0 * u.transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (!(lu.rcond() > 1e-15)) return out;
    Eigen::VectorXd d = lu.solve(R);
    x -= d.head(m);
    u -= d.segment(m, m);
    lambda -= d(2 * m);
  }
  return out;
}

}  // namespace

FoldEvent locate_fold(const ContinuationProblem& p, const BranchPoint& a, const BranchPoint& b,
                      const ContinuationSettings& settings) {
  const Eigen::Index m = p.dimension();
  const int sa = sign_of(a.tangent(m)), sb = sign_of(b.tangent(m));
  if (sa == sb || sa == 0) throw Error(ErrorCode::NoSignChange, "bracket has no lambda turning");

  ContinuationSettings loose = settings;
  loose.min_cosine = -1.0;
  loose.max_first_correction = std::numeric_limits<double>::infinity();

  const double H = a.tangent.dot(join(b.x, b.lambda) - join(a.x, a.lambda));
  double lo = 0.0, hi = H;
  BranchPoint mid = b;
  for (int it = 0; it < 60 && hi - lo > 1e-12 * std::max(1.0, std::abs(H)); ++it) {
    double h = 0.5 * (lo + hi);
    BranchPoint q;
    try {
      q = corrector_step(p, a, h, loose).point;
    } catch (const Error&) {
      break;
    }
    mid = q;
    if (sign_of(q.tangent(m)) == sa)
      lo = h;
    else
      hi = h;
  }

  FoldEvent ev;
  ev.side = sa > 0 ? FoldSide::R : FoldSide::L;
  ev.s = mid.s;
  ev.x = mid.x;
  ev.lambda = mid.lambda;
  ev.kernel = mid.tangent.head(m).normalized();

  FoldSolve fs = moore_spence(p, mid.x, ev.kernel, mid.lambda, settings.tolerance);
  if (fs.ok && std::abs(fs.lambda - mid.lambda) < 1e-4 && (fs.x - mid.x).lpNorm<Eigen::Infinity>() < 1e-2) {
    ev.x = fs.x;
    ev.lambda = fs.lambda;
    ev.kernel = fs.u.normalized();
    ev.refined = true;
    ev.quadratic = true;
  }
  if (ev.kernel.dot(a.tangent.head(m)) < 0) ev.kernel = -ev.kernel;
  return ev;
}

Branch trace_branch(const ContinuationProblem& p, const BranchPoint& start, const ContinuationSettings& st) {
  const Eigen::Index m = p.dimension();
  Branch br;
  BranchPoint cur = start;
  if (cur.tangent.size() != m + 1) cur.tangent = make_branch_point(p, start.x, start.lambda, st.direction).tangent;
  br.points.push_back(cur);
  if (st.lambda_tilde && std::abs(cur.lambda - *st.lambda_tilde) <= 1e-12)
    br.crossings.push_back({cur.s, cur.lambda, cur.x, true});

  int sg0 = 0;
  {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bordered(p, cur.x, cur.lambda, cur.tangent));
    sg0 = det_sign(lu);
  }
  const Eigen::VectorXd z0 = join(start.x, start.lambda);

  auto record = [&](const BranchPoint& prev, const BranchPoint& next, bool allow_crossing) {
    const int s0 = sign_of(prev.tangent(m)), s1 = sign_of(next.tangent(m));
    if (s0 != 0 && s0 != s1) {
      FoldEvent ev;
      bool done = false;
      if (st.refine_folds) {
        try {
          ev = locate_fold(p, prev, next, st);
          done = true;
        } catch (const Error&) {
        }
      }
      if (!done) {
        const bool take_next = s0 > 0 ? next.lambda > prev.lambda : next.lambda < prev.lambda;
        const BranchPoint& q = take_next ? next : prev;
        ev.side = s0 > 0 ? FoldSide::R : FoldSide::L;
        ev.lambda = q.lambda;
        ev.x = q.x;
        ev.s = q.s;
        ev.kernel = q.tangent.head(m).normalized();
      }
      ev.after = br.points.size() - 1;
      br.folds.push_back(std::move(ev));
    }
    if (st.lambda_tilde && allow_crossing) {
      const double lt = *st.lambda_tilde;
      if ((prev.lambda - lt) * (next.lambda - lt) < 0) {
        const double a = (lt - prev.lambda) / (next.lambda - prev.lambda);
        Crossing c;
        c.s = prev.s + a * (next.s - prev.s);
        c.lambda = lt;
        Eigen::VectorXd y = (1 - a) * prev.x + a * next.x;
        try {
          c.x = solve_at_lambda(p, y, lt, st.tolerance);
          c.converged = true;
        } catch (const Error&) {
          c.x = y;
        }
        br.crossings.push_back(std::move(c));
      }
    }
  };

  double h = st.h_initial;
  int accepted = 0, streak = 0;
  const long attempt_limit = 8L * st.max_steps + 100;
  long attempts = 0;
  br.stop_reason = "step budget exhausted";
  while (accepted < st.max_steps && attempts++ < attempt_limit) {
    StepResult res;
    try {
      res = corrector_step(p, cur, h, st);
      if (st.orientation_guard && res.orientation != sg0)
        throw Error(ErrorCode::StepFailed, "orientation of the bordered Jacobian flipped");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::StepFailed) throw;
      ++br.rejected_steps;
      streak = 0;
      h *= 0.5;
      if (h < st.h_min) {
        br.stop_reason = "minimum step reached";
        break;
      }
      continue;
    }
    BranchPoint next = std::move(res.point);
    record(cur, next, true);
    br.points.push_back(next);
    cur = std::move(next);
    ++accepted;
    if (++streak >= 3) {
      h = std::min(1.3 * h, st.h_max);
      streak = 0;
    }
    if (cur.lambda < st.lambda_min || cur.lambda > st.lambda_max) {
      br.stop_reason = "left lambda window";
      break;
    }
    const Eigen::VectorXd zc = join(cur.x, cur.lambda);
    if (cur.s >= 10 * st.h_max && (zc - z0).norm() <= 2 * h) {
      const double delta = cur.tangent.dot(z0 - zc);
      try {
        ContinuationSettings loose = st;
        loose.max_first_correction = std::numeric_limits<double>::infinity();
        StepResult close = corrector_step(p, cur, delta, loose);
        if ((join(close.point.x, close.point.lambda) - z0).norm() <= st.closure_tolerance) {
          const bool at_start_level =
              st.lambda_tilde && std::abs(close.point.lambda - *st.lambda_tilde) < 1e-9;
          record(cur, close.point, !at_start_level);
          br.points.push_back(close.point);
          br.closed = true;
          br.stop_reason = "closed";
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::StepFailed) throw;
      }
    }
  }
  return br;
}

}  // namespace tangle
