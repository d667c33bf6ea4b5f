#ifndef TANGLE_MAP_HPP
#define TANGLE_MAP_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "tangle/errors.hpp"

namespace tangle {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kHyperbolicityMargin = 1e-6;
inline constexpr double kFiniteDifferenceStep = 1e-5;

// A smooth one-parameter family of diffeomorphisms of R^k.
template <typename Scalar>
class ParameterizedMap {
public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  virtual ~ParameterizedMap() = default;

  virtual int dimension() const = 0;
  virtual std::string name() const = 0;

  virtual Vector evaluate(const Vector& x, Scalar lambda) const = 0;
  virtual Matrix jacobian(const Vector& x, Scalar lambda) const = 0;
  virtual Vector dlambda(const Vector& x, Scalar lambda) const = 0;
  // f_xx(x,lambda)[u,v]
  virtual Vector second(const Vector& x, Scalar lambda, const Vector& u, const Vector& v) const = 0;
  // d/dlambda of f_x
  virtual Matrix jacobian_dlambda(const Vector& x, Scalar lambda) const = 0;

  virtual bool analytic_derivatives() const { return true; }

  // Maps with explicit fixed point formulas override this; the generic path uses Newton.
  virtual std::vector<Vector> closed_form_fixed_points(Scalar /*lambda*/) const { return {}; }
};

// f(x) = (1 + x2 - lambda x1^2, b x1)
template <typename Scalar>
class HenonMap : public ParameterizedMap<Scalar> {
public:
  using typename ParameterizedMap<Scalar>::Vector;
  using typename ParameterizedMap<Scalar>::Matrix;

  explicit HenonMap(Scalar b = Scalar(1.4)) : b_(b) {}

  Scalar b() const { return b_; }
  int dimension() const override { return 2; }
  std::string name() const override { return "henon"; }

  Vector evaluate(const Vector& x, Scalar lambda) const override {
    Vector y(2);
    y << Scalar(1) + x(1) - lambda * x(0) * x(0), b_ * x(0);
    return y;
  }
  Matrix jacobian(const Vector& x, Scalar lambda) const override {
    Matrix J(2, 2);
    J << -2 * lambda * x(0), 1, b_, 0;
    return J;
  }
  Vector dlambda(const Vector& x, Scalar) const override {
    Vector d(2);
    d << -x(0) * x(0), 0;
    return d;
  }
  Vector second(const Vector&, Scalar lambda, const Vector& u, const Vector& v) const override {
    Vector d(2);
    d << -2 * lambda * u(0) * v(0), 0;
    return d;
  }
  Matrix jacobian_dlambda(const Vector& x, Scalar) const override {
    Matrix J = Matrix::Zero(2, 2);
    J(0, 0) = -2 * x(0);
    return J;
  }

  // nu = ((b-1) +- sqrt((1-b)^2 + 4 lambda)) / (2 lambda), fixed point (nu, b nu)
  std::vector<Vector> closed_form_fixed_points(Scalar lambda) const override {
    using std::sqrt;
    using std::abs;
    if (lambda == Scalar(0)) throw Error(ErrorCode::InvalidArgument, "closed-form fixed points need lambda != 0");
    Scalar disc = (1 - b_) * (1 - b_) + 4 * lambda;
    // rounding can push a double root slightly negative
    const Scalar eps = 64 * std::numeric_limits<Scalar>::epsilon() * ((1 - b_) * (1 - b_) + 4 * abs(lambda));
    if (disc < -eps) throw Error(ErrorCode::Degenerate, "no real fixed points");
    if (disc < Scalar(0)) disc = Scalar(0);
    std::vector<Vector> out;
    for (int sgn : {1, -1}) {
      Scalar nu = ((b_ - 1) + sgn * sqrt(disc)) / (2 * lambda);
      Vector p(2);
      p << nu, b_ * nu;
      out.push_back(p);
    }
    return out;
  }

private:
  Scalar b_;
};

// f(x) = (1 + x2 - a x1^2, lambda x1); lambda is the Jacobian determinant up to sign.
template <typename Scalar>
class HenonShearMap : public ParameterizedMap<Scalar> {
public:
  using typename ParameterizedMap<Scalar>::Vector;
  using typename ParameterizedMap<Scalar>::Matrix;

  explicit HenonShearMap(Scalar a = Scalar(1.4)) : a_(a) {}

  Scalar a() const { return a_; }
  int dimension() const override { return 2; }
  std::string name() const override { return "henon-shear"; }

  Vector evaluate(const Vector& x, Scalar lambda) const override {
    Vector y(2);
    y << Scalar(1) + x(1) - a_ * x(0) * x(0), lambda * x(0);
    return y;
  }
  Matrix jacobian(const Vector& x, Scalar lambda) const override {
    Matrix J(2, 2);
    J << -2 * a_ * x(0), 1, lambda, 0;
    return J;
  }
  Vector dlambda(const Vector& x, Scalar) const override {
    Vector d(2);
    d << 0, x(0);
    return d;
  }
  Vector second(const Vector&, Scalar, const Vector& u, const Vector& v) const override {
    Vector d(2);
    d << -2 * a_ * u(0) * v(0), 0;
    return d;
  }
  Matrix jacobian_dlambda(const Vector&, Scalar) const override {
    Matrix J = Matrix::Zero(2, 2);
    J(1, 0) = 1;
    return J;
  }

  std::vector<Vector> closed_form_fixed_points(Scalar lambda) const override {
    using std::sqrt;
    using std::abs;
    if (a_ == Scalar(0)) throw Error(ErrorCode::InvalidArgument, "quadratic coefficient must be nonzero");
    Scalar disc = (1 - lambda) * (1 - lambda) + 4 * a_;
    const Scalar eps = 64 * std::numeric_limits<Scalar>::epsilon() * ((1 - lambda) * (1 - lambda) + 4 * abs(a_));
    if (disc < -eps) throw Error(ErrorCode::Degenerate, "no real fixed points");
    if (disc < Scalar(0)) disc = Scalar(0);
    std::vector<Vector> out;
    for (int sgn : {1, -1}) {
      Scalar nu = (-(1 - lambda) + sgn * sqrt(disc)) / (2 * a_);
      Vector p(2);
      p << nu, lambda * nu;
      out.push_back(p);
    }
    return out;
  }

private:
  Scalar a_;
};

// Wraps a bare evaluation function; every derivative comes from central differences.
template <typename Scalar>
class FiniteDifferenceMap : public ParameterizedMap<Scalar> {
public:
  using typename ParameterizedMap<Scalar>::Vector;
  using typename ParameterizedMap<Scalar>::Matrix;
  using Function = std::function<Vector(const Vector&, Scalar)>;

  FiniteDifferenceMap(int k, Function f, std::string name = "fd",
                      Scalar step = Scalar(kFiniteDifferenceStep))
      : k_(k), f_(std::move(f)), name_(std::move(name)), h_(step) {}

  int dimension() const override { return k_; }
  std::string name() const override { return name_; }
  bool analytic_derivatives() const override { return false; }

  Vector evaluate(const Vector& x, Scalar lambda) const override { return f_(x, lambda); }
  Matrix jacobian(const Vector& x, Scalar lambda) const override {
    Matrix J(k_, k_);
    for (int j = 0; j < k_; ++j) {
      Vector e = Vector::Zero(k_);
      e(j) = h_;
      J.col(j) = (f_(x + e, lambda) - f_(x - e, lambda)) / (2 * h_);
    }
    return J;
  }
  Vector dlambda(const Vector& x, Scalar lambda) const override {
    return (f_(x, lambda + h_) - f_(x, lambda - h_)) / (2 * h_);
  }
  Vector second(const Vector& x, Scalar lambda, const Vector& u, const Vector& v) const override {
    // polarization with a coarser step keeps the cancellation error near 1e-8
    Scalar h = 10 * h_;
    return (f_(x + h * (u + v), lambda) - f_(x + h * (u - v), lambda) - f_(x - h * (u - v), lambda) +
            f_(x - h * (u + v), lambda)) /
           (4 * h * h);
  }
  Matrix jacobian_dlambda(const Vector& x, Scalar lambda) const override {
    return (jacobian(x, lambda + h_) - jacobian(x, lambda - h_)) / (2 * h_);
  }

private:
  int k_;
  Function f_;
  std::string name_;
  Scalar h_;
};

template <typename Scalar>
struct FixedPointData {
  VectorX<Scalar> xi;
  Scalar lambda{};
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> eigenvalues;  // stable first, by modulus
  MatrixX<Scalar> basis;  // real invariant basis, columns ordered like eigenvalues
  int n_stable = 0;
  int n_unstable = 0;
  bool hyperbolic = false;
};

template <typename Scalar>
struct HyperbolicSplitting {
  MatrixX<Scalar> stable_basis;
  MatrixX<Scalar> unstable_basis;
  MatrixX<Scalar> P_s;
  MatrixX<Scalar> P_u;
  // B_s annihilates the unstable subspace, B_u annihilates the stable one.
  MatrixX<Scalar> B_s;
  MatrixX<Scalar> B_u;
};

template <typename Scalar>
VectorX<Scalar> evaluate(const ParameterizedMap<Scalar>& map, const VectorX<Scalar>& x, Scalar lambda) {
  VectorX<Scalar> y = map.evaluate(x, lambda);
  if (!y.allFinite()) throw Error(ErrorCode::InvalidArgument, "map evaluation left the finite domain");
  return y;
}

template <typename Scalar>
struct Derivatives {
  MatrixX<Scalar> f_x;
  VectorX<Scalar> f_lambda;
  // f_xx as a bilinear form: returns f_xx[u,v]
  std::function<VectorX<Scalar>(const VectorX<Scalar>&, const VectorX<Scalar>&)> f_xx;
};

template <typename Scalar>
Derivatives<Scalar> derivatives(const ParameterizedMap<Scalar>& map, const VectorX<Scalar>& x, Scalar lambda) {
  Derivatives<Scalar> d;
  d.f_x = map.jacobian(x, lambda);
  d.f_lambda = map.dlambda(x, lambda);
  d.f_xx = [&map, x, lambda](const VectorX<Scalar>& u, const VectorX<Scalar>& v) {
    return map.second(x, lambda, u, v);
  };
  return d;
}

namespace detail {

template <typename Scalar>
void orient(VectorX<Scalar>& v) {
  Eigen::Index i;
  v.cwiseAbs().maxCoeff(&i);
  if (v(i) < Scalar(0)) v = -v;
}

}  // namespace detail

// Eigen data of f_x at a fixed point; throws NotHyperbolic when an eigenvalue
// modulus falls within the margin of 1.
template <typename Scalar>
FixedPointData<Scalar> fixed_point_data(const ParameterizedMap<Scalar>& map, const VectorX<Scalar>& xi,
                                        Scalar lambda, Scalar margin = Scalar(kHyperbolicityMargin)) {
  using std::abs;
  const int k = map.dimension();
  FixedPointData<Scalar> fp;
  fp.xi = xi;
  fp.lambda = lambda;
  Eigen::EigenSolver<MatrixX<Scalar>> es(map.jacobian(xi, lambda));
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Degenerate, "eigen decomposition failed");
  auto ev = es.eigenvalues();
  auto V = es.eigenvectors();

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return abs(ev(a)) < abs(ev(b)); });

  fp.eigenvalues.resize(k);
  fp.basis.resize(k, k);
  fp.hyperbolic = true;
  for (int j = 0; j < k; ++j) {
    Scalar m = abs(ev(order[j]));
    if (abs(m - Scalar(1)) <= margin) fp.hyperbolic = false;
    if (m < Scalar(1)) ++fp.n_stable;
  }
  fp.n_unstable = k - fp.n_stable;

  for (int j = 0; j < k;) {
    int i = order[j];
    fp.eigenvalues(j) = ev(i);
    if (ev(i).imag() == Scalar(0)) {
      VectorX<Scalar> v = V.col(i).real();
      v.normalize();
      detail::orient(v);
      fp.basis.col(j) = v;
      ++j;
    } else {
      // complex pair: span the real invariant plane by real and imaginary parts
      VectorX<Scalar> re = V.col(i).real(), im = V.col(i).imag();
      fp.basis.col(j) = re;
      if (j + 1 < k) {
        fp.eigenvalues(j + 1) = std::conj(ev(i));
        fp.basis.col(j + 1) = im;
      }
      j += 2;
    }
  }
  if (!fp.hyperbolic) throw Error(ErrorCode::NotHyperbolic, "eigenvalue modulus within margin of 1");
  return fp;
}

template <typename Scalar>
VectorX<Scalar> refine_fixed_point(const ParameterizedMap<Scalar>& map, VectorX<Scalar> x, Scalar lambda,
                                   Scalar tol = Scalar(1e-13), int max_iter = 50) {
  const int k = map.dimension();
  for (int it = 0; it < max_iter; ++it) {
    VectorX<Scalar> r = map.evaluate(x, lambda) - x;
    if (!r.allFinite()) break;
    if (r.template lpNorm<Eigen::Infinity>() <= tol) return x;
    MatrixX<Scalar> A = map.jacobian(x, lambda) - MatrixX<Scalar>::Identity(k, k);
    x -= A.fullPivLu().solve(r);
  }
  VectorX<Scalar> r = map.evaluate(x, lambda) - x;
  if (r.allFinite() && r.template lpNorm<Eigen::Infinity>() <= 100 * tol) return x;
  throw Error(ErrorCode::NoConvergence, "fixed point Newton iteration");
}

// Closed-form branches when the map offers them, otherwise Newton from the seeds.
// Points that are not hyperbolic are still returned with hyperbolic = false.
template <typename Scalar>
std::vector<FixedPointData<Scalar>> fixed_points(const ParameterizedMap<Scalar>& map, Scalar lambda,
                                                 const std::vector<VectorX<Scalar>>& seeds = {}) {
  std::vector<VectorX<Scalar>> locs = map.closed_form_fixed_points(lambda);
  if (locs.empty()) {
    if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "generic maps need fixed point seeds");
    for (const auto& s : seeds) locs.push_back(refine_fixed_point(map, s, lambda));
  }
  std::vector<FixedPointData<Scalar>> out;
  for (const auto& p : locs) {
    try {
      out.push_back(fixed_point_data(map, p, lambda));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotHyperbolic) throw;
      FixedPointData<Scalar> fp;
      fp.xi = p;
      fp.lambda = lambda;
      fp.hyperbolic = false;
      out.push_back(fp);
    }
  }
  return out;
}

template <typename Scalar>
HyperbolicSplitting<Scalar> hyperbolic_splitting(const FixedPointData<Scalar>& fp) {
  if (!fp.hyperbolic) throw Error(ErrorCode::NotHyperbolic, "splitting requested at a non-hyperbolic point");
  const Eigen::Index k = fp.basis.rows();
  const int ns = fp.n_stable, nu = fp.n_unstable;
  HyperbolicSplitting<Scalar> s;
  MatrixX<Scalar> W = fp.basis.inverse();
  s.stable_basis = fp.basis.leftCols(ns);
  s.unstable_basis = fp.basis.rightCols(nu);
  s.B_s = W.topRows(ns);
  s.B_u = W.bottomRows(nu);
  s.P_s = s.stable_basis * s.B_s;
  s.P_u = s.unstable_basis * s.B_u;
  if (s.P_s.rows() == 0) s.P_s = MatrixX<Scalar>::Zero(k, k);
  if (s.P_u.rows() == 0) s.P_u = MatrixX<Scalar>::Zero(k, k);
  return s;
}

using Map = ParameterizedMap<double>;
using MapPtr = std::shared_ptr<const Map>;

// "henon" (parameter on the quadratic term) or "henon-shear" (parameter on the shear).
inline MapPtr make_map(const std::string& name, double a = 1.4, double b = 1.4) {
  if (name == "henon") return std::make_shared<HenonMap<double>>(b);
  if (name == "henon-shear") return std::make_shared<HenonShearMap<double>>(a);
  throw Error(ErrorCode::InvalidArgument, "unknown map '" + name + "'");
}

}  // namespace tangle

#endif
