#ifndef TANGLE_PROBLEM_HPP
#define TANGLE_PROBLEM_HPP

#include <Eigen/Dense>

namespace tangle {

// A square nonlinear system F(x, lambda) = 0 with x in R^m.
class ContinuationProblem {
public:
  virtual ~ContinuationProblem() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual Eigen::VectorXd residual(const Eigen::VectorXd& x, double lambda) const = 0;
  virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double lambda) const = 0;
  virtual Eigen::VectorXd dlambda(const Eigen::VectorXd& x, double lambda) const = 0;

  // M with M v = D_x(F_x(x) u) v. Default: central differences of the Jacobian.
  virtual Eigen::MatrixXd jacobian_directional(const Eigen::VectorXd& x, double lambda,
                                               const Eigen::VectorXd& u) const;
  // d/dlambda (F_x(x) u). Default: central differences.
  virtual Eigen::VectorXd jacobian_dlambda(const Eigen::VectorXd& x, double lambda,
                                           const Eigen::VectorXd& u) const;

  // Scalar used for plotting branches.
  virtual double amplitude(const Eigen::VectorXd& x, double /*lambda*/) const { return x.norm(); }
};

}  // namespace tangle

#endif
