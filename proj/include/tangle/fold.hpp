#ifndef TANGLE_FOLD_HPP
#define TANGLE_FOLD_HPP

#include <limits>
#include <vector>

#include "tangle/continuation.hpp"
#include "tangle/orbit.hpp"

namespace tangle {

struct TangencyData {
  double lambda_bar = 0.0;
  OrbitSegment orbit;
  Eigen::MatrixXd u;  // k x N, kernel of the variational equation on J
  Eigen::MatrixXd w;  // k x (N-1), column i pairs with the equation x_{i+1} = f(x_i)
  double c_lambda = std::numeric_limits<double>::quiet_NaN();
  double c_x = std::numeric_limits<double>::quiet_NaN();
  double sigma_min = 0.0;
  double sigma_second = 0.0;
  Eigen::VectorXd w_full;  // left singular vector including the boundary rows

  double sv_gap() const { return sigma_second / sigma_min; }
  double ratio() const { return c_x / c_lambda; }
};

struct KernelSettings {
  double max_small = 1e-6;    // smallest singular value must be below this
  double min_second = 1e-2;   // and the next one above this
};

// Singular vectors of D_x Gamma_J at the fold. u is the right vector; w is the
// left vector restricted to the interior equations and renormalized.
// u follows the orientation of fold.kernel, w is chosen so that c_lambda > 0.
TangencyData kernel_and_adjoint(const HomoclinicBVP& bvp, const FoldEvent& fold, const KernelSettings& ks = {});

// c_lambda = <w, f_lambda(x_n)>, c_x = 1/2 <w, f_xx(x_n) u_n^2>; stores them in data.
std::pair<double, double> tangency_constants(const HomoclinicBVP& bvp, TangencyData& data);

// max_n |u_{n+1} - f_x(x_n) u_n| and max_n |w_{n-1} - f_x(x_n)^T w_n|
double variational_residual(const HomoclinicBVP& bvp, const TangencyData& data);
double adjoint_residual(const HomoclinicBVP& bvp, const TangencyData& data);

struct FitReport {
  double slope = 0.0;
  double predicted = 0.0;  // -c_x / c_lambda
  double deviation = 0.0;  // relative
  double r2 = 0.0;
  int points = 0;
  double tau_max = 0.0;
};

// Least-squares fit of lambda - lambda_bar = a tau^2 over points with |tau| <= tau_max,
// tau = <u, x - x_bar>.
FitReport quadratic_fit_check(const std::vector<BranchPoint>& points, const TangencyData& data, double tau_max,
                              int min_points = 8);

// The same fold on another window: the fold orbit is padded with xi (kernel with 0),
// bracketed by two corrector steps and located again.
FoldEvent relocate_fold(const HomoclinicBVP& target, const HomoclinicBVP& source, const FoldEvent& fold,
                        double h = 1e-3);

// Branch points through the fold with |tau| up to tau_max on both sides.
std::vector<BranchPoint> sample_near_fold(const ContinuationProblem& p, const FoldEvent& fold, double tau_max,
                                          int per_side = 12, double tolerance = 1e-11);

}  // namespace tangle

#endif
