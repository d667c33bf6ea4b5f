#ifndef TANGLE_CONTINUATION_HPP
#define TANGLE_CONTINUATION_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tangle/errors.hpp"
#include "tangle/problem.hpp"

namespace tangle {

struct BranchPoint {
  Eigen::VectorXd x;
  double lambda = 0.0;
  double amplitude = 0.0;
  double s = 0.0;           // arclength coordinate
  Eigen::VectorXd tangent;  // unit vector in R^{m+1}, lambda last
};

enum class FoldSide { L, R };
inline char side_char(FoldSide s) { return s == FoldSide::R ? 'R' : 'L'; }

struct FoldEvent {
  double lambda = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd kernel;  // unit null vector of F_x at the fold
  FoldSide side = FoldSide::R;
  double s = 0.0;
  std::size_t after = 0;   // index of the branch point preceding the fold
  bool refined = false;    // augmented system solved
  bool quadratic = false;  // augmented Jacobian regular at the solution
};

struct Crossing {
  double s = 0.0;
  double lambda = 0.0;
  Eigen::VectorXd x;
  bool converged = false;
};

struct Branch {
  std::vector<BranchPoint> points;
  std::vector<FoldEvent> folds;
  std::vector<Crossing> crossings;
  bool closed = false;
  int rejected_steps = 0;
  std::string stop_reason;
};

struct ContinuationSettings {
  double h_initial = 0.01;
  double h_min = 1e-7;
  double h_max = 0.05;
  double tolerance = 1e-10;
  int corrector_iterations = 8;
  double lambda_min = -std::numeric_limits<double>::infinity();
  double lambda_max = std::numeric_limits<double>::infinity();
  int max_steps = 20000;
  double closure_tolerance = 1e-6;
  std::optional<double> lambda_tilde;
  // Step acceptance guards: tangent turning, size of the first Newton correction
  // relative to h, and the orientation of the bordered Jacobian.
  double min_cosine = 0.99;
  double max_first_correction = 0.5;
  bool orientation_guard = true;
  bool refine_folds = true;
  int direction = 1;  // sign of the initial lambda component of the tangent
};

// Unit kernel vector of [F_x | F_lambda]. With a previous tangent the bordered
// system is solved and the result oriented along it.
Eigen::VectorXd branch_tangent(const ContinuationProblem& p, const Eigen::VectorXd& x, double lambda,
                               const Eigen::VectorXd* previous = nullptr);
Eigen::VectorXd branch_tangent(const ContinuationProblem& p, const BranchPoint& point);

struct StepResult {
  BranchPoint point;
  int orientation = 0;  // sign of det [[F_x, F_lambda], [t^T]] at the new point
  double first_correction = 0.0;
};

// Predictor along the tangent, Newton corrector on the orthogonal hyperplane.
// Throws StepFailed when the corrector fails or a guard rejects the step.
StepResult corrector_step(const ContinuationProblem& p, const BranchPoint& point, double h,
                          const ContinuationSettings& settings = {});
BranchPoint predictor_corrector_step(const ContinuationProblem& p, const BranchPoint& point, double h,
                                     const ContinuationSettings& settings = {});

BranchPoint make_branch_point(const ContinuationProblem& p, const Eigen::VectorXd& x, double lambda,
                              int direction = 1);

Branch trace_branch(const ContinuationProblem& p, const BranchPoint& start, const ContinuationSettings& settings);

// Bisection in the pseudo-arclength parameter, then the augmented system
// {F = 0, F_x u = 0, |u|^2 = 1}.
FoldEvent locate_fold(const ContinuationProblem& p, const BranchPoint& a, const BranchPoint& b,
                      const ContinuationSettings& settings = {});

// Newton at frozen lambda.
Eigen::VectorXd solve_at_lambda(const ContinuationProblem& p, Eigen::VectorXd x, double lambda,
                                double tolerance = 1e-10, int max_iterations = 20);

}  // namespace tangle

#endif
