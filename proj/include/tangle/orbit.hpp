#ifndef TANGLE_ORBIT_HPP
#define TANGLE_ORBIT_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tangle/map.hpp"
#include "tangle/problem.hpp"

namespace tangle {

enum class BoundaryKind { Periodic, Projection };

std::string to_string(BoundaryKind bc);
BoundaryKind boundary_from_string(const std::string& s);

// Finite orbit x_n, n in [n_minus, n_plus]; column j of points holds x_{n_minus + j}.
struct OrbitSegment {
  int n_minus = 0;
  int n_plus = 0;
  Eigen::MatrixXd points;
  double lambda = 0.0;
  BoundaryKind bc = BoundaryKind::Projection;
  double residual = std::numeric_limits<double>::quiet_NaN();

  int dim() const { return static_cast<int>(points.rows()); }
  int length() const { return n_plus - n_minus + 1; }
  Eigen::VectorXd point(int n) const { return points.col(n - n_minus); }
  // (x_{n_minus}, ..., x_{n_plus}) flattened point by point
  Eigen::VectorXd stacked() const;
  static OrbitSegment from_stacked(const Eigen::VectorXd& x, int k, int n_minus, double lambda,
                                   BoundaryKind bc = BoundaryKind::Projection);
};

struct NewtonSettings {
  double tolerance = 1e-10;
  int max_iterations = 30;
  std::optional<double> damping;  // backtracking factor on residual increase
};

struct NewtonResult {
  OrbitSegment orbit;
  std::vector<double> history;  // sup-norm residual before each step, last entry final
};

// The boundary value operator Gamma_J for one window and one boundary condition.
// The fixed point xi(lambda) is tracked from a reference location.
class HomoclinicBVP : public ContinuationProblem {
public:
  HomoclinicBVP(MapPtr map, Eigen::VectorXd xi_ref, int n_minus, int n_plus,
                BoundaryKind bc = BoundaryKind::Projection);

  const Map& map() const { return *map_; }
  MapPtr map_ptr() const { return map_; }
  int n_minus() const { return n_minus_; }
  int n_plus() const { return n_plus_; }
  int length() const { return n_plus_ - n_minus_ + 1; }
  int k() const { return k_; }
  BoundaryKind bc() const { return bc_; }
  const Eigen::VectorXd& xi_reference() const { return xi_ref_; }

  Eigen::VectorXd fixed_point(double lambda) const;
  FixedPointData<double> fixed_point_data(double lambda) const;
  HyperbolicSplitting<double> splitting(double lambda) const;

  Eigen::Index dimension() const override { return static_cast<Eigen::Index>(k_) * length(); }
  Eigen::VectorXd residual(const Eigen::VectorXd& x, double lambda) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double lambda) const override;
  Eigen::VectorXd dlambda(const Eigen::VectorXd& x, double lambda) const override;
  Eigen::MatrixXd jacobian_directional(const Eigen::VectorXd& x, double lambda,
                                       const Eigen::VectorXd& u) const override;
  Eigen::VectorXd jacobian_dlambda(const Eigen::VectorXd& x, double lambda,
                                   const Eigen::VectorXd& u) const override;
  double amplitude(const Eigen::VectorXd& x, double lambda) const override;

  // Rows acting on the endpoints; only these depend on the splitting.
  Eigen::VectorXd boundary_rows(const Eigen::VectorXd& x, double lambda) const;

  OrbitSegment segment(const Eigen::VectorXd& x, double lambda) const;
  HomoclinicBVP with_window(int n_minus, int n_plus) const;
  HomoclinicBVP with_bc(BoundaryKind bc) const;

private:
  MapPtr map_;
  Eigen::VectorXd xi_ref_;
  int n_minus_, n_plus_, k_;
  BoundaryKind bc_;
};

Eigen::VectorXd gamma_residual(const HomoclinicBVP& bvp, const OrbitSegment& orbit);

NewtonResult newton_solve(const HomoclinicBVP& bvp, const OrbitSegment& seed, const NewtonSettings& settings = {});

// (sum_n |x_n - xi|^2)^(1/2)
double amplitude(const OrbitSegment& orbit, const Eigen::VectorXd& xi);

// Both endpoints within the threshold of xi.
bool tails_decay(const OrbitSegment& orbit, const Eigen::VectorXd& xi, double threshold = 1e-2);

// Sup-norm distance over the common index range after shifting b by `shift`.
double sup_distance(const OrbitSegment& a, const OrbitSegment& b, int shift = 0);

struct SeedSettings {
  double t0 = 1e-4;            // offset along the unstable eigenvector
  int samples = 400001;        // fundamental domain resolution
  int max_iterates = 30;
  double near = 0.3;           // crossing must happen this close to xi
  double min_amplitude = 1e-3;
  double distinct = 1e-4;      // sup-norm separation for distinct orbits
  NewtonSettings newton{1e-12, 60, 0.5};
};

// Intersections of the unstable manifold with the stable eigenline, refined into
// homoclinic orbits on [n_minus, n_plus]. Returns the first `count` distinct ones
// ordered by return time, then by position in the fundamental domain.
std::vector<OrbitSegment> seed_homoclinic(const HomoclinicBVP& bvp, double lambda, int count = 1,
                                          const SeedSettings& settings = {});

// Moves an orbit to another window (pads with xi, trims otherwise) and re-solves.
OrbitSegment rewindow(const HomoclinicBVP& target, const OrbitSegment& orbit,
                      const NewtonSettings& settings = {1e-12, 40, 0.5});

}  // namespace tangle

#endif
