#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sattrack/geometry.hpp"
#include "sattrack/match.hpp"

namespace sattrack {

enum class RobustLoss { Huber, Tukey };

struct RefineConfig {
  RobustLoss loss = RobustLoss::Huber;
  double loss_param = 2.0;  ///< Huber delta or Tukey c, pixels
  int max_iterations = 10;
  double step_tolerance = 1e-8;  ///< stop once ||delta|| falls below
  double damping = 1e-3;         ///< initial Levenberg lambda

  static RefineConfig huber(double delta = 2.0) { return {RobustLoss::Huber, delta}; }
  static RefineConfig tukey(double c = 4.685) { return {RobustLoss::Tukey, c}; }
  void validate() const;
};

struct RefineReport {
  int iterations = 0;
  double cost = 0;             ///< final robust cost
  double inlier_fraction = 0;  ///< share of weights above half the largest
  bool converged = false;      ///< stopped on step tolerance
  std::vector<double> cost_history;  ///< cost before the first and after every accepted step
};

/// A model point that should project onto the line through `image_px`
/// perpendicular to `normal`.
struct EdgeConstraint {
  Eigen::Vector3d model_point;
  Eigen::Vector2d image_px;
  Eigen::Vector2d normal;
};

/// Back-projects `corr.model_px` at its depth (Euclidean distance along the
/// pixel ray) through `render_pose`. Empty when the depth is not finite.
std::optional<EdgeConstraint> make_constraint(const Correspondence& corr, const Pose& render_pose,
                                              const CameraModel& cam);

struct ResidualJacobian {
  double r = 0;
  Eigen::Matrix<double, 1, 6> J;  ///< d r / d (omega, nu) of a left twist update
};

/// r = dot(pi(pose * model_point) - image_px, normal).
ResidualJacobian residual_and_jacobian(const EdgeConstraint& c, const Pose& pose, const CameraModel& cam);
/// Back-projects through `pose` and evaluates there; empty for non-finite depth.
std::optional<ResidualJacobian> residual_and_jacobian(const Correspondence& corr, const Pose& pose,
                                                      const CameraModel& cam);

/// IRLS weight and cost for a residual already divided by the loss scale.
double robust_weight(RobustLoss loss, double param, double u);
double robust_cost(RobustLoss loss, double param, double u);

/// Solves (J^T W J + lambda I) delta = -J^T W r by Cholesky, summing in
/// input order. Throws DegenerateGeometryError when J^T W J is rank deficient.
Vector6d weighted_gauss_newton_step(std::span<const ResidualJacobian> rows, std::span<const double> weights,
                                    double lambda);

/// Levenberg-damped IRLS. Needs at least six constraints.
Pose refine_pose(const Pose& pose, std::span<const EdgeConstraint> constraints, const CameraModel& cam,
                 const RefineConfig& cfg, RefineReport* report = nullptr);
/// Builds constraints at `pose` (skipping non-finite depths) and refines.
Pose refine_pose(const Pose& pose, const CorrespondenceSet& corrs, const CameraModel& cam, const RefineConfig& cfg,
                 RefineReport* report = nullptr);

}  // namespace sattrack
