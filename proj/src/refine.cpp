#include "sattrack/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sattrack/errors.hpp"

namespace sattrack {

void RefineConfig::validate() const {
  if (!(loss_param > 0.0)) throw ArgumentError("robust loss parameter must be positive");
  if (max_iterations < 1) throw ArgumentError("max_iterations must be at least 1");
  if (!(step_tolerance >= 0.0)) throw ArgumentError("step_tolerance must be non-negative");
  if (!(damping >= 0.0)) throw ArgumentError("damping must be non-negative");
}

std::optional<EdgeConstraint> make_constraint(const Correspondence& corr, const Pose& render_pose,
                                              const CameraModel& cam) {
  if (!std::isfinite(corr.depth) || !(corr.depth > 0)) return std::nullopt;
  const Eigen::Vector3d ray = cam.ray(corr.model_px.x(), corr.model_px.y());
  return EdgeConstraint{render_pose.inverse_apply(corr.depth * ray.normalized()), corr.image_px.cast<double>(),
                        corr.normal};
}

ResidualJacobian residual_and_jacobian(const EdgeConstraint& c, const Pose& pose, const CameraModel& cam) {
  const Eigen::Vector3d rp = pose.orientation() * c.model_point;
  const Eigen::Vector3d X = rp + pose.location();
  const double iz = 1.0 / X.z();
  const Eigen::Vector2d proj(cam.fx * X.x() * iz + cam.cx, cam.fy * X.y() * iz + cam.cy);

  // n^T * d(pi)/dX
  Eigen::RowVector3d nd;
  nd << c.normal.x() * cam.fx * iz, c.normal.y() * cam.fy * iz,
      -(c.normal.x() * cam.fx * X.x() + c.normal.y() * cam.fy * X.y()) * iz * iz;

  ResidualJacobian out;
  out.r = (proj - c.image_px).dot(c.normal);
  // dX/domega = -[R P]x, dX/dnu = I
  out.J.head<3>() = rp.cross(nd.transpose()).transpose();
  out.J.tail<3>() = nd;
  return out;
}

std::optional<ResidualJacobian> residual_and_jacobian(const Correspondence& corr, const Pose& pose,
                                                      const CameraModel& cam) {
  const auto c = make_constraint(corr, pose, cam);
  if (!c) return std::nullopt;
  return residual_and_jacobian(*c, pose, cam);
}

double robust_weight(RobustLoss loss, double param, double u) {
  const double a = std::abs(u);
  if (loss == RobustLoss::Huber) return a <= param ? 1.0 : param / a;
  if (a >= param) return 0.0;
  const double t = 1.0 - (u / param) * (u / param);
  return t * t;
}

double robust_cost(RobustLoss loss, double param, double u) {
  const double a = std::abs(u);
  if (loss == RobustLoss::Huber) return a <= param ? 0.5 * u * u : param * (a - 0.5 * param);
  const double cap = param * param / 6.0;
  if (a >= param) return cap;
  const double t = 1.0 - (u / param) * (u / param);
  return cap * (1.0 - t * t * t);
}

Vector6d weighted_gauss_newton_step(std::span<const ResidualJacobian> rows, std::span<const double> weights,
                                    double lambda) {
  if (rows.size() != weights.size()) throw ArgumentError("one weight per residual required");
  Matrix6d H = Matrix6d::Zero();
  Vector6d g = Vector6d::Zero();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    H.noalias() += weights[i] * rows[i].J.transpose() * rows[i].J;
    g.noalias() += weights[i] * rows[i].r * rows[i].J.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Matrix6d> eig(H, Eigen::EigenvaluesOnly);
  const double hi = eig.eigenvalues().maxCoeff(), lo = eig.eigenvalues().minCoeff();
  if (!(hi > 0.0) || lo <= 1e-12 * hi) throw DegenerateGeometryError("normal equations are rank deficient");
  H.diagonal().array() += lambda;
  const Eigen::LLT<Matrix6d> llt(H);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky factorisation failed");
  const Vector6d delta = llt.solve(-g);
  if (!delta.allFinite()) throw NumericalError("non-finite pose update");
  return delta;
}

namespace {

double median_abs_deviation(std::vector<double> r) {
  const auto mid = r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2);
  std::nth_element(r.begin(), mid, r.end());
  const double med = *mid;
  for (double& v : r) v = std::abs(v - med);
  std::nth_element(r.begin(), mid, r.end());
  return *mid;
}

struct Evaluation {
  std::vector<ResidualJacobian> rows;
  double cost = 0;
};

Evaluation evaluate(std::span<const EdgeConstraint> cs, const Pose& pose, const CameraModel& cam,
                    const RefineConfig& cfg, double scale) {
  Evaluation e;
  e.rows.reserve(cs.size());
  for (const auto& c : cs) {
    e.rows.push_back(residual_and_jacobian(c, pose, cam));
    e.cost += scale * scale * robust_cost(cfg.loss, cfg.loss_param, e.rows.back().r / scale);
  }
  return e;
}

double rescale(const Evaluation& e, double scale) {
  std::vector<double> r;
  r.reserve(e.rows.size());
  for (const auto& row : e.rows) r.push_back(row.r);
  return std::min(scale, std::max(1.0, 1.4826 * median_abs_deviation(std::move(r))));
}

double rescored_cost(const Evaluation& e, const RefineConfig& cfg, double scale) {
  double cost = 0;
  for (const auto& row : e.rows) cost += scale * scale * robust_cost(cfg.loss, cfg.loss_param, row.r / scale);
  return cost;
}

}  // namespace

Pose refine_pose(const Pose& initial, std::span<const EdgeConstraint> constraints, const CameraModel& cam,
                 const RefineConfig& cfg, RefineReport* report) {
  cfg.validate();
  if (constraints.size() < 6)
    throw DegenerateGeometryError("pose refinement needs at least 6 correspondences, got " +
                                  std::to_string(constraints.size()));
  // Tukey works on residuals in units of a robust scale that starts at the
  // spread of the initial residuals and only ever shrinks towards one pixel,
  // so c is in pixels once the fit has converged. Huber uses raw pixels.
  const bool scaled = cfg.loss == RobustLoss::Tukey;
  double scale = scaled ? std::numeric_limits<double>::infinity() : 1.0;
  double lambda = cfg.damping;

  Pose pose = initial;
  Evaluation cur = evaluate(constraints, pose, cam, cfg, 1.0);
  if (scaled) {
    scale = rescale(cur, scale);
    cur.cost = rescored_cost(cur, cfg, scale);
  }
  RefineReport rep;
  rep.cost_history.push_back(cur.cost);
  std::vector<double> w(constraints.size());

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (!std::isfinite(cur.cost)) throw NumericalError("robust cost is not finite");
    rep.iterations = it;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = robust_weight(cfg.loss, cfg.loss_param, cur.rows[i].r / scale);

    bool accepted = false;
    while (!accepted) {
      const Vector6d delta = weighted_gauss_newton_step(cur.rows, w, lambda);
      if (delta.norm() < cfg.step_tolerance) {
        rep.converged = true;
        break;
      }
      const Pose candidate = pose.updated(delta);
      Evaluation next = evaluate(constraints, candidate, cam, cfg, scale);
      if (std::isfinite(next.cost) && next.cost <= cur.cost) {
        pose = candidate;
        cur = std::move(next);
        lambda /= 10;
        rep.cost_history.push_back(cur.cost);
        accepted = true;
      } else {
        lambda = std::max(lambda * 10, 1e-9);
        if (lambda > 1e12) break;  // no descent direction left
      }
    }
    if (!accepted) break;
    if (scaled) {
      scale = rescale(cur, scale);
      cur.cost = rescored_cost(cur, cfg, scale);
    }
  }

  double w_max = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = robust_weight(cfg.loss, cfg.loss_param, cur.rows[i].r / scale);
    w_max = std::max(w_max, w[i]);
  }
  const auto inliers = std::count_if(w.begin(), w.end(), [&](double v) { return v > 0.5 * w_max; });
  rep.inlier_fraction = w_max > 0 ? static_cast<double>(inliers) / static_cast<double>(w.size()) : 0.0;
  rep.cost = cur.cost;
  if (report) *report = std::move(rep);
  return pose;
}

Pose refine_pose(const Pose& pose, const CorrespondenceSet& corrs, const CameraModel& cam, const RefineConfig& cfg,
                 RefineReport* report) {
  std::vector<EdgeConstraint> cs;
  cs.reserve(corrs.size());
  for (const auto& c : corrs.items)
    if (auto e = make_constraint(c, pose, cam)) cs.push_back(*e);
  return refine_pose(pose, cs, cam, cfg, report);
}

}  // namespace sattrack
