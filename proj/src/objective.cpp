#include "mbdtraj/objective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbdtraj {

const char* ToString(PenaltySign sign) {
  return sign == PenaltySign::kDualAscent ? "dual_ascent" : "paper_literal";
}

PenaltySign PenaltySignFromString(const std::string& name) {
  if (name == "dual_ascent") return PenaltySign::kDualAscent;
  if (name == "paper_literal") return PenaltySign::kPaperLiteral;
  throw ValidationError("penalty_sign: expected dual_ascent or paper_literal, got '" + name + "'");
}

void ObjectiveConfig::Validate() const {
  if (!(epsilon >= 0.0)) throw ValidationError("objective: epsilon must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("objective: gamma must lie in (0,1)");
  if (!(lambda0 >= 0.0)) throw ValidationError("objective: lambda0 must be >= 0");
  if (!(orientation_weight >= 0.0)) {
    throw ValidationError("objective: orientation_weight must be >= 0");
  }
}

double MinTime(const JointTrajectory& traj, const Vector& v_limits) {
  if (v_limits.size() != traj.joints()) throw ShapeError("min_time: one velocity limit per joint");
  double total = 0.0;
  for (int i = 0; i + 1 < traj.samples(); ++i) {
    double segment = 0.0;
    for (int j = 0; j < traj.joints(); ++j) {
      segment = std::max(segment, std::abs(traj.q(i + 1, j) - traj.q(i, j)) / v_limits(j));
    }
    total += segment;
  }
  return total;
}

std::vector<SampleError> PathErrors(const JointTrajectory& traj, const ArmModel& arm1,
                                    const ArmModel& arm2, const DesiredPath& path) {
  if (traj.samples() != path.samples()) {
    throw ShapeError("path_errors: trajectory and desired path lengths differ");
  }
  std::vector<SampleError> errors(static_cast<std::size_t>(traj.samples()));
  for (int i = 0; i < traj.samples(); ++i) {
    const RelativePose actual = ComputeRelativePose(arm1, arm2, traj.q.row(i).transpose());
    const PoseResidual r = ComputePoseResidual(actual, path.poses[static_cast<std::size_t>(i)]);
    errors[static_cast<std::size_t>(i)] = {r.translation.norm(), r.rotation.norm()};
  }
  return errors;
}

double CartesianError(const JointTrajectory& traj, const ArmModel& arm1, const ArmModel& arm2,
                      const DesiredPath& path, double orientation_weight) {
  double worst = 0.0;
  for (const SampleError& e : PathErrors(traj, arm1, arm2, path)) {
    worst = std::max(worst, e.translation + orientation_weight * e.rotation);
  }
  return worst;
}

Evaluation Combine(double V, double E, double lambda, const ObjectiveConfig& cfg) {
  return {V, E, V + lambda * (E - cfg.epsilon), E <= cfg.epsilon};
}

double UpdatePenalty(double lambda, double E, const ObjectiveConfig& cfg) {
  const double violation = E - cfg.epsilon;
  const double next = cfg.penalty_sign == PenaltySign::kDualAscent ? lambda + cfg.gamma * violation
                                                                   : lambda - cfg.gamma * violation;
  return std::max(0.0, next);
}

Vector TrackingProblem::JointLimits() const {
  Vector limits(joints());
  limits << arm1.joint_limits, arm2.joint_limits;
  return limits;
}

Vector TrackingProblem::VelocityLimits() const {
  Vector limits(joints());
  limits << arm1.velocity_limits, arm2.velocity_limits;
  return limits;
}

void TrackingProblem::Validate() const {
  arm1.Validate();
  arm2.Validate();
  basis.Validate();
  objective.Validate();
  if (joints() < 1) throw ValidationError("problem: the two arms need at least one joint in total");
  if (path.samples() != basis.samples()) {
    std::ostringstream msg;
    msg << "path length: desired path has " << path.samples() << " poses, expected N+1 = "
        << basis.samples();
    throw ValidationError(msg.str());
  }
}

Evaluation AdaptiveCost(const CoefficientVector& theta, double lambda,
                        const TrackingProblem& problem) {
  const JointTrajectory traj = ReconstructTrajectory(theta, problem.basis);
  const double v = MinTime(traj, problem.VelocityLimits());
  const double e = CartesianError(traj, problem.arm1, problem.arm2, problem.path,
                                  problem.objective.orientation_weight);
  return Combine(v, e, lambda, problem.objective);
}

TrajectoryObjective::TrajectoryObjective(TrackingProblem problem, ExplorationBounds bounds)
    : problem_(std::move(problem)),
      bounds_(std::move(bounds)),
      basis_(BasisMatrix(problem_.basis)),
      v_limits_(problem_.VelocityLimits()) {
  if (bounds_.theta0.joints() != problem_.joints() || bounds_.theta0.terms() != problem_.basis.d) {
    throw ShapeError("trajectory objective: bounds shape does not match the problem");
  }
}

Evaluation TrajectoryObjective::Evaluate(const Eigen::Ref<const Vector>& y, double lambda) const {
  const JointTrajectory traj = ReconstructTrajectory(MapLatent(y, bounds_), basis_);
  const double v = MinTime(traj, v_limits_);
  const double e = CartesianError(traj, problem_.arm1, problem_.arm2, problem_.path,
                                  problem_.objective.orientation_weight);
  return Combine(v, e, lambda, problem_.objective);
}

}  // namespace mbdtraj
