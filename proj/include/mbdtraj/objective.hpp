#pragma once

// Cost terms for the outer trajectory problem.
//
//   V(theta)  minimum traversal time of the reconstructed joint path under
//             per-joint velocity limits, constant joint rates per segment.
//   E(theta)  worst-case (L-infinity over path samples) relative pose error,
//             ||dp|| + w_rot * ||log(dR)||.
//   R         V + lambda * (E - epsilon), with lambda >= 0 adapted between
//             reverse diffusion steps.

#include <functional>
#include <vector>

#include "mbdtraj/common.hpp"
#include "mbdtraj/kinematics.hpp"
#include "mbdtraj/trajectory_param.hpp"

namespace mbdtraj {

enum class PenaltySign {
  kDualAscent,    // lambda' = max(0, lambda + gamma (E - eps))
  kPaperLiteral,  // lambda' = max(0, lambda - gamma (E - eps))
};

const char* ToString(PenaltySign sign);
PenaltySign PenaltySignFromString(const std::string& name);

struct ObjectiveConfig {
  double epsilon = 1e-2;
  double gamma = 0.1;
  double lambda0 = 1.0;
  double orientation_weight = 1.0;  // meters per radian
  PenaltySign penalty_sign = PenaltySign::kDualAscent;

  void Validate() const;
};

struct Evaluation {
  double V = 0.0;
  double E = 0.0;
  double R = 0.0;
  bool feasible = false;
};

// Sum over segments of max_j |q_{i+1,j} - q_{i,j}| / vbar_j.
double MinTime(const JointTrajectory& traj, const Vector& v_limits);

struct SampleError {
  double translation = 0.0;  // meters
  double rotation = 0.0;     // radians
};

std::vector<SampleError> PathErrors(const JointTrajectory& traj, const ArmModel& arm1,
                                    const ArmModel& arm2, const DesiredPath& path);

double CartesianError(const JointTrajectory& traj, const ArmModel& arm1, const ArmModel& arm2,
                      const DesiredPath& path, double orientation_weight);

// Assembles R = V + lambda (E - eps) and the feasibility flag.
Evaluation Combine(double V, double E, double lambda, const ObjectiveConfig& cfg);

double UpdatePenalty(double lambda, double E, const ObjectiveConfig& cfg);

// Everything needed to score a coefficient vector.
struct TrackingProblem {
  ArmModel arm1;
  ArmModel arm2;
  BasisConfig basis;
  DesiredPath path;
  ObjectiveConfig objective;

  int joints() const { return arm1.dof() + arm2.dof(); }
  Vector JointLimits() const;
  Vector VelocityLimits() const;
  void Validate() const;
};

Evaluation AdaptiveCost(const CoefficientVector& theta, double lambda,
                        const TrackingProblem& problem);

// A cost over the latent box, evaluated concurrently by the batch kernels.
// Implementations must be safe to call from many threads at once.
class LatentObjective {
 public:
  virtual ~LatentObjective() = default;
  virtual int dim() const = 0;
  virtual const ObjectiveConfig& config() const = 0;
  virtual Evaluation Evaluate(const Eigen::Ref<const Vector>& y, double lambda) const = 0;
};

// The trajectory problem seen through theta(y) = theta0 + sigma o y.
class TrajectoryObjective final : public LatentObjective {
 public:
  TrajectoryObjective(TrackingProblem problem, ExplorationBounds bounds);

  int dim() const override { return bounds_.latent_dim(); }
  const ObjectiveConfig& config() const override { return problem_.objective; }
  Evaluation Evaluate(const Eigen::Ref<const Vector>& y, double lambda) const override;

  const TrackingProblem& problem() const { return problem_; }
  const ExplorationBounds& bounds() const { return bounds_; }

 private:
  TrackingProblem problem_;
  ExplorationBounds bounds_;
  Matrix basis_;
  Vector v_limits_;
};

// Adapter for analytic test costs: fn(y) returns {V, E}.
class CallableObjective final : public LatentObjective {
 public:
  using Fn = std::function<std::pair<double, double>(const Vector&)>;
  CallableObjective(int dim, ObjectiveConfig cfg, Fn fn)
      : dim_(dim), cfg_(cfg), fn_(std::move(fn)) {}

  int dim() const override { return dim_; }
  const ObjectiveConfig& config() const override { return cfg_; }
  Evaluation Evaluate(const Eigen::Ref<const Vector>& y, double lambda) const override {
    const auto [v, e] = fn_(Vector(y));
    return Combine(v, e, lambda, cfg_);
  }

 private:
  int dim_;
  ObjectiveConfig cfg_;
  Fn fn_;
};

}  // namespace mbdtraj
