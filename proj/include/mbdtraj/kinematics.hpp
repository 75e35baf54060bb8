#pragma once

// Serial-chain kinematics for a pair of revolute arms.
//
// An arm is base * (link_1 * Rot(axis_1, q_1)) * ... * (link_m * Rot(axis_m, q_m)) * tool.
// The quantity tracked along the path is the relative pose of the arm-2
// end-effector expressed in the arm-1 end-effector frame, inv(FK_1) * FK_2.

#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "mbdtraj/common.hpp"
#include "mbdtraj/trajectory_param.hpp"

namespace mbdtraj {

using Pose = Eigen::Isometry3d;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

struct RevoluteJoint {
  Pose link = Pose::Identity();  // fixed transform from the previous frame to this joint
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // unit axis in the joint frame
};

struct ArmModel {
  std::string name;
  Pose base = Pose::Identity();
  std::vector<RevoluteJoint> joints;
  Pose tool = Pose::Identity();
  Vector joint_limits;     // qbar, rad
  Vector velocity_limits;  // vbar, rad/s

  int dof() const { return static_cast<int>(joints.size()); }
  // Throws ValidationError naming the arm, joint and violated invariant.
  void Validate() const;
};

struct RelativePose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RelativePose FromPose(const Pose& pose) { return {pose.linear(), pose.translation()}; }
  Pose ToPose() const;
};

struct DesiredPath {
  std::vector<RelativePose> poses;  // one per path sample, N+1 entries
  int samples() const { return static_cast<int>(poses.size()); }
};

// Translation and rotation parts of a pose residual, both expressed in the
// arm-1 end-effector frame.
struct PoseResidual {
  Eigen::Vector3d translation;  // desired - actual, meters
  Eigen::Vector3d rotation;     // log(R_desired * R_actual^T), axis-angle radians
  Vector6 Stacked() const;
};

Pose ForwardKinematics(const ArmModel& arm, const Eigen::Ref<const Vector>& q);

// Geometric Jacobian in world coordinates about the end-effector origin.
// Rows 0-2 map to linear velocity, rows 3-5 to angular velocity.
Jacobian ComputeJacobian(const ArmModel& arm, const Eigen::Ref<const Vector>& q);

// q_row holds arm-1 joints followed by arm-2 joints.
RelativePose ComputeRelativePose(const ArmModel& arm1, const ArmModel& arm2,
                                 const Eigen::Ref<const Vector>& q_row);

// 6 x (dof1 + dof2) map from joint rates to the relative twist in the arm-1
// end-effector frame.
Jacobian RelativeJacobian(const ArmModel& arm1, const ArmModel& arm2,
                          const Eigen::Ref<const Vector>& q_row);

// Axis-angle logarithm of a rotation matrix, angle in [0, pi].
Eigen::Vector3d RotationLog(const Eigen::Matrix3d& rotation);

PoseResidual ComputePoseResidual(const RelativePose& actual, const RelativePose& desired);

struct IkOptions {
  double tol = 1e-8;
  int max_iters = 200;
  double damping = 1e-3;  // added to J J^T
  double max_step = 0.2;  // rad per joint per iteration
  bool clamp_to_limits = true;
};

struct IkPathResult {
  Matrix q;                        // (N+1) x n
  std::vector<double> residuals;   // |stacked pose residual| per sample
  std::vector<int> iterations;     // per sample
  std::vector<int> unconverged;    // sample indices with residual > tol

  bool converged() const { return unconverged.empty(); }
};

// Damped least squares along the path, warm-started from the previous sample.
// Does not throw on non-convergence; inspect unconverged.
IkPathResult InverseKinematicsPath(const ArmModel& arm1, const ArmModel& arm2,
                                   const DesiredPath& path, const Eigen::Ref<const Vector>& q_init,
                                   const IkOptions& options = {});

// Per-joint least-squares fit of q_path columns onto the basis rows.
// Throws ValidationError when N+1 < d or the basis matrix is rank deficient.
CoefficientVector FitNominalCoefficients(const Matrix& q_path, const BasisConfig& cfg);

}  // namespace mbdtraj
