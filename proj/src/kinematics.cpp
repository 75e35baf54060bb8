#include "mbdtraj/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbdtraj {

namespace {

constexpr double kGeometryTol = 1e-9;

Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

void CheckRotation(const Eigen::Matrix3d& r, const std::string& what) {
  const double orth = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (orth > kGeometryTol || std::abs(r.determinant() - 1.0) > kGeometryTol) {
    throw ValidationError(what + ": rotation is not orthonormal with det 1");
  }
}

void CheckLength(const ArmModel& arm, Eigen::Index n) {
  if (n != arm.dof()) {
    std::ostringstream msg;
    msg << "arm '" << arm.name << "': expected " << arm.dof() << " joint angles, got " << n;
    throw ShapeError(msg.str());
  }
}

}  // namespace

void ArmModel::Validate() const {
  const std::string where = "arm '" + name + "'";
  CheckRotation(base.linear(), where + " base");
  CheckRotation(tool.linear(), where + " tool");
  if (joint_limits.size() != dof() || velocity_limits.size() != dof()) {
    throw ValidationError(where + ": one joint limit and one velocity limit per joint are required");
  }
  for (int j = 0; j < dof(); ++j) {
    const std::string joint = where + " joint " + std::to_string(j);
    CheckRotation(joints[static_cast<std::size_t>(j)].link.linear(), joint + " link");
    if (std::abs(joints[static_cast<std::size_t>(j)].axis.norm() - 1.0) > kGeometryTol) {
      throw ValidationError(joint + ": axis must be a unit vector");
    }
    if (!(joint_limits(j) > 0.0)) throw ValidationError(joint + ": joint limit must be positive");
    if (!(velocity_limits(j) > 0.0)) {
      throw ValidationError(joint + ": velocity limit must be positive");
    }
  }
}

Pose RelativePose::ToPose() const {
  Pose pose = Pose::Identity();
  pose.linear() = rotation;
  pose.translation() = translation;
  return pose;
}

Vector6 PoseResidual::Stacked() const {
  Vector6 e;
  e << translation, rotation;
  return e;
}

Pose ForwardKinematics(const ArmModel& arm, const Eigen::Ref<const Vector>& q) {
  CheckLength(arm, q.size());
  Pose pose = arm.base;
  for (int j = 0; j < arm.dof(); ++j) {
    const RevoluteJoint& joint = arm.joints[static_cast<std::size_t>(j)];
    pose = pose * joint.link * Eigen::AngleAxisd(q(j), joint.axis);
  }
  return pose * arm.tool;
}

Jacobian ComputeJacobian(const ArmModel& arm, const Eigen::Ref<const Vector>& q) {
  CheckLength(arm, q.size());
  Eigen::Matrix3Xd axes(3, arm.dof());
  Eigen::Matrix3Xd origins(3, arm.dof());
  Pose pose = arm.base;
  for (int j = 0; j < arm.dof(); ++j) {
    const RevoluteJoint& joint = arm.joints[static_cast<std::size_t>(j)];
    pose = pose * joint.link;
    axes.col(j) = pose.linear() * joint.axis;
    origins.col(j) = pose.translation();
    pose = pose * Eigen::AngleAxisd(q(j), joint.axis);
  }
  const Eigen::Vector3d tip = (pose * arm.tool).translation();
  Jacobian jac(6, arm.dof());
  for (int j = 0; j < arm.dof(); ++j) {
    jac.col(j).head<3>() = axes.col(j).cross(tip - origins.col(j));
    jac.col(j).tail<3>() = axes.col(j);
  }
  return jac;
}

RelativePose ComputeRelativePose(const ArmModel& arm1, const ArmModel& arm2,
                                 const Eigen::Ref<const Vector>& q_row) {
  if (q_row.size() != arm1.dof() + arm2.dof()) {
    std::ostringstream msg;
    msg << "relative_pose: expected " << arm1.dof() + arm2.dof() << " joint angles, got "
        << q_row.size();
    throw ShapeError(msg.str());
  }
  const Pose fk1 = ForwardKinematics(arm1, q_row.head(arm1.dof()));
  const Pose fk2 = ForwardKinematics(arm2, q_row.tail(arm2.dof()));
  return RelativePose::FromPose(fk1.inverse(Eigen::Isometry) * fk2);
}

Jacobian RelativeJacobian(const ArmModel& arm1, const ArmModel& arm2,
                          const Eigen::Ref<const Vector>& q_row) {
  const int n1 = arm1.dof();
  const int n2 = arm2.dof();
  if (q_row.size() != n1 + n2) throw ShapeError("relative_jacobian: joint count mismatch");
  const Pose fk1 = ForwardKinematics(arm1, q_row.head(n1));
  const Pose fk2 = ForwardKinematics(arm2, q_row.tail(n2));
  const Jacobian j1 = ComputeJacobian(arm1, q_row.head(n1));
  const Jacobian j2 = ComputeJacobian(arm2, q_row.tail(n2));
  const Eigen::Matrix3d r1t = fk1.linear().transpose();
  const Eigen::Matrix3d lever = Skew(fk2.translation() - fk1.translation());

  Jacobian rel(6, n1 + n2);
  rel.topLeftCorner(3, n1) = r1t * (-j1.topRows<3>() + lever * j1.bottomRows<3>());
  rel.bottomLeftCorner(3, n1) = -r1t * j1.bottomRows<3>();
  rel.topRightCorner(3, n2) = r1t * j2.topRows<3>();
  rel.bottomRightCorner(3, n2) = r1t * j2.bottomRows<3>();
  return rel;
}

Eigen::Vector3d RotationLog(const Eigen::Matrix3d& r) {
  const Eigen::Vector3d w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_angle = 0.5 * w.norm();
  const double cos_angle = 0.5 * (r.trace() - 1.0);
  const double angle = std::atan2(sin_angle, cos_angle);
  if (sin_angle > 1e-6) return w * (angle / (2.0 * sin_angle));
  if (cos_angle > 0.0) return 0.5 * (1.0 + angle * angle / 6.0) * w;
  // Near pi the antisymmetric part vanishes; recover the axis from the quaternion.
  const Eigen::AngleAxisd aa(r);
  return aa.axis() * aa.angle();
}

PoseResidual ComputePoseResidual(const RelativePose& actual, const RelativePose& desired) {
  return {desired.translation - actual.translation,
          RotationLog(desired.rotation * actual.rotation.transpose())};
}

IkPathResult InverseKinematicsPath(const ArmModel& arm1, const ArmModel& arm2,
                                   const DesiredPath& path, const Eigen::Ref<const Vector>& q_init,
                                   const IkOptions& options) {
  const int n = arm1.dof() + arm2.dof();
  if (q_init.size() != n) throw ShapeError("inverse_kinematics_path: q_init length mismatch");
  Vector limits(n);
  limits << arm1.joint_limits, arm2.joint_limits;

  IkPathResult result;
  result.q.resize(path.samples(), n);
  Vector q = q_init;
  for (int i = 0; i < path.samples(); ++i) {
    const RelativePose& target = path.poses[static_cast<std::size_t>(i)];
    Vector6 err = ComputePoseResidual(ComputeRelativePose(arm1, arm2, q), target).Stacked();
    int iter = 0;
    while (err.norm() > options.tol && iter < options.max_iters) {
      const Jacobian jac = RelativeJacobian(arm1, arm2, q);
      Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose();
      jjt.diagonal().array() += options.damping;
      Vector step = jac.transpose() * jjt.ldlt().solve(err);
      const double largest = step.cwiseAbs().maxCoeff();
      if (largest > options.max_step) step *= options.max_step / largest;
      q += step;
      if (options.clamp_to_limits) q = q.cwiseMax(-limits).cwiseMin(limits);
      err = ComputePoseResidual(ComputeRelativePose(arm1, arm2, q), target).Stacked();
      ++iter;
    }
    result.q.row(i) = q.transpose();
    result.residuals.push_back(err.norm());
    result.iterations.push_back(iter);
    if (err.norm() > options.tol) result.unconverged.push_back(i);
  }
  return result;
}

CoefficientVector FitNominalCoefficients(const Matrix& q_path, const BasisConfig& cfg) {
  if (q_path.rows() != cfg.samples()) {
    throw ShapeError("fit_nominal_coefficients: q_path rows must equal N+1");
  }
  if (cfg.samples() < cfg.d) {
    throw ValidationError("fit_nominal_coefficients: N+1 must be >= d for a least-squares fit");
  }
  const Matrix basis = BasisMatrix(cfg);
  const Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  if (qr.rank() < cfg.d) {
    throw ValidationError("fit_nominal_coefficients: basis matrix is rank deficient");
  }
  const Matrix theta_t = qr.solve(q_path);  // d x n
  return CoefficientVector(theta_t.transpose());
}

}  // namespace mbdtraj
