#pragma once

// Shared fixtures and hand-rolled generators for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "mbdtraj/scenario.hpp"

namespace mbdtraj::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double Uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int Int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double Normal() { return std::normal_distribution<double>()(engine_); }

  Vector UniformVector(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = Uniform(lo, hi);
    return v;
  }
  Matrix UniformMatrix(int rows, int cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = Uniform(lo, hi);
    return m;
  }
  Eigen::Vector3d UnitVector() {
    Eigen::Vector3d v;
    do {
      v = Eigen::Vector3d(Normal(), Normal(), Normal());
    } while (v.norm() < 1e-3);
    return v.normalized();
  }
  Eigen::Matrix3d Rotation() {
    return Eigen::AngleAxisd(Uniform(-3.0, 3.0), UnitVector()).toRotationMatrix();
  }

  // Strictly increasing grid with exact endpoints 0 and 1.
  std::vector<double> Grid(int segments) {
    std::vector<double> s(static_cast<std::size_t>(segments + 1));
    double acc = 0.0;
    for (int i = 1; i <= segments; ++i) s[static_cast<std::size_t>(i)] = acc += Uniform(0.1, 1.0);
    for (double& v : s) v /= acc;
    s.back() = 1.0;
    return s;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline Pose Translation(double x, double y, double z) {
  Pose p = Pose::Identity();
  p.translation() = Eigen::Vector3d(x, y, z);
  return p;
}

// Two z-axis links of lengths l1 and l2, end-effector at the tip of link 2.
inline ArmModel PlanarArm(double l1, double l2, const Pose& base = Pose::Identity(),
                          double q_limit = 3.0, double v_limit = 1.0) {
  ArmModel arm;
  arm.name = "planar";
  arm.base = base;
  arm.joints.resize(2);
  arm.joints[1].link = Translation(l1, 0.0, 0.0);
  arm.tool = Translation(l2, 0.0, 0.0);
  arm.joint_limits = Vector::Constant(2, q_limit);
  arm.velocity_limits = Vector::Constant(2, v_limit);
  return arm;
}

// z, y, y chain with a rotated third link.
inline ArmModel SpatialArm(const Pose& base = Pose::Identity()) {
  ArmModel arm;
  arm.name = "spatial";
  arm.base = base;
  arm.joints.resize(3);
  arm.joints[0].axis = Eigen::Vector3d::UnitZ();
  arm.joints[1].link = Translation(0.0, 0.0, 0.3);
  arm.joints[1].axis = Eigen::Vector3d::UnitY();
  arm.joints[2].link = Translation(0.3, 0.0, 0.0);
  arm.joints[2].link.linear() = Eigen::AngleAxisd(0.5, Eigen::Vector3d::UnitX()).toRotationMatrix();
  arm.joints[2].axis = Eigen::Vector3d::UnitY();
  arm.tool = Translation(0.25, 0.0, 0.0);
  arm.joint_limits = Vector::Constant(3, 3.0);
  arm.velocity_limits = Vector::Constant(3, 1.0);
  return arm;
}

inline DesiredPath PathFromJointMotion(const ArmModel& arm1, const ArmModel& arm2,
                                       const Matrix& q_rows) {
  DesiredPath path;
  for (int i = 0; i < q_rows.rows(); ++i) {
    path.poses.push_back(ComputeRelativePose(arm1, arm2, q_rows.row(i).transpose()));
  }
  return path;
}

// One revolute joint about z with the tool on its axis, tracked against a
// fixed frame: the relative rotation is Rz(-q). The desired path q_d(s) = a s
// lies in the span of a linear basis, and with unit velocity limit the
// minimum time under |q - q_d| * w <= eps is a - 2 eps / w.
struct ToyProblem {
  TrackingProblem problem;
  ExplorationBounds bounds;
  double slope = 0.5;
  double OptimalTime() const {
    return slope - 2.0 * problem.objective.epsilon / problem.objective.orientation_weight;
  }
};

inline ToyProblem MakeToyProblem(double slope = 0.5, double epsilon = 0.1, double lambda0 = 2.0,
                                 int d = 2, int segments = 20) {
  ToyProblem toy;
  toy.slope = slope;
  TrackingProblem& p = toy.problem;
  p.arm1.name = "rotor";
  p.arm1.joints.resize(1);
  p.arm1.joint_limits = Vector::Constant(1, 2.0);
  p.arm1.velocity_limits = Vector::Constant(1, 1.0);
  p.arm2.name = "fixed";
  p.arm2.joint_limits.resize(0);
  p.arm2.velocity_limits.resize(0);
  p.basis = BasisConfig::Uniform(d, segments);
  for (double s : p.basis.s_grid) {
    RelativePose pose;
    pose.rotation = Eigen::AngleAxisd(-slope * s, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    p.path.poses.push_back(pose);
  }
  p.objective.epsilon = epsilon;
  p.objective.lambda0 = lambda0;
  p.objective.orientation_weight = 1.0;
  const IkPathResult ik = InverseKinematicsPath(p.arm1, p.arm2, p.path, Vector::Zero(1));
  toy.bounds = SelectSigma(FitNominalCoefficients(ik.q, p.basis), p.JointLimits(), p.basis);
  return toy;
}

inline std::filesystem::path SourcePath(const std::string& relative) {
  return std::filesystem::path(MBDTRAJ_SOURCE_DIR) / relative;
}

inline std::filesystem::path FreshDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mbdtraj_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

inline double RelErr(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace mbdtraj::testing
