#pragma once

// Problem instances and the end-to-end run: inverse kinematics along the
// desired path, polynomial fit of the nominal, exploration bounds, then one of
// the optimizers.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbdtraj/baselines.hpp"
#include "mbdtraj/batch.hpp"
#include "mbdtraj/kinematics.hpp"
#include "mbdtraj/mbd_solver.hpp"
#include "mbdtraj/objective.hpp"
#include "mbdtraj/trajectory_param.hpp"

namespace mbdtraj {

inline constexpr const char* kToolVersion = "0.1.0";

struct Scenario {
  std::string name;
  TrackingProblem problem;
  Vector q_init;  // IK seed for the first path sample
  IkOptions ik;
  SolverConfig solver;
  BaselineConfig cem{.method = BaselineMethod::kCem};
  BaselineConfig random_search{.method = BaselineMethod::kRandomSearch};
  std::uint64_t seed = 0;
  // Document the scenario was parsed from; echoed verbatim into results.
  nlohmann::json source;

  int joints() const { return problem.joints(); }
  // Throws ValidationError naming the violated invariant.
  void Validate() const;
};

struct NominalInit {
  IkPathResult ik;
  ExplorationBounds bounds;
};

NominalInit InitializeNominal(const Scenario& scenario);

enum class Method { kMbd, kCem, kRandom };

const char* ToString(Method method);
Method MethodFromString(const std::string& name);

struct PoseRecord {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // unit, w >= 0
};

PoseRecord ToPoseRecord(const RelativePose& pose);

struct ResultBundle {
  std::string tool_version = kToolVersion;
  std::string scenario_name;
  Method method = Method::kMbd;
  std::uint64_t seed = 0;
  nlohmann::json scenario_echo;

  std::vector<double> ik_residuals;
  CoefficientVector theta0;
  Matrix sigma;
  std::vector<std::pair<int, int>> collapsed;

  CoefficientVector theta_star;
  Vector y_star;
  std::vector<double> s_grid;
  JointTrajectory trajectory;
  std::vector<PoseRecord> relative_poses;
  std::vector<SampleError> path_errors;
  Evaluation final;
  double final_lambda = 0.0;
  RunTrace trace;
};

// Baselines use the scenario's cem / random_search configurations.
ResultBundle Run(const Scenario& scenario, Method method, std::uint64_t seed,
                 const ExecOptions& exec = {});

// Re-evaluates theta_star of a bundle against its own scenario.
Evaluation ReEvaluate(const ResultBundle& bundle, const Scenario& scenario);

// Baseline configuration that spends the same number of objective
// evaluations as the diffusion solver (population N_s, iterations T).
BaselineConfig MatchedBudget(const Scenario& scenario, BaselineMethod method);

}  // namespace mbdtraj
