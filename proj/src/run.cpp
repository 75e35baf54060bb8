#include "mbdtraj/scenario.hpp"

#include <sstream>

namespace mbdtraj {

void Scenario::Validate() const {
  problem.Validate();
  const Vector limits = problem.JointLimits();
  if (q_init.size() != joints()) {
    std::ostringstream msg;
    msg << "q_init: expected " << joints() << " entries (dof1 + dof2), got " << q_init.size();
    throw ValidationError(msg.str());
  }
  for (int j = 0; j < joints(); ++j) {
    if (std::abs(q_init(j)) > limits(j)) {
      throw ValidationError("q_init: entry " + std::to_string(j) + " exceeds its joint limit");
    }
  }
  if (!(ik.tol > 0.0)) throw ValidationError("ik: tol must be positive");
  if (ik.max_iters < 0) throw ValidationError("ik: max_iters must be >= 0");
  solver.Validate();
  cem.Validate();
  random_search.Validate();
}

NominalInit InitializeNominal(const Scenario& scenario) {
  const TrackingProblem& p = scenario.problem;
  NominalInit init;
  init.ik = InverseKinematicsPath(p.arm1, p.arm2, p.path, scenario.q_init, scenario.ik);
  const CoefficientVector theta0 = FitNominalCoefficients(init.ik.q, p.basis);
  init.bounds = SelectSigma(theta0, p.JointLimits(), p.basis);
  return init;
}

const char* ToString(Method method) {
  switch (method) {
    case Method::kMbd:
      return "mbd";
    case Method::kCem:
      return "cem";
    case Method::kRandom:
      return "random";
  }
  return "unknown";
}

Method MethodFromString(const std::string& name) {
  if (name == "mbd") return Method::kMbd;
  if (name == "cem") return Method::kCem;
  if (name == "random") return Method::kRandom;
  throw ValidationError("method: expected mbd, cem or random, got '" + name + "'");
}

PoseRecord ToPoseRecord(const RelativePose& pose) {
  Eigen::Quaterniond q(pose.rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return {pose.translation, q};
}

BaselineConfig MatchedBudget(const Scenario& scenario, BaselineMethod method) {
  BaselineConfig cfg = method == BaselineMethod::kCem ? scenario.cem : scenario.random_search;
  cfg.population = scenario.solver.n_samples;
  cfg.iterations = scenario.solver.n_steps;
  return cfg;
}

ResultBundle Run(const Scenario& scenario, Method method, std::uint64_t seed,
                 const ExecOptions& exec) {
  scenario.Validate();
  const NominalInit init = InitializeNominal(scenario);
  const TrajectoryObjective objective(scenario.problem, init.bounds);

  SolveResult solved;
  switch (method) {
    case Method::kMbd: {
      SolverConfig cfg = scenario.solver;
      cfg.seed = seed;
      solved = SolveMbd(objective, cfg, exec);
      break;
    }
    case Method::kCem: {
      BaselineConfig cfg = scenario.cem;
      cfg.seed = seed;
      solved = RunCem(objective, cfg, exec);
      break;
    }
    case Method::kRandom: {
      BaselineConfig cfg = scenario.random_search;
      cfg.seed = seed;
      solved = RunRandomSearch(objective, cfg, exec);
      break;
    }
  }

  const TrackingProblem& p = scenario.problem;
  ResultBundle bundle;
  bundle.scenario_name = scenario.name;
  bundle.method = method;
  bundle.seed = seed;
  bundle.scenario_echo = scenario.source;
  bundle.ik_residuals = init.ik.residuals;
  bundle.theta0 = init.bounds.theta0;
  bundle.sigma = init.bounds.sigma;
  bundle.collapsed = init.bounds.collapsed;
  bundle.y_star = solved.y_star;
  bundle.theta_star = MapLatent(solved.y_star, init.bounds);
  bundle.s_grid = p.basis.s_grid;
  bundle.trajectory = ReconstructTrajectory(bundle.theta_star, p.basis);
  for (int i = 0; i < bundle.trajectory.samples(); ++i) {
    bundle.relative_poses.push_back(ToPoseRecord(
        ComputeRelativePose(p.arm1, p.arm2, bundle.trajectory.q.row(i).transpose())));
  }
  bundle.path_errors = PathErrors(bundle.trajectory, p.arm1, p.arm2, p.path);
  bundle.final = solved.final;
  bundle.final_lambda = solved.final_lambda;
  bundle.trace = std::move(solved.trace);
  return bundle;
}

Evaluation ReEvaluate(const ResultBundle& bundle, const Scenario& scenario) {
  return AdaptiveCost(bundle.theta_star, bundle.final_lambda, scenario.problem);
}

}  // namespace mbdtraj
