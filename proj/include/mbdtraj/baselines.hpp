#pragma once

// Zeroth-order reference optimizers over the same latent box and cost as the
// diffusion solver. Both hold lambda fixed at BaselineConfig::penalty and
// return the best candidate seen.

#include <cstdint>
#include <string>

#include "mbdtraj/batch.hpp"
#include "mbdtraj/mbd_solver.hpp"
#include "mbdtraj/objective.hpp"

namespace mbdtraj {

enum class BaselineMethod { kCem, kRandomSearch };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kCem;
  int population = 512;
  double elite_fraction = 0.1;
  int iterations = 100;
  double initial_std = 0.5;  // latent units
  double penalty = 10.0;     // fixed lambda
  std::uint64_t seed = 0;

  int EliteCount() const;
  std::int64_t Budget() const { return static_cast<std::int64_t>(population) * iterations; }
  void Validate() const;
};

// Uniform draws over the box; population * iterations evaluations.
SolveResult RunRandomSearch(const LatentObjective& objective, const BaselineConfig& cfg,
                            const ExecOptions& exec = {});

struct EliteFit {
  Vector mean;
  Vector stddev;  // population std, floored at 1e-6
};

// Mean and std of the elite_count lowest-R columns (ties broken by index).
EliteFit FitElite(const Matrix& samples, const std::vector<Evaluation>& evals, int elite_count);

// Cross-entropy method: diagonal Gaussian refit to the elite set, starting at
// mean 0 with initial_std, samples clipped to the box.
SolveResult RunCem(const LatentObjective& objective, const BaselineConfig& cfg,
                   const ExecOptions& exec = {});

}  // namespace mbdtraj
