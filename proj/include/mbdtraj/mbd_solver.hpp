#pragma once

// Model-based reverse diffusion over the latent box [-1,1]^dim.
//
// Starting from y ~ N(0, I) at t = T, each step t = T..1
//   1. draws N_s candidates from N(y / sqrt(abar_{t-1}), (1/abar_{t-1} - 1) I),
//      clipped to the box,
//   2. scores them with c = -R(theta(y_l), lambda_t),
//   3. forms softmax weights over (c - mean c) / (std c * tau),
//   4. estimates the score s = (-y + sqrt(abar_t) ybar) / (1 - abar_t) from
//      the weighted mean ybar,
//   5. steps y <- (y + (1 - abar_t) s) / sqrt(alpha_t),
//   6. adapts lambda from E at the new iterate.
// Steps 4-5 collapse to y_{t-1} = sqrt(abar_{t-1}) ybar, so the iterate never
// leaves the box once the first step is taken.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mbdtraj/batch.hpp"
#include "mbdtraj/common.hpp"
#include "mbdtraj/objective.hpp"

namespace mbdtraj {

enum class ScheduleKind { kLinearBeta, kCosine };

const char* ToString(ScheduleKind kind);
ScheduleKind ScheduleKindFromString(const std::string& name);

struct SolverConfig {
  int n_steps = 100;
  int n_samples = 512;
  double temperature = 0.1;
  std::uint64_t seed = 0;
  ScheduleKind schedule = ScheduleKind::kLinearBeta;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  double cosine_offset = 0.008;

  void Validate() const;
};

class NoiseSchedule {
 public:
  // alphas[t-1] = alpha_t for t = 1..T; each in (0,1).
  explicit NoiseSchedule(std::vector<double> alphas);

  int steps() const { return static_cast<int>(alphas_.size()); }
  double alpha(int t) const { return alphas_.at(static_cast<std::size_t>(t - 1)); }
  // abar_0 = 1, abar_t = abar_{t-1} * alpha_t.
  double alpha_bar(int t) const { return alpha_bars_.at(static_cast<std::size_t>(t)); }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<double>& alpha_bars() const { return alpha_bars_; }

 private:
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
};

// linear_beta: beta_t linearly spaced from beta_min (t=1) to beta_max (t=T).
// cosine: squared-cosine abar profile, betas capped at 0.999.
NoiseSchedule BuildSchedule(const SolverConfig& cfg);

struct DiffusionState {
  Vector y;
  int t = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

// y ~ N(0, I) at t = T.
DiffusionState InitialState(int dim, const SolverConfig& cfg, double lambda0);

// Candidates for step state.t as columns, already clipped to the box.
Matrix SampleBatch(const DiffusionState& state, const NoiseSchedule& schedule, int n_samples,
                   const ExecOptions& exec = {});

// Softmax of (scores - mean) / (std * tau), population std. Falls back to
// uniform weights when std < 1e-12. Higher score -> larger weight.
std::vector<double> SoftmaxWeights(std::span<const double> scores, double tau);

// Score estimate and reverse step, computed literally from both formulas.
Vector ScoreAndUpdate(const Vector& y, const Vector& weighted_mean, const NoiseSchedule& schedule,
                      int t);

struct TraceRecord {
  int t = 0;
  double lambda = 0.0;
  double best_R = 0.0;
  double mean_R = 0.0;
  double V = 0.0;
  double E = 0.0;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::string method;
  PenaltySign penalty_sign = PenaltySign::kDualAscent;
  std::int64_t evaluations = 0;
  std::vector<TraceRecord> records;
};

struct SolveResult {
  Vector y_star;  // inside the box
  Evaluation final;
  double final_lambda = 0.0;
  RunTrace trace;
};

SolveResult SolveMbd(const LatentObjective& objective, const SolverConfig& cfg,
                     const ExecOptions& exec = {});

}  // namespace mbdtraj
