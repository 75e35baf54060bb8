#include "mbdtraj/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace mbdtraj {

namespace {

constexpr double kStdFloor = 1e-6;

using Clock = std::chrono::steady_clock;

double ElapsedMs(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Folds one evaluated batch into the best-so-far candidate and appends a trace row.
void RecordBatch(const Matrix& samples, const std::vector<Evaluation>& evals, int iteration,
                 double lambda, Clock::time_point start, SolveResult& result) {
  TraceRecord rec;
  rec.t = iteration;
  rec.lambda = lambda;
  rec.best_R = std::numeric_limits<double>::infinity();
  double sum_r = 0.0;
  for (std::size_t l = 0; l < evals.size(); ++l) {
    sum_r += evals[l].R;
    rec.best_R = std::min(rec.best_R, evals[l].R);
    if (result.y_star.size() == 0 || evals[l].R < result.final.R) {
      result.final = evals[l];
      result.y_star = samples.col(static_cast<Eigen::Index>(l));
    }
  }
  rec.mean_R = sum_r / static_cast<double>(evals.size());
  rec.V = result.final.V;
  rec.E = result.final.E;
  rec.wall_ms = ElapsedMs(start);
  result.trace.records.push_back(rec);
  result.trace.evaluations += static_cast<std::int64_t>(evals.size());
}

SolveResult StartResult(const char* method, const LatentObjective& objective,
                        const BaselineConfig& cfg) {
  cfg.Validate();
  SolveResult result;
  result.trace.method = method;
  result.trace.penalty_sign = objective.config().penalty_sign;
  result.final_lambda = cfg.penalty;
  result.trace.records.reserve(static_cast<std::size_t>(cfg.iterations));
  return result;
}

}  // namespace

int BaselineConfig::EliteCount() const {
  return static_cast<int>(std::ceil(elite_fraction * population));
}

void BaselineConfig::Validate() const {
  const int min_population = method == BaselineMethod::kCem ? 2 : 1;
  if (population < min_population) {
    throw ValidationError(method == BaselineMethod::kCem ? "cem: population must be >= 2"
                                                         : "random_search: population must be >= 1");
  }
  if (!(elite_fraction > 0.0 && elite_fraction <= 1.0)) {
    throw ValidationError("baseline: elite_fraction must lie in (0,1]");
  }
  if (EliteCount() < 1) throw ValidationError("baseline: elite count must be >= 1");
  if (iterations < 1) throw ValidationError("baseline: iterations must be >= 1");
  if (!(initial_std > 0.0)) throw ValidationError("baseline: initial_std must be positive");
  if (!(penalty >= 0.0)) throw ValidationError("baseline: penalty must be >= 0");
}

SolveResult RunRandomSearch(const LatentObjective& objective, const BaselineConfig& cfg,
                            const ExecOptions& exec) {
  SolveResult result = StartResult("random", objective, cfg);
  const auto start = Clock::now();
  for (int it = 0; it < cfg.iterations; ++it) {
    const BatchStream stream{cfg.seed, StreamTag::kRandomSearch, static_cast<std::uint64_t>(it)};
    const Matrix samples = SampleUniformBatch(objective.dim(), cfg.population, stream, exec);
    RecordBatch(samples, EvaluateBatch(objective, samples, cfg.penalty, exec), it + 1, cfg.penalty,
                start, result);
  }
  return result;
}

EliteFit FitElite(const Matrix& samples, const std::vector<Evaluation>& evals, int elite_count) {
  if (static_cast<Eigen::Index>(evals.size()) != samples.cols()) {
    throw ShapeError("fit_elite: one evaluation per sample is required");
  }
  if (elite_count < 1 || elite_count > samples.cols()) {
    throw DomainError("fit_elite: elite count out of range");
  }
  std::vector<int> order(evals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return evals[static_cast<std::size_t>(a)].R < evals[static_cast<std::size_t>(b)].R;
  });

  EliteFit fit;
  fit.mean = Vector::Zero(samples.rows());
  for (int e = 0; e < elite_count; ++e) fit.mean += samples.col(order[static_cast<std::size_t>(e)]);
  fit.mean /= elite_count;
  Vector var = Vector::Zero(samples.rows());
  for (int e = 0; e < elite_count; ++e) {
    var += (samples.col(order[static_cast<std::size_t>(e)]) - fit.mean).cwiseAbs2();
  }
  fit.stddev = (var / elite_count).cwiseSqrt().cwiseMax(kStdFloor);
  return fit;
}

SolveResult RunCem(const LatentObjective& objective, const BaselineConfig& cfg,
                   const ExecOptions& exec) {
  SolveResult result = StartResult("cem", objective, cfg);
  const auto start = Clock::now();
  Vector mean = Vector::Zero(objective.dim());
  Vector stddev = Vector::Constant(objective.dim(), cfg.initial_std);
  for (int it = 0; it < cfg.iterations; ++it) {
    const BatchStream stream{cfg.seed, StreamTag::kCem, static_cast<std::uint64_t>(it)};
    const Matrix samples = SampleGaussianBatch(mean, stddev, cfg.population, stream, exec);
    const std::vector<Evaluation> evals = EvaluateBatch(objective, samples, cfg.penalty, exec);
    RecordBatch(samples, evals, it + 1, cfg.penalty, start, result);
    EliteFit fit = FitElite(samples, evals, cfg.EliteCount());
    mean = std::move(fit.mean);
    stddev = std::move(fit.stddev);
  }
  return result;
}

}  // namespace mbdtraj
