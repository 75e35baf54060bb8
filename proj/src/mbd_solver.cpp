#include "mbdtraj/mbd_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <sstream>

namespace mbdtraj {

namespace {
constexpr double kZeroStd = 1e-12;
constexpr double kMaxCosineBeta = 0.999;
}  // namespace

const char* ToString(ScheduleKind kind) {
  return kind == ScheduleKind::kLinearBeta ? "linear_beta" : "cosine";
}

ScheduleKind ScheduleKindFromString(const std::string& name) {
  if (name == "linear_beta") return ScheduleKind::kLinearBeta;
  if (name == "cosine") return ScheduleKind::kCosine;
  throw ValidationError("schedule: expected linear_beta or cosine, got '" + name + "'");
}

void SolverConfig::Validate() const {
  if (n_steps < 1) throw ValidationError("solver: steps must be >= 1");
  if (n_samples < 2) throw ValidationError("solver: samples must be >= 2");
  if (!(temperature > 0.0 && temperature < 1.0)) {
    throw ValidationError("solver: temperature must lie in (0,1)");
  }
  if (schedule == ScheduleKind::kLinearBeta) {
    if (!(beta_min > 0.0 && beta_min < 1.0 && beta_max > 0.0 && beta_max < 1.0)) {
      throw ValidationError("solver: beta_min and beta_max must lie in (0,1)");
    }
    if (beta_min > beta_max) throw ValidationError("solver: beta_min must not exceed beta_max");
  } else if (!(cosine_offset > 0.0)) {
    throw ValidationError("solver: cosine_offset must be positive");
  }
}

NoiseSchedule::NoiseSchedule(std::vector<double> alphas) : alphas_(std::move(alphas)) {
  if (alphas_.empty()) throw ValidationError("schedule: at least one step is required");
  alpha_bars_.reserve(alphas_.size() + 1);
  alpha_bars_.push_back(1.0);
  for (std::size_t i = 0; i < alphas_.size(); ++i) {
    if (!(alphas_[i] > 0.0 && alphas_[i] < 1.0)) {
      std::ostringstream msg;
      msg << "schedule: alpha_" << i + 1 << " = " << alphas_[i] << " outside (0,1)";
      throw ValidationError(msg.str());
    }
    alpha_bars_.push_back(alpha_bars_.back() * alphas_[i]);
  }
}

NoiseSchedule BuildSchedule(const SolverConfig& cfg) {
  cfg.Validate();
  const int steps = cfg.n_steps;
  std::vector<double> alphas(static_cast<std::size_t>(steps));
  if (cfg.schedule == ScheduleKind::kLinearBeta) {
    for (int t = 1; t <= steps; ++t) {
      const double frac = steps == 1 ? 1.0 : static_cast<double>(t - 1) / (steps - 1);
      alphas[static_cast<std::size_t>(t - 1)] = 1.0 - (cfg.beta_min + frac * (cfg.beta_max - cfg.beta_min));
    }
  } else {
    const auto f = [&](int t) {
      const double phase = (static_cast<double>(t) / steps + cfg.cosine_offset) /
                           (1.0 + cfg.cosine_offset) * std::numbers::pi / 2.0;
      return std::cos(phase) * std::cos(phase);
    };
    for (int t = 1; t <= steps; ++t) {
      const double beta = std::min(1.0 - f(t) / f(t - 1), kMaxCosineBeta);
      alphas[static_cast<std::size_t>(t - 1)] = 1.0 - beta;
    }
  }
  return NoiseSchedule(std::move(alphas));
}

DiffusionState InitialState(int dim, const SolverConfig& cfg, double lambda0) {
  DiffusionState state;
  state.y.resize(dim);
  SampleRng rng(cfg.seed, StreamTag::kDiffusionInit, 0, 0);
  for (int m = 0; m < dim; ++m) state.y(m) = rng.Normal();
  state.t = cfg.n_steps;
  state.lambda = lambda0;
  state.seed = cfg.seed;
  return state;
}

Matrix SampleBatch(const DiffusionState& state, const NoiseSchedule& schedule, int n_samples,
                   const ExecOptions& exec) {
  if (state.t < 1 || state.t > schedule.steps()) throw DomainError("sample_batch: t out of range");
  const double abar_prev = schedule.alpha_bar(state.t - 1);
  const Vector mean = state.y / std::sqrt(abar_prev);
  const Vector stddev = Vector::Constant(1, std::sqrt(1.0 / abar_prev - 1.0));
  const BatchStream stream{state.seed, StreamTag::kDiffusionSample,
                           static_cast<std::uint64_t>(state.t)};
  return SampleGaussianBatch(mean, stddev, n_samples, stream, exec);
}

std::vector<double> SoftmaxWeights(std::span<const double> scores, double tau) {
  const std::size_t count = scores.size();
  if (count < 2) throw DomainError("softmax_weights: at least two samples are required");
  double mean = 0.0;
  for (double c : scores) mean += c;
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (double c : scores) var += (c - mean) * (c - mean);
  const double stddev = std::sqrt(var / static_cast<double>(count));

  std::vector<double> weights(count, 1.0 / static_cast<double>(count));
  if (!(stddev >= kZeroStd)) return weights;

  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < count; ++l) {
    weights[l] = (scores[l] - mean) / (stddev * tau);
    peak = std::max(peak, weights[l]);
  }
  double total = 0.0;
  for (double& w : weights) {
    w = std::exp(w - peak);
    total += w;
  }
  for (double& w : weights) w /= total;
  return weights;
}

Vector ScoreAndUpdate(const Vector& y, const Vector& weighted_mean, const NoiseSchedule& schedule,
                      int t) {
  if (y.size() != weighted_mean.size()) throw ShapeError("score_and_update: size mismatch");
  const double abar = schedule.alpha_bar(t);
  if (!(abar < 1.0)) throw DomainError("score_and_update: abar_t must be < 1");
  // y + (1 - abar) s cancels down to sqrt(abar) ybar, which can be many orders
  // of magnitude smaller than y late in the schedule; the extended format keeps
  // that cancellation below double rounding.
  using Wide = long double;
  const Wide ab = abar;
  const Wide sqrt_ab = std::sqrt(ab);
  const Wide sqrt_a = std::sqrt(static_cast<Wide>(schedule.alpha(t)));
  Vector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const Wide yi = y(i);
    const Wide score = (-yi + sqrt_ab * static_cast<Wide>(weighted_mean(i))) / (1.0L - ab);
    out(i) = static_cast<double>((yi + (1.0L - ab) * score) / sqrt_a);
  }
  return out;
}

SolveResult SolveMbd(const LatentObjective& objective, const SolverConfig& cfg,
                     const ExecOptions& exec) {
  const NoiseSchedule schedule = BuildSchedule(cfg);
  const ObjectiveConfig& obj_cfg = objective.config();
  const auto start = std::chrono::steady_clock::now();

  DiffusionState state = InitialState(objective.dim(), cfg, obj_cfg.lambda0);
  SolveResult result;
  result.trace.method = "mbd";
  result.trace.penalty_sign = obj_cfg.penalty_sign;
  result.trace.records.reserve(static_cast<std::size_t>(cfg.n_steps));

  Evaluation post;
  std::vector<double> scores(static_cast<std::size_t>(cfg.n_samples));
  for (; state.t >= 1; --state.t) {
    const Matrix samples = SampleBatch(state, schedule, cfg.n_samples, exec);
    const std::vector<Evaluation> evals = EvaluateBatch(objective, samples, state.lambda, exec);

    TraceRecord rec;
    rec.t = state.t;
    rec.lambda = state.lambda;
    rec.best_R = std::numeric_limits<double>::infinity();
    double sum_r = 0.0;
    for (std::size_t l = 0; l < evals.size(); ++l) {
      scores[l] = -evals[l].R;
      rec.best_R = std::min(rec.best_R, evals[l].R);
      sum_r += evals[l].R;
    }
    rec.mean_R = sum_r / static_cast<double>(evals.size());

    const std::vector<double> weights = SoftmaxWeights(scores, cfg.temperature);
    const Vector y_bar = WeightedMean(samples, weights);
    state.y = ScoreAndUpdate(state.y, y_bar, schedule, state.t);

    post = objective.Evaluate(ClipToBox(state.y), state.lambda);
    state.lambda = UpdatePenalty(state.lambda, post.E, obj_cfg);

    rec.V = post.V;
    rec.E = post.E;
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.trace.records.push_back(rec);
    result.trace.evaluations += cfg.n_samples + 1;
  }

  result.y_star = ClipToBox(state.y);
  result.final_lambda = state.lambda;
  result.final = Combine(post.V, post.E, state.lambda, obj_cfg);
  return result;
}

}  // namespace mbdtraj
