#include "mbdtraj/batch.hpp"

#include <algorithm>
#include <exception>
#include <mutex>

#include <omp.h>

namespace mbdtraj {

namespace {

double StddevAt(const Vector& stddev, Eigen::Index m) {
  return stddev.size() == 1 ? stddev(0) : stddev(m);
}

void CheckStddev(const Vector& mean, const Vector& stddev) {
  if (stddev.size() != 1 && stddev.size() != mean.size()) {
    throw ShapeError("sample_gaussian_batch: stddev must have 1 or dim entries");
  }
}

void FillGaussianColumn(const Vector& mean, const Vector& stddev, const BatchStream& stream,
                        int l, Eigen::Ref<Vector> out) {
  SampleRng rng(stream.seed, stream.tag, stream.step, static_cast<std::uint64_t>(l));
  for (Eigen::Index m = 0; m < mean.size(); ++m) {
    const double draw = mean(m) + StddevAt(stddev, m) * rng.Normal();
    out(m) = std::clamp(draw, -1.0, 1.0);
  }
}

void FillUniformColumn(const BatchStream& stream, int l, Eigen::Ref<Vector> out) {
  SampleRng rng(stream.seed, stream.tag, stream.step, static_cast<std::uint64_t>(l));
  for (Eigen::Index m = 0; m < out.size(); ++m) out(m) = rng.Uniform(-1.0, 1.0);
}

int ResolveThreads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

// Runs body(l) for l in [0, count) across threads and rethrows the first
// exception on the calling thread.
template <typename Body>
void ParallelFor(int count, int threads, Body&& body) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
#pragma omp parallel for schedule(static) num_threads(ResolveThreads(threads))
  for (int l = 0; l < count; ++l) {
    try {
      body(l);
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Matrix SampleGaussianBatchSerial(const Vector& mean, const Vector& stddev, int count,
                                 const BatchStream& stream) {
  CheckStddev(mean, stddev);
  Matrix samples(mean.size(), count);
  for (int l = 0; l < count; ++l) FillGaussianColumn(mean, stddev, stream, l, samples.col(l));
  return samples;
}

Matrix SampleGaussianBatchParallel(const Vector& mean, const Vector& stddev, int count,
                                   const BatchStream& stream, int threads) {
  CheckStddev(mean, stddev);
  Matrix samples(mean.size(), count);
  ParallelFor(count, threads,
              [&](int l) { FillGaussianColumn(mean, stddev, stream, l, samples.col(l)); });
  return samples;
}

Matrix SampleGaussianBatch(const Vector& mean, const Vector& stddev, int count,
                           const BatchStream& stream, const ExecOptions& exec) {
  return exec.policy == ExecPolicy::kSerial
             ? SampleGaussianBatchSerial(mean, stddev, count, stream)
             : SampleGaussianBatchParallel(mean, stddev, count, stream, exec.threads);
}

Matrix SampleUniformBatchSerial(int dim, int count, const BatchStream& stream) {
  Matrix samples(dim, count);
  for (int l = 0; l < count; ++l) FillUniformColumn(stream, l, samples.col(l));
  return samples;
}

Matrix SampleUniformBatchParallel(int dim, int count, const BatchStream& stream, int threads) {
  Matrix samples(dim, count);
  ParallelFor(count, threads, [&](int l) { FillUniformColumn(stream, l, samples.col(l)); });
  return samples;
}

Matrix SampleUniformBatch(int dim, int count, const BatchStream& stream,
                          const ExecOptions& exec) {
  return exec.policy == ExecPolicy::kSerial
             ? SampleUniformBatchSerial(dim, count, stream)
             : SampleUniformBatchParallel(dim, count, stream, exec.threads);
}

std::vector<Evaluation> EvaluateBatchSerial(const LatentObjective& objective,
                                            const Matrix& samples, double lambda) {
  std::vector<Evaluation> out(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index l = 0; l < samples.cols(); ++l) {
    out[static_cast<std::size_t>(l)] = objective.Evaluate(samples.col(l), lambda);
  }
  return out;
}

std::vector<Evaluation> EvaluateBatchParallel(const LatentObjective& objective,
                                              const Matrix& samples, double lambda, int threads) {
  std::vector<Evaluation> out(static_cast<std::size_t>(samples.cols()));
  ParallelFor(static_cast<int>(samples.cols()), threads, [&](int l) {
    out[static_cast<std::size_t>(l)] = objective.Evaluate(samples.col(l), lambda);
  });
  return out;
}

std::vector<Evaluation> EvaluateBatch(const LatentObjective& objective, const Matrix& samples,
                                      double lambda, const ExecOptions& exec) {
  return exec.policy == ExecPolicy::kSerial
             ? EvaluateBatchSerial(objective, samples, lambda)
             : EvaluateBatchParallel(objective, samples, lambda, exec.threads);
}

Vector WeightedMean(const Matrix& samples, std::span<const double> weights) {
  if (static_cast<Eigen::Index>(weights.size()) != samples.cols()) {
    throw ShapeError("weighted_mean: one weight per sample is required");
  }
  Vector mean = Vector::Zero(samples.rows());
  for (Eigen::Index l = 0; l < samples.cols(); ++l) {
    mean += weights[static_cast<std::size_t>(l)] * samples.col(l);
  }
  return mean;
}

}  // namespace mbdtraj
