#pragma once

// Data-parallel batch kernels shared by the diffusion solver and the baselines.
//
// Each kernel has a serial reference and an OpenMP variant. Both write every
// column from its own inputs only (per-sample RNG streams, per-sample
// objective calls), so the two produce bit-identical output for any thread
// count. Reductions across samples are never done inside parallel regions.

#include <cstdint>
#include <span>
#include <vector>

#include "mbdtraj/common.hpp"
#include "mbdtraj/objective.hpp"
#include "mbdtraj/rng.hpp"

namespace mbdtraj {

enum class ExecPolicy { kSerial, kParallel };

struct ExecOptions {
  ExecPolicy policy = ExecPolicy::kParallel;
  int threads = 0;  // 0: OpenMP default
};

// Draw descriptor for one batch: column l uses stream (seed, tag, step, l).
struct BatchStream {
  std::uint64_t seed = 0;
  StreamTag tag = StreamTag::kDiffusionSample;
  std::uint64_t step = 0;
};

// Column l = clip(mean + stddev o z_l, -1, 1), z_l standard normal. stddev is
// either one entry (isotropic) or dim entries.
Matrix SampleGaussianBatchSerial(const Vector& mean, const Vector& stddev, int count,
                                 const BatchStream& stream);
Matrix SampleGaussianBatchParallel(const Vector& mean, const Vector& stddev, int count,
                                   const BatchStream& stream, int threads);
Matrix SampleGaussianBatch(const Vector& mean, const Vector& stddev, int count,
                           const BatchStream& stream, const ExecOptions& exec);

// Uniform draws on [-1,1]^dim.
Matrix SampleUniformBatchSerial(int dim, int count, const BatchStream& stream);
Matrix SampleUniformBatchParallel(int dim, int count, const BatchStream& stream, int threads);
Matrix SampleUniformBatch(int dim, int count, const BatchStream& stream, const ExecOptions& exec);

std::vector<Evaluation> EvaluateBatchSerial(const LatentObjective& objective,
                                            const Matrix& samples, double lambda);
std::vector<Evaluation> EvaluateBatchParallel(const LatentObjective& objective,
                                              const Matrix& samples, double lambda, int threads);
std::vector<Evaluation> EvaluateBatch(const LatentObjective& objective, const Matrix& samples,
                                      double lambda, const ExecOptions& exec);

// sum_l w_l * samples.col(l), accumulated in column order.
Vector WeightedMean(const Matrix& samples, std::span<const double> weights);

}  // namespace mbdtraj
