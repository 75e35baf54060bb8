#pragma once

// Seeded head-to-head runs of every method over a set of scenarios.

#include <cstdint>
#include <string>
#include <vector>

#include "mbdtraj/scenario.hpp"

namespace mbdtraj {

struct BenchRow {
  std::string scenario;
  Method method = Method::kMbd;
  std::uint64_t seed = 0;
  Evaluation final;
  std::int64_t evaluations = 0;
  double wall_ms = 0.0;
};

// Seeds first_seed .. first_seed + seeds - 1 for every (scenario, method).
// Baselines get the diffusion solver's sample budget.
std::vector<BenchRow> RunBench(const std::vector<Scenario>& scenarios, int seeds,
                               const ExecOptions& exec, std::uint64_t first_seed = 0);

// scenario,method,seed,V,E,R,feasible,evaluations,wall_ms
std::string BenchRunsCsv(const std::vector<BenchRow>& rows);

// scenario,method,runs,mean_V,mean_E,feasibility_rate,mean_wall_ms
std::string BenchSummaryCsv(const std::vector<BenchRow>& rows);

}  // namespace mbdtraj
