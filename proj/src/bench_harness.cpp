#include "mbdtraj/bench_harness.hpp"

#include <chrono>
#include <map>

#include "mbdtraj/scenario_io.hpp"

namespace mbdtraj {

std::vector<BenchRow> RunBench(const std::vector<Scenario>& scenarios, int seeds,
                               const ExecOptions& exec, std::uint64_t first_seed) {
  std::vector<BenchRow> rows;
  for (const Scenario& base : scenarios) {
    Scenario sc = base;
    sc.cem = MatchedBudget(base, BaselineMethod::kCem);
    sc.random_search = MatchedBudget(base, BaselineMethod::kRandomSearch);
    for (const Method method : {Method::kMbd, Method::kCem, Method::kRandom}) {
      for (int k = 0; k < seeds; ++k) {
        const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(k);
        const auto start = std::chrono::steady_clock::now();
        const ResultBundle bundle = Run(sc, method, seed, exec);
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        rows.push_back({sc.name, method, seed, bundle.final, bundle.trace.evaluations, ms});
      }
    }
  }
  return rows;
}

std::string BenchRunsCsv(const std::vector<BenchRow>& rows) {
  std::string out = "scenario,method,seed,V,E,R,feasible,evaluations,wall_ms\n";
  for (const BenchRow& r : rows) {
    out += r.scenario + "," + ToString(r.method) + "," + std::to_string(r.seed) + "," +
           FormatDouble(r.final.V) + "," + FormatDouble(r.final.E) + "," + FormatDouble(r.final.R) +
           "," + (r.final.feasible ? "1" : "0") + "," + std::to_string(r.evaluations) + "," +
           FormatDouble(r.wall_ms) + "\n";
  }
  return out;
}

std::string BenchSummaryCsv(const std::vector<BenchRow>& rows) {
  struct Acc {
    int runs = 0;
    double v = 0.0;
    double e = 0.0;
    int feasible = 0;
    double ms = 0.0;
  };
  // Keyed on first appearance so the summary follows the run order.
  std::vector<std::pair<std::string, Method>> order;
  std::map<std::pair<std::string, Method>, Acc> acc;
  for (const BenchRow& r : rows) {
    const auto key = std::make_pair(r.scenario, r.method);
    if (!acc.contains(key)) order.push_back(key);
    Acc& a = acc[key];
    ++a.runs;
    a.v += r.final.V;
    a.e += r.final.E;
    a.feasible += r.final.feasible ? 1 : 0;
    a.ms += r.wall_ms;
  }
  std::string out = "scenario,method,runs,mean_V,mean_E,feasibility_rate,mean_wall_ms\n";
  for (const auto& key : order) {
    const Acc& a = acc.at(key);
    out += key.first + "," + ToString(key.second) + "," + std::to_string(a.runs) + "," +
           FormatDouble(a.v / a.runs) + "," + FormatDouble(a.e / a.runs) + "," +
           FormatDouble(static_cast<double>(a.feasible) / a.runs) + "," +
           FormatDouble(a.ms / a.runs) + "\n";
  }
  return out;
}

}  // namespace mbdtraj
