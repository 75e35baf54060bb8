// mbdtraj command-line front end.
//
//   mbdtraj solve <scenario> [--method mbd|cem|random] [--seed S] [--out DIR] [--threads K]
//   mbdtraj validate <scenario>
//   mbdtraj bench <scenario...> [--seeds K] [--out DIR] [--threads K]
//   mbdtraj verify <result.json>
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "mbdtraj/bench_harness.hpp"
#include "mbdtraj/scenario_io.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

mbdtraj::ExecOptions MakeExec(int threads) {
  mbdtraj::ExecOptions exec;
  exec.threads = threads;
  exec.policy = threads == 1 ? mbdtraj::ExecPolicy::kSerial : mbdtraj::ExecPolicy::kParallel;
  return exec;
}

int CmdValidate(const std::string& path) {
  const mbdtraj::Scenario sc = mbdtraj::LoadScenario(path);
  const mbdtraj::NominalInit init = mbdtraj::InitializeNominal(sc);
  double worst = 0.0;
  for (double r : init.ik.residuals) worst = std::max(worst, r);
  std::cout << "scenario '" << sc.name << "': ok\n"
            << "  joints n = " << sc.joints() << " (" << sc.problem.arm1.dof() << " + "
            << sc.problem.arm2.dof() << ")\n"
            << "  basis d = " << sc.problem.basis.d << ", N = " << sc.problem.basis.segments()
            << ", exponent order " << mbdtraj::ToString(sc.problem.basis.order) << "\n"
            << "  nominal IK worst residual " << worst << " ("
            << init.ik.unconverged.size() << " unconverged samples)\n"
            << "  collapsed exploration coefficients: " << init.bounds.collapsed.size() << "\n";
  const mbdtraj::Evaluation nominal = mbdtraj::AdaptiveCost(
      init.bounds.theta0, sc.problem.objective.lambda0, sc.problem);
  std::cout << "  nominal V = " << nominal.V << " s, E = " << nominal.E
            << (nominal.feasible ? " (feasible)\n" : " (infeasible)\n");
  for (const auto& [j, k] : init.bounds.collapsed) {
    std::cout << "    warning: |theta0[" << j << "][" << k << "]| exceeds qbar/d, sigma = 0\n";
  }
  return 0;
}

int CmdSolve(const std::string& path, const std::string& method_name,
             std::optional<std::uint64_t> seed, const std::string& out_dir, int threads) {
  const mbdtraj::Scenario sc = mbdtraj::LoadScenario(path);
  const mbdtraj::Method method = mbdtraj::MethodFromString(method_name);
  const mbdtraj::ResultBundle bundle =
      mbdtraj::Run(sc, method, seed.value_or(sc.seed), MakeExec(threads));
  mbdtraj::Emit(bundle, out_dir);
  std::printf("%s seed=%llu V=%.6f E=%.6g R=%.6f feasible=%s evaluations=%lld -> %s\n",
              mbdtraj::ToString(method), static_cast<unsigned long long>(bundle.seed),
              bundle.final.V, bundle.final.E, bundle.final.R,
              bundle.final.feasible ? "true" : "false",
              static_cast<long long>(bundle.trace.evaluations), out_dir.c_str());
  return 0;
}

int CmdBench(const std::vector<std::string>& paths, int seeds, const std::string& out_dir,
             int threads) {
  std::vector<mbdtraj::Scenario> scenarios;
  for (const std::string& p : paths) scenarios.push_back(mbdtraj::LoadScenario(p));
  const auto rows = mbdtraj::RunBench(scenarios, seeds, MakeExec(threads));
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw mbdtraj::IoError("cannot create output directory " + out_dir);
  const std::string summary = mbdtraj::BenchSummaryCsv(rows);
  mbdtraj::WriteTextFile(std::filesystem::path(out_dir) / "runs.csv", mbdtraj::BenchRunsCsv(rows));
  mbdtraj::WriteTextFile(std::filesystem::path(out_dir) / "summary.csv", summary);
  std::cout << summary;
  return 0;
}

int CmdVerify(const std::string& path) {
  const mbdtraj::VerifyReport report = mbdtraj::VerifyResult(mbdtraj::LoadJsonFile(path));
  std::printf("recorded   V=%.17g E=%.17g R=%.17g\n", report.recorded.V, report.recorded.E,
              report.recorded.R);
  std::printf("recomputed V=%.17g E=%.17g R=%.17g\n", report.recomputed.V, report.recomputed.E,
              report.recomputed.R);
  std::printf("%s\n", report.bit_identical ? "bit-identical" : "MISMATCH");
  return report.bit_identical ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-time dual-arm trajectories by model-based diffusion"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string method = "mbd";
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  int threads = 0;
  auto* solve = app.add_subcommand("solve", "Optimize one scenario and write result files");
  solve->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  solve->add_option("--method", method, "mbd, cem or random")
      ->check(CLI::IsMember({"mbd", "cem", "random"}));
  solve->add_option("--seed", seed, "Overrides the scenario seed");
  solve->add_option("--out", out_dir, "Output directory");
  solve->add_option("--threads", threads, "Worker threads (0: all, 1: serial kernels)")
      ->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "Check a scenario and its nominal initialization");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  std::vector<std::string> bench_paths;
  int seeds = 10;
  auto* bench = app.add_subcommand("bench", "Run all methods over several seeds");
  bench->add_option("scenarios", bench_paths, "Scenario JSON files")->required();
  bench->add_option("--seeds", seeds, "Seeds per (scenario, method)")->check(CLI::PositiveNumber);
  bench->add_option("--out", out_dir, "Output directory");
  bench->add_option("--threads", threads, "Worker threads (0: all, 1: serial kernels)")
      ->check(CLI::NonNegativeNumber);

  std::string result_path;
  auto* verify = app.add_subcommand("verify", "Re-evaluate theta* of a result.json");
  verify->add_option("result", result_path, "result.json written by solve")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*solve) return CmdSolve(scenario_path, method, seed, out_dir, threads);
    if (*validate) return CmdValidate(scenario_path);
    if (*bench) return CmdBench(bench_paths, seeds, out_dir, threads);
    if (*verify) return CmdVerify(result_path);
  } catch (const mbdtraj::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed document: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
