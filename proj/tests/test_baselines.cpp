#include <atomic>
#include <cmath>

#include "doctest.h"
#include "mbdtraj/baselines.hpp"
#include "support.hpp"

using namespace mbdtraj;
using namespace mbdtraj::testing;

namespace {

BaselineConfig Config(BaselineMethod method, int population, int iterations, std::uint64_t seed = 0) {
  BaselineConfig cfg;
  cfg.method = method;
  cfg.population = population;
  cfg.iterations = iterations;
  cfg.seed = seed;
  return cfg;
}

CallableObjective Quadratic(int dim, double center) {
  ObjectiveConfig cfg;
  cfg.epsilon = 0.0;
  return CallableObjective(dim, cfg, [center](const Vector& y) {
    return std::pair<double, double>{(y.array() - center).square().sum(), 0.0};
  });
}

}  // namespace

TEST_CASE("baseline config validation") {
  CHECK_NOTHROW(Config(BaselineMethod::kCem, 2, 1).Validate());
  CHECK_THROWS_AS(Config(BaselineMethod::kCem, 1, 1).Validate(), ValidationError);
  CHECK_NOTHROW(Config(BaselineMethod::kRandomSearch, 1, 1).Validate());
  CHECK_THROWS_AS(Config(BaselineMethod::kRandomSearch, 4, 0).Validate(), ValidationError);
  BaselineConfig cfg = Config(BaselineMethod::kCem, 10, 1);
  cfg.elite_fraction = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), ValidationError);
  cfg.elite_fraction = 1.5;
  CHECK_THROWS_AS(cfg.Validate(), ValidationError);
  cfg.elite_fraction = 0.25;
  CHECK(cfg.EliteCount() == 3);
  cfg.elite_fraction = 0.01;
  CHECK(cfg.EliteCount() == 1);
  cfg.initial_std = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), ValidationError);
  CHECK(Config(BaselineMethod::kCem, 512, 100).Budget() == 51200);
}

TEST_CASE("random search with zero exploration returns the nominal") {
  ToyProblem toy = MakeToyProblem();
  toy.bounds.sigma.setZero();
  const TrajectoryObjective obj(toy.problem, toy.bounds);
  const SolveResult r = RunRandomSearch(obj, Config(BaselineMethod::kRandomSearch, 16, 3));
  CHECK(MapLatent(r.y_star, toy.bounds).matrix() == toy.bounds.theta0.matrix());
  const SolveResult c = RunCem(obj, Config(BaselineMethod::kCem, 16, 3));
  CHECK(MapLatent(c.y_star, toy.bounds).matrix() == toy.bounds.theta0.matrix());
}

TEST_CASE("random search with a budget of one returns that draw") {
  const CallableObjective obj = Quadratic(3, 0.0);
  const BaselineConfig cfg = Config(BaselineMethod::kRandomSearch, 1, 1, 42);
  const SolveResult r = RunRandomSearch(obj, cfg);
  const Matrix draw = SampleUniformBatch(3, 1, BatchStream{42, StreamTag::kRandomSearch, 0},
                                         ExecOptions{ExecPolicy::kSerial, 1});
  CHECK(r.y_star == draw.col(0));
  CHECK(r.trace.evaluations == 1);
  CHECK(r.final.R == (draw.col(0).array()).square().sum());
}

TEST_CASE("random search keeps the best candidate seen") {
  // trace rows hold the best of their own batch; the result is the best overall
  const CallableObjective obj = Quadratic(2, 0.5);
  const SolveResult r = RunRandomSearch(obj, Config(BaselineMethod::kRandomSearch, 64, 20, 3));
  REQUIRE(r.trace.records.size() == 20);
  double best = r.trace.records.front().best_R;
  for (const TraceRecord& rec : r.trace.records) {
    CHECK(rec.best_R <= rec.mean_R);
    best = std::min(best, rec.best_R);
  }
  CHECK(r.final.R == best);
  CHECK(r.final.R == obj.Evaluate(r.y_star, 10.0).R);
}

TEST_CASE("elite fit") {
  Matrix samples(2, 4);
  samples << 0.0, 1.0, 2.0, 3.0,  //
      1.0, 1.0, -1.0, -1.0;
  std::vector<Evaluation> evals(4);
  const double rs[] = {3.0, 1.0, 2.0, 0.5};
  for (int l = 0; l < 4; ++l) evals[static_cast<std::size_t>(l)].R = rs[l];
  const EliteFit two = FitElite(samples, evals, 2);  // columns 3 and 1
  CHECK(two.mean(0) == doctest::Approx(2.0));
  CHECK(two.mean(1) == doctest::Approx(0.0));
  CHECK(two.stddev(0) == doctest::Approx(1.0));
  CHECK(two.stddev(1) == doctest::Approx(1.0));
  const EliteFit all = FitElite(samples, evals, 4);
  CHECK(all.mean.isApprox(samples.rowwise().mean()));
  const EliteFit one = FitElite(samples, evals, 1);
  CHECK(one.stddev == Vector::Constant(2, 1e-6));
  CHECK_THROWS_AS(FitElite(samples, evals, 0), DomainError);
  CHECK_THROWS_AS(FitElite(samples, evals, 5), DomainError);
}

TEST_CASE("cem with elite fraction one follows the batch mean") {
  const CallableObjective obj = Quadratic(3, 0.2);
  BaselineConfig cfg = Config(BaselineMethod::kCem, 32, 1, 5);
  cfg.elite_fraction = 1.0;
  const Matrix batch = SampleGaussianBatch(Vector::Zero(3), Vector::Constant(1, cfg.initial_std), 32,
                                           BatchStream{5, StreamTag::kCem, 0}, ExecOptions{});
  const std::vector<Evaluation> evals = EvaluateBatch(obj, batch, cfg.penalty, ExecOptions{});
  const EliteFit fit = FitElite(batch, evals, cfg.EliteCount());
  CHECK(fit.mean.isApprox(batch.rowwise().mean(), 1e-14));
}

TEST_CASE("baselines are deterministic under a fixed seed") {
  const ToyProblem toy = MakeToyProblem();
  const TrajectoryObjective obj(toy.problem, toy.bounds);
  for (auto method : {BaselineMethod::kCem, BaselineMethod::kRandomSearch}) {
    const BaselineConfig cfg = Config(method, 32, 10, 8);
    const auto run = [&](const ExecOptions& exec) {
      return method == BaselineMethod::kCem ? RunCem(obj, cfg, exec) : RunRandomSearch(obj, cfg, exec);
    };
    const SolveResult a = run(ExecOptions{});
    const SolveResult b = run(ExecOptions{ExecPolicy::kSerial, 1});
    CHECK(a.y_star == b.y_star);
    CHECK(a.final.R == b.final.R);
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
      CHECK(a.trace.records[i].mean_R == b.trace.records[i].mean_R);
    }
  }
}

TEST_CASE("cem converges on a separable quadratic within 50 iterations") {
  const CallableObjective obj = Quadratic(6, -0.4);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    BaselineConfig cfg = Config(BaselineMethod::kCem, 200, 50, seed);
    const SolveResult r = RunCem(obj, cfg);
    CHECK((r.y_star.array() + 0.4).abs().maxCoeff() <= 1e-2);
  }
}

TEST_CASE("baselines consume exactly the declared budget and stay in the box") {
  std::atomic<long> calls{0};
  std::atomic<bool> outside{false};
  ObjectiveConfig ocfg;
  const CallableObjective obj(4, ocfg, [&](const Vector& y) {
    ++calls;
    if (y.cwiseAbs().maxCoeff() > 1.0) outside = true;
    return std::pair<double, double>{(y.array() - 3.0).square().sum(), 0.0};
  });
  for (auto method : {BaselineMethod::kCem, BaselineMethod::kRandomSearch}) {
    calls = 0;
    BaselineConfig cfg = Config(method, 37, 11, 1);
    cfg.initial_std = 2.0;
    const SolveResult r = method == BaselineMethod::kCem ? RunCem(obj, cfg) : RunRandomSearch(obj, cfg);
    CHECK(calls.load() == cfg.Budget());
    CHECK(r.trace.evaluations == cfg.Budget());
    CHECK(r.trace.records.size() == 11);
    CHECK_FALSE(outside.load());
  }
}

TEST_CASE("baseline traces hold the fixed penalty") {
  const CallableObjective obj = Quadratic(2, 0.0);
  BaselineConfig cfg = Config(BaselineMethod::kCem, 16, 5);
  cfg.penalty = 3.5;
  const SolveResult r = RunCem(obj, cfg);
  CHECK(r.trace.method == "cem");
  CHECK(r.final_lambda == 3.5);
  for (const TraceRecord& rec : r.trace.records) CHECK(rec.lambda == 3.5);
  CHECK(RunRandomSearch(obj, Config(BaselineMethod::kRandomSearch, 4, 2)).trace.method == "random");
}

TEST_CASE("random search does not beat diffusion on the toy problem") {
  // Same sample budget; the fixed penalty equals the diffusion solver's
  // initial lambda so both report R on the same scale.
  const ToyProblem toy = MakeToyProblem();
  const TrajectoryObjective obj(toy.problem, toy.bounds);
  int not_better = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SolverConfig scfg;
    scfg.seed = seed;
    const SolveResult mbd = SolveMbd(obj, scfg);
    BaselineConfig bcfg = Config(BaselineMethod::kRandomSearch, scfg.n_samples, scfg.n_steps, seed);
    bcfg.penalty = toy.problem.objective.lambda0;
    const SolveResult rs = RunRandomSearch(obj, bcfg);
    if (rs.final.R >= mbd.final.R) ++not_better;
  }
  CHECK(not_better >= 8);
}
