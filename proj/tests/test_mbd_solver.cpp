#include <atomic>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mbdtraj/mbd_solver.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace mbdtraj;
using namespace mbdtraj::testing;

namespace {

SolverConfig Small(int steps = 20, int samples = 64, std::uint64_t seed = 1) {
  SolverConfig cfg;
  cfg.n_steps = steps;
  cfg.n_samples = samples;
  cfg.seed = seed;
  return cfg;
}

// Separable quadratic with its minimum at 0.3 in every coordinate, E held at 0.
CallableObjective Quadratic(int dim) {
  ObjectiveConfig cfg;
  cfg.epsilon = 0.0;
  return CallableObjective(dim, cfg, [](const Vector& y) {
    return std::pair<double, double>{(y.array() - 0.3).square().sum(), 0.0};
  });
}

bool SameTrace(const RunTrace& a, const RunTrace& b) {
  if (a.records.size() != b.records.size() || a.evaluations != b.evaluations) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const TraceRecord& x = a.records[i];
    const TraceRecord& y = b.records[i];
    if (x.t != y.t || x.lambda != y.lambda || x.best_R != y.best_R || x.mean_R != y.mean_R ||
        x.V != y.V || x.E != y.E) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("single-step schedule") {
  SolverConfig cfg = Small(1);
  cfg.beta_max = 0.02;
  const NoiseSchedule s = BuildSchedule(cfg);
  CHECK(s.alpha_bar(0) == 1.0);
  CHECK(s.alpha_bar(1) == doctest::Approx(0.98).epsilon(1e-15));
}

TEST_CASE("linear schedule matches a 50-digit product") {
  // Products of (1 - beta_t) for the default betas, evaluated offline with
  // 50 significant digits.
  const NoiseSchedule s = BuildSchedule(Small(100));
  CHECK(RelErr(s.alpha_bar(100), 0.3635632480554919154472196) <= 1e-13);
  CHECK(RelErr(s.alpha_bar(50), 0.7771800826611794701944509) <= 1e-13);
  CHECK(s.alpha(1) == doctest::Approx(1.0 - 1e-4).epsilon(1e-15));
  CHECK(s.alpha(100) == doctest::Approx(0.98).epsilon(1e-15));
}

TEST_CASE("cosine schedule matches a 50-digit product") {
  SolverConfig cfg = Small(100);
  cfg.schedule = ScheduleKind::kCosine;
  const NoiseSchedule s = BuildSchedule(cfg);
  CHECK(RelErr(s.alpha_bar(50), 0.4938435904406377133165527) <= 1e-12);
  CHECK(RelErr(s.alpha_bar(100), 2.428572279350056303633848e-7) <= 1e-9);
}

TEST_CASE("schedule invariants") {
  Gen gen(3);
  for (int c = 0; c < 200; ++c) {
    SolverConfig cfg = Small(gen.Int(1, 400));
    cfg.schedule = c % 2 ? ScheduleKind::kCosine : ScheduleKind::kLinearBeta;
    cfg.beta_min = gen.Uniform(1e-6, 1e-3);
    cfg.beta_max = gen.Uniform(1e-3, 0.5);
    const NoiseSchedule s = BuildSchedule(cfg);
    REQUIRE(s.alpha_bar(0) == 1.0);
    for (int t = 1; t <= s.steps(); ++t) {
      REQUIRE(s.alpha(t) > 0.0);
      REQUIRE(s.alpha(t) < 1.0);
      REQUIRE(s.alpha_bar(t) == s.alpha_bar(t - 1) * s.alpha(t));
      REQUIRE(s.alpha_bar(t) < s.alpha_bar(t - 1));
    }
    REQUIRE(s.alpha_bar(s.steps()) > 0.0);
  }
}

TEST_CASE("solver config validation") {
  CHECK_NOTHROW(SolverConfig{}.Validate());
  SolverConfig cfg;
  cfg.n_samples = 1;
  CHECK_THROWS_AS(cfg.Validate(), ValidationError);
  cfg = {};
  cfg.temperature = 1.0;
  CHECK_THROWS_AS(cfg.Validate(), ValidationError);
  cfg = {};
  cfg.n_steps = 0;
  CHECK_THROWS_AS(cfg.Validate(), ValidationError);
  cfg = {};
  cfg.beta_max = 1.0;
  CHECK_THROWS_AS(BuildSchedule(cfg), ValidationError);
  cfg = {};
  cfg.beta_min = 0.0;
  CHECK_THROWS_AS(BuildSchedule(cfg), ValidationError);
  CHECK(ScheduleKindFromString("cosine") == ScheduleKind::kCosine);
  CHECK_THROWS_AS(ScheduleKindFromString("sigmoid"), ValidationError);
  CHECK_THROWS_AS(NoiseSchedule({0.5, 1.0}), ValidationError);
}

TEST_CASE("last step samples collapse onto the clipped iterate") {
  const NoiseSchedule s = BuildSchedule(Small(10));
  DiffusionState state;
  state.y = (Vector(3) << 0.2, 1.4, -2.0).finished();
  state.t = 1;
  state.seed = 5;
  const Matrix batch = SampleBatch(state, s, 16);
  for (int l = 0; l < 16; ++l) CHECK(batch.col(l) == ClipToBox(state.y));
}

TEST_CASE("sample mean matches y / sqrt(abar_{t-1}) within four standard errors") {
  const NoiseSchedule s = BuildSchedule(Small(100));
  DiffusionState state;
  state.y = (Vector(3) << 0.1, -0.2, 0.05).finished();
  state.t = 10;
  state.seed = 11;
  const int count = 100000;
  const Matrix batch = SampleBatch(state, s, count);
  const double abar = s.alpha_bar(9);
  const double sd = std::sqrt(1.0 / abar - 1.0);
  const Vector mean = batch.rowwise().mean();
  const Vector expected = state.y / std::sqrt(abar);
  for (int m = 0; m < 3; ++m) {
    CHECK(std::abs(mean(m) - expected(m)) <= 4.0 * sd / std::sqrt(count));
    const double var = (batch.row(m).array() - mean(m)).square().sum() / (count - 1);
    CHECK(std::sqrt(var) == doctest::Approx(sd).epsilon(0.02));
  }
}

TEST_CASE("sampling is deterministic per seed and step") {
  const NoiseSchedule s = BuildSchedule(Small(30));
  DiffusionState state;
  state.y = Vector::Constant(5, 0.3);
  state.t = 30;
  state.seed = 7;
  const Matrix a = SampleBatch(state, s, 40);
  CHECK(a == SampleBatch(state, s, 40));
  CHECK(a == SampleBatch(state, s, 40, ExecOptions{ExecPolicy::kSerial, 1}));
  CHECK(a.cwiseAbs().maxCoeff() <= 1.0);
  state.seed = 8;
  CHECK(a != SampleBatch(state, s, 40));
  state.seed = 7;
  state.t = 29;
  CHECK(a != SampleBatch(state, s, 40));
}

TEST_CASE("softmax weight examples") {
  CHECK(SoftmaxWeights(std::vector<double>{2.0, 2.0, 2.0, 2.0}, 0.1) == std::vector<double>(4, 0.25));
  const double tau = 0.4;
  const double a = 1.0 / tau;  // scores (+1, -1) normalize to (+a, -a)
  const std::vector<double> w = SoftmaxWeights(std::vector<double>{1.0, -1.0}, tau);
  CHECK(w[0] == doctest::Approx(std::exp(a) / (std::exp(a) + std::exp(-a))).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(std::exp(-a) / (std::exp(a) + std::exp(-a))).epsilon(1e-13));
  CHECK_THROWS_AS(SoftmaxWeights(std::vector<double>{1.0}, 0.1), DomainError);
  // near-constant batches fall back to uniform weights
  CHECK(SoftmaxWeights(std::vector<double>{1.0, 1.0 + 1e-14}, 0.1) == std::vector<double>(2, 0.5));
}

TEST_CASE("softmax weights are permutation equivariant") {
  Gen gen(19);
  for (int c = 0; c < 100; ++c) {
    std::vector<double> scores(static_cast<std::size_t>(gen.Int(2, 50)));
    for (double& x : scores) x = gen.Uniform(-5, 5);
    std::vector<std::size_t> perm(scores.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen.engine());
    std::vector<double> permuted(scores.size());
    for (std::size_t l = 0; l < perm.size(); ++l) permuted[l] = scores[perm[l]];
    const auto w = SoftmaxWeights(scores, 0.2);
    const auto wp = SoftmaxWeights(permuted, 0.2);
    for (std::size_t l = 0; l < perm.size(); ++l) REQUIRE(wp[l] == doctest::Approx(w[perm[l]]).epsilon(1e-12));
  }
}

TEST_CASE("softmax weight suite") {
  const CheckResult r = CheckSoftmaxSuite(1000, 23);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("score and update examples") {
  const NoiseSchedule s = BuildSchedule(Small(50));
  const Vector y = (Vector(3) << 0.4, -0.7, 0.1).finished();
  const int t = 20;
  const Vector fixed = ScoreAndUpdate(y, y / std::sqrt(s.alpha_bar(t)), s, t);
  CHECK((fixed - y / std::sqrt(s.alpha(t))).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(ScoreAndUpdate(y, Vector::Zero(3), s, t).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_THROWS_AS(ScoreAndUpdate(y, Vector::Zero(2), s, t), ShapeError);
}

TEST_CASE("composed update equals sqrt(abar_{t-1}) times the weighted mean") {
  const CheckResult r = CheckUpdateIdentity(1000, 29);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("initial state") {
  SolverConfig cfg = Small(25);
  const DiffusionState a = InitialState(6, cfg, 1.5);
  CHECK(a.t == 25);
  CHECK(a.lambda == 1.5);
  CHECK(a.y.size() == 6);
  CHECK(a.y == InitialState(6, cfg, 1.5).y);
  cfg.seed = 2;
  CHECK(a.y != InitialState(6, cfg, 1.5).y);
}

TEST_CASE("solver trace shape and bookkeeping") {
  const ToyProblem toy = MakeToyProblem();
  const TrajectoryObjective obj(toy.problem, toy.bounds);
  const SolveResult r = SolveMbd(obj, Small(30, 32));
  REQUIRE(r.trace.records.size() == 30);
  CHECK(r.trace.method == "mbd");
  CHECK(r.trace.evaluations == 30 * 33);
  for (std::size_t i = 0; i < r.trace.records.size(); ++i) {
    const TraceRecord& rec = r.trace.records[i];
    CHECK(rec.t == 30 - static_cast<int>(i));
    CHECK(rec.lambda >= 0.0);
    CHECK(rec.best_R <= rec.mean_R);
    if (i > 0) CHECK(rec.wall_ms >= r.trace.records[i - 1].wall_ms);
  }
  CHECK(r.trace.records.front().lambda == toy.problem.objective.lambda0);
  CHECK(r.y_star.cwiseAbs().maxCoeff() <= 1.0);
  const Evaluation again = obj.Evaluate(r.y_star, r.final_lambda);
  CHECK(again.V == r.final.V);
  CHECK(again.E == r.final.E);
  CHECK(again.R == r.final.R);
}

TEST_CASE("penalty follows the configured sign") {
  // E stays at 1 while epsilon is 0.5: dual ascent raises lambda by gamma/2
  // per step, the literal sign lowers it to zero.
  ObjectiveConfig cfg;
  cfg.epsilon = 0.5;
  cfg.gamma = 0.2;
  cfg.lambda0 = 1.0;
  const CallableObjective up(2, cfg, [](const Vector&) { return std::pair<double, double>{0.0, 1.0}; });
  const SolveResult a = SolveMbd(up, Small(10, 8));
  CHECK(a.final_lambda == doctest::Approx(2.0).epsilon(1e-12));
  cfg.penalty_sign = PenaltySign::kPaperLiteral;
  const CallableObjective down(2, cfg, [](const Vector&) { return std::pair<double, double>{0.0, 1.0}; });
  const SolveResult b = SolveMbd(down, Small(10, 8));
  CHECK(b.final_lambda <= 1e-12);
  CHECK(b.trace.penalty_sign == PenaltySign::kPaperLiteral);
}

TEST_CASE("every evaluated candidate lies in the box") {
  std::atomic<bool> outside{false};
  ObjectiveConfig cfg;
  const CallableObjective obj(5, cfg, [&](const Vector& y) {
    if (y.cwiseAbs().maxCoeff() > 1.0) outside = true;
    return std::pair<double, double>{(y.array() - 2.0).square().sum(), 0.0};
  });
  SolveMbd(obj, Small(40, 64));
  CHECK_FALSE(outside.load());
}

TEST_CASE("zero exploration returns the nominal") {
  ToyProblem toy = MakeToyProblem();
  toy.bounds.sigma.setZero();
  const TrajectoryObjective obj(toy.problem, toy.bounds);
  for (std::uint64_t seed : {0, 1, 2}) {
    for (int steps : {1, 7}) {
      const SolveResult r = SolveMbd(obj, Small(steps, 16, seed));
      CHECK(MapLatent(r.y_star, toy.bounds).matrix() == toy.bounds.theta0.matrix());
    }
  }
}

TEST_CASE("solver is deterministic and seed-sensitive") {
  const ToyProblem toy = MakeToyProblem();
  const TrajectoryObjective obj(toy.problem, toy.bounds);
  const SolveResult a = SolveMbd(obj, Small(25, 48, 3));
  const SolveResult b = SolveMbd(obj, Small(25, 48, 3));
  const SolveResult serial = SolveMbd(obj, Small(25, 48, 3), ExecOptions{ExecPolicy::kSerial, 1});
  CHECK(SameTrace(a.trace, b.trace));
  CHECK(SameTrace(a.trace, serial.trace));
  CHECK(a.y_star == serial.y_star);
  const SolveResult c = SolveMbd(obj, Small(25, 48, 4));
  CHECK(a.trace.records.front().mean_R != c.trace.records.front().mean_R);
}

TEST_CASE("solver drives a quadratic to its minimum") {
  const CallableObjective obj = Quadratic(4);
  const SolveResult r = SolveMbd(obj, Small(100, 256, 9));
  CHECK((r.y_star.array() - 0.3).abs().maxCoeff() <= 2e-2);
}

TEST_CASE("toy problem reaches the analytic minimum time within 5%") {
  const ToyProblem toy = MakeToyProblem();
  const TrajectoryObjective obj(toy.problem, toy.bounds);
  const double v_star = toy.OptimalTime();
  REQUIRE(v_star == doctest::Approx(0.3));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SolverConfig cfg;
    cfg.seed = seed;
    const SolveResult r = SolveMbd(obj, cfg);
    INFO("seed " << seed << ": R = " << r.final.R);
    CHECK(std::abs(r.final.R - v_star) <= 0.05 * v_star);
  }
}
