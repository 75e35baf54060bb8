#include "mbdtraj/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mbdtraj {

using nlohmann::json;

namespace {

constexpr double kQuaternionSlack = 1e-6;

// A JSON node together with its dotted path, for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  [[noreturn]] void Fail(const std::string& what) const {
    throw ValidationError(path_ + ": " + what);
  }

  bool Has(const std::string& key) const { return value_.is_object() && value_.contains(key); }

  Node At(const std::string& key) const {
    if (!value_.is_object()) Fail("expected an object");
    if (!value_.contains(key)) Node(value_, Join(key)).Fail("required field is missing");
    return Node(value_.at(key), Join(key));
  }

  Node At(std::size_t index) const {
    return Node(value_.at(index), path_ + "[" + std::to_string(index) + "]");
  }

  std::size_t Size() const {
    if (!value_.is_array()) Fail("expected an array");
    return value_.size();
  }

  double Number() const {
    if (!value_.is_number()) Fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) Fail("expected a finite number");
    return v;
  }

  int Int() const {
    if (!value_.is_number_integer()) Fail("expected an integer");
    return value_.get<int>();
  }

  std::uint64_t UInt64() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<long long>() >= 0)) {
      Fail("expected a non-negative integer");
    }
    return value_.get<std::uint64_t>();
  }

  bool Bool() const {
    if (!value_.is_boolean()) Fail("expected true or false");
    return value_.get<bool>();
  }

  std::string String() const {
    if (!value_.is_string()) Fail("expected a string");
    return value_.get<std::string>();
  }

  std::vector<double> Numbers() const {
    std::vector<double> out(Size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = At(i).Number();
    return out;
  }

  Eigen::Vector3d Vec3() const {
    if (Size() != 3) Fail("expected 3 numbers");
    return {At(0).Number(), At(1).Number(), At(2).Number()};
  }

  // [w, x, y, z], renormalized when within 1e-6 of unit length.
  Eigen::Matrix3d Rotation() const {
    if (Size() != 4) Fail("expected a quaternion [w, x, y, z]");
    Eigen::Quaterniond q(At(0).Number(), At(1).Number(), At(2).Number(), At(3).Number());
    if (std::abs(q.norm() - 1.0) > kQuaternionSlack) Fail("quaternion is not unit length");
    q.normalize();
    return q.toRotationMatrix();
  }

  Pose ReadPose() const {
    Pose pose = Pose::Identity();
    if (Has("translation")) pose.translation() = At("translation").Vec3();
    if (Has("rotation")) pose.linear() = At("rotation").Rotation();
    return pose;
  }

  double NumberOr(const std::string& key, double fallback) const {
    return Has(key) ? At(key).Number() : fallback;
  }
  int IntOr(const std::string& key, int fallback) const {
    return Has(key) ? At(key).Int() : fallback;
  }

  const std::string& path() const { return path_; }

 private:
  std::string Join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& value_;
  std::string path_;
};

ArmModel ParseArm(const Node& node, int index) {
  ArmModel arm;
  arm.name = node.Has("name") ? node.At("name").String() : "arm" + std::to_string(index + 1);
  if (node.Has("base")) arm.base = node.At("base").ReadPose();
  if (node.Has("tool")) arm.tool = node.At("tool").ReadPose();
  const Node joints = node.At("joints");
  const auto dof = static_cast<int>(joints.Size());
  arm.joint_limits.resize(dof);
  arm.velocity_limits.resize(dof);
  for (int j = 0; j < dof; ++j) {
    const Node jn = joints.At(static_cast<std::size_t>(j));
    RevoluteJoint joint;
    if (jn.Has("link")) joint.link = jn.At("link").ReadPose();
    joint.axis = jn.At("axis").Vec3();
    if (std::abs(joint.axis.norm() - 1.0) > 1e-9) jn.At("axis").Fail("axis must be a unit vector");
    arm.joints.push_back(joint);
    arm.joint_limits(j) = jn.At("position_limit").Number();
    if (!(arm.joint_limits(j) > 0.0)) {
      jn.At("position_limit").Fail("joint " + std::to_string(j) + " position limit must be positive");
    }
    arm.velocity_limits(j) = jn.At("velocity_limit").Number();
    if (!(arm.velocity_limits(j) > 0.0)) {
      jn.At("velocity_limit").Fail("joint " + std::to_string(j) + " velocity limit must be positive");
    }
  }
  return arm;
}

BasisConfig ParseBasis(const Node& node) {
  const int d = node.At("d").Int();
  const int n = node.At("N").Int();
  if (d < 1) node.At("d").Fail("must be >= 1");
  if (n < 1) node.At("N").Fail("must be >= 1");
  const ExponentOrder order = node.Has("exponent_order")
                                  ? ExponentOrderFromString(node.At("exponent_order").String())
                                  : ExponentOrder::kDegreeDm1;
  BasisConfig cfg = BasisConfig::Uniform(d, n, order);
  if (node.Has("s_grid")) {
    cfg.s_grid = node.At("s_grid").Numbers();
    if (cfg.samples() != n + 1) node.At("s_grid").Fail("must hold N+1 values");
  }
  try {
    cfg.Validate();
  } catch (const ValidationError& e) {
    node.Fail(e.what());
  }
  return cfg;
}

DesiredPath ParsePath(const Node& node, const BasisConfig& basis) {
  const std::string type = node.At("type").String();
  DesiredPath path;
  if (type == "poses") {
    const Node poses = node.At("poses");
    for (std::size_t i = 0; i < poses.Size(); ++i) {
      path.poses.push_back(RelativePose::FromPose(poses.At(i).ReadPose()));
    }
    return path;
  }
  const Eigen::Matrix3d rotation =
      node.Has("rotation") ? node.At("rotation").Rotation() : Eigen::Matrix3d::Identity();
  if (type == "line") {
    const Eigen::Vector3d start = node.At("start").Vec3();
    const Eigen::Vector3d end = node.At("end").Vec3();
    for (double s : basis.s_grid) path.poses.push_back({rotation, start + s * (end - start)});
    return path;
  }
  if (type == "arc") {
    const Eigen::Vector3d center = node.At("center").Vec3();
    const double radius = node.At("radius").Number();
    if (!(radius > 0.0)) node.At("radius").Fail("must be positive");
    const double a0 = node.At("start_angle").Number();
    const double a1 = node.At("end_angle").Number();
    const Eigen::Vector3d u = node.Has("u") ? node.At("u").Vec3() : Eigen::Vector3d::UnitX();
    const Eigen::Vector3d v = node.Has("v") ? node.At("v").Vec3() : Eigen::Vector3d::UnitY();
    for (double s : basis.s_grid) {
      const double a = a0 + s * (a1 - a0);
      path.poses.push_back({rotation, center + radius * (std::cos(a) * u + std::sin(a) * v)});
    }
    return path;
  }
  node.At("type").Fail("expected poses, line or arc, got '" + type + "'");
}

ObjectiveConfig ParseObjective(const Node& node) {
  ObjectiveConfig cfg;
  cfg.epsilon = node.NumberOr("epsilon", cfg.epsilon);
  cfg.gamma = node.NumberOr("gamma", cfg.gamma);
  cfg.lambda0 = node.NumberOr("lambda0", cfg.lambda0);
  cfg.orientation_weight = node.NumberOr("orientation_weight", cfg.orientation_weight);
  if (node.Has("penalty_sign")) {
    cfg.penalty_sign = PenaltySignFromString(node.At("penalty_sign").String());
  }
  try {
    cfg.Validate();
  } catch (const ValidationError& e) {
    node.Fail(e.what());
  }
  return cfg;
}

SolverConfig ParseSolver(const Node& node) {
  SolverConfig cfg;
  cfg.n_steps = node.IntOr("steps", cfg.n_steps);
  cfg.n_samples = node.IntOr("samples", cfg.n_samples);
  cfg.temperature = node.NumberOr("temperature", cfg.temperature);
  if (node.Has("schedule")) cfg.schedule = ScheduleKindFromString(node.At("schedule").String());
  cfg.beta_min = node.NumberOr("beta_min", cfg.beta_min);
  cfg.beta_max = node.NumberOr("beta_max", cfg.beta_max);
  cfg.cosine_offset = node.NumberOr("cosine_offset", cfg.cosine_offset);
  try {
    cfg.Validate();
  } catch (const ValidationError& e) {
    node.Fail(e.what());
  }
  return cfg;
}

BaselineConfig ParseBaseline(const Node& node, BaselineConfig cfg, double penalty) {
  cfg.penalty = penalty;
  cfg.population = node.IntOr("population", cfg.population);
  cfg.elite_fraction = node.NumberOr("elite_fraction", cfg.elite_fraction);
  cfg.iterations = node.IntOr("iterations", cfg.iterations);
  cfg.initial_std = node.NumberOr("initial_std", cfg.initial_std);
  try {
    cfg.Validate();
  } catch (const ValidationError& e) {
    node.Fail(e.what());
  }
  return cfg;
}

json PoseJson(const Eigen::Vector3d& t, const Eigen::Quaterniond& q) {
  return {{"translation", {t.x(), t.y(), t.z()}}, {"rotation", {q.w(), q.x(), q.y(), q.z()}}};
}

json MatrixJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json VectorJson(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix MatrixFromJson(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = n == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.at(0).size());
  Matrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = rows.at(i).at(j).get<double>();
  }
  return out;
}

Vector VectorFromJson(const json& values) {
  const auto v = values.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json EvaluationJson(const Evaluation& e) {
  return {{"V", e.V}, {"E", e.E}, {"R", e.R}, {"feasible", e.feasible}};
}

Evaluation EvaluationFromJson(const json& j) {
  return {j.at("V").get<double>(), j.at("E").get<double>(), j.at("R").get<double>(),
          j.at("feasible").get<bool>()};
}

bool SameBits(const Evaluation& a, const Evaluation& b) {
  return a.V == b.V && a.E == b.E && a.R == b.R && a.feasible == b.feasible;
}

}  // namespace

Scenario ParseScenario(const json& doc) {
  const Node root(doc, "");
  if (!doc.is_object()) root.Fail("scenario must be a JSON object");
  Scenario sc;
  sc.source = doc;
  sc.name = root.Has("name") ? root.At("name").String() : "scenario";

  const Node arms = root.At("arms");
  if (arms.Size() != 2) arms.Fail("exactly two arms are required");
  sc.problem.arm1 = ParseArm(arms.At(0), 0);
  sc.problem.arm2 = ParseArm(arms.At(1), 1);
  sc.problem.basis = ParseBasis(root.At("basis"));
  sc.problem.path = ParsePath(root.At("path"), sc.problem.basis);
  if (sc.problem.path.samples() != sc.problem.basis.samples()) {
    std::ostringstream msg;
    msg << "path length " << sc.problem.path.samples() << " differs from N+1 = "
        << sc.problem.basis.samples();
    root.At("path").Fail(msg.str());
  }
  if (root.Has("objective")) sc.problem.objective = ParseObjective(root.At("objective"));

  const int n = sc.problem.joints();
  if (n < 1) arms.Fail("the two arms need at least one joint in total");
  if (root.Has("q_init")) {
    const std::vector<double> q = root.At("q_init").Numbers();
    if (static_cast<int>(q.size()) != n) {
      root.At("q_init").Fail("expected " + std::to_string(n) + " entries (dof1 + dof2)");
    }
    sc.q_init = Eigen::Map<const Vector>(q.data(), n);
  } else {
    sc.q_init = Vector::Zero(n);
  }
  if (root.Has("ik")) {
    const Node ik = root.At("ik");
    sc.ik.tol = ik.NumberOr("tol", sc.ik.tol);
    sc.ik.max_iters = ik.IntOr("max_iters", sc.ik.max_iters);
    sc.ik.damping = ik.NumberOr("damping", sc.ik.damping);
    sc.ik.max_step = ik.NumberOr("max_step", sc.ik.max_step);
  }
  if (root.Has("solver")) sc.solver = ParseSolver(root.At("solver"));

  double penalty = BaselineConfig{}.penalty;
  if (root.Has("baselines")) {
    const Node b = root.At("baselines");
    penalty = b.NumberOr("penalty", penalty);
    if (!(penalty >= 0.0)) b.At("penalty").Fail("must be >= 0");
    sc.cem.penalty = penalty;
    sc.random_search.penalty = penalty;
    if (b.Has("cem")) sc.cem = ParseBaseline(b.At("cem"), sc.cem, penalty);
    if (b.Has("random_search")) {
      sc.random_search = ParseBaseline(b.At("random_search"), sc.random_search, penalty);
    }
  }
  if (root.Has("seed")) sc.seed = root.At("seed").UInt64();
  sc.solver.seed = sc.seed;
  sc.cem.seed = sc.seed;
  sc.random_search.seed = sc.seed;

  sc.Validate();
  return sc;
}

Scenario ParseScenarioText(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << "parse error at line " << line << ", column " << column << ": " << e.what();
    throw ValidationError(msg.str());
  }
  return ParseScenario(doc);
}

namespace {
std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return buf.str();
}
}  // namespace

Scenario LoadScenario(const std::filesystem::path& path) {
  return ParseScenarioText(ReadTextFile(path));
}

json LoadJsonFile(const std::filesystem::path& path) {
  const std::string text = ReadTextFile(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string FormatDouble(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

json BundleToJson(const ResultBundle& b) {
  json doc;
  doc["tool"] = "mbdtraj";
  doc["version"] = b.tool_version;
  doc["scenario_name"] = b.scenario_name;
  doc["method"] = ToString(b.method);
  doc["seed"] = b.seed;
  doc["scenario"] = b.scenario_echo;

  json collapsed = json::array();
  for (const auto& [j, k] : b.collapsed) collapsed.push_back({j, k});
  doc["nominal"] = {{"ik_residuals", b.ik_residuals},
                    {"theta0", MatrixJson(b.theta0.matrix())},
                    {"sigma", MatrixJson(b.sigma)},
                    {"collapsed", collapsed}};

  doc["theta_star"] = MatrixJson(b.theta_star.matrix());
  doc["y_star"] = VectorJson(b.y_star);
  doc["final"] = EvaluationJson(b.final);
  doc["final"]["lambda"] = b.final_lambda;
  doc["trajectory"] = {{"s", b.s_grid}, {"q", MatrixJson(b.trajectory.q)}};

  json poses = json::array();
  for (const PoseRecord& p : b.relative_poses) poses.push_back(PoseJson(p.translation, p.rotation));
  doc["relative_poses"] = poses;

  json errors = json::array();
  for (const SampleError& e : b.path_errors) errors.push_back({e.translation, e.rotation});
  doc["path_errors"] = errors;

  json records = json::array();
  for (const TraceRecord& r : b.trace.records) {
    records.push_back({r.t, r.lambda, r.best_R, r.mean_R, r.V, r.E, r.wall_ms});
  }
  doc["trace"] = {{"method", b.trace.method},
                  {"penalty_sign", ToString(b.trace.penalty_sign)},
                  {"evaluations", b.trace.evaluations},
                  {"columns", {"t", "lambda", "best_R", "mean_R", "V", "E", "wall_ms"}},
                  {"records", records}};
  return doc;
}

ResultBundle BundleFromJson(const json& doc) {
  ResultBundle b;
  b.tool_version = doc.at("version").get<std::string>();
  b.scenario_name = doc.at("scenario_name").get<std::string>();
  b.method = MethodFromString(doc.at("method").get<std::string>());
  b.seed = doc.at("seed").get<std::uint64_t>();
  b.scenario_echo = doc.at("scenario");

  const json& nominal = doc.at("nominal");
  b.ik_residuals = nominal.at("ik_residuals").get<std::vector<double>>();
  b.theta0 = CoefficientVector(MatrixFromJson(nominal.at("theta0")));
  b.sigma = MatrixFromJson(nominal.at("sigma"));
  for (const json& c : nominal.at("collapsed")) {
    b.collapsed.emplace_back(c.at(0).get<int>(), c.at(1).get<int>());
  }

  b.theta_star = CoefficientVector(MatrixFromJson(doc.at("theta_star")));
  b.y_star = VectorFromJson(doc.at("y_star"));
  b.final = EvaluationFromJson(doc.at("final"));
  b.final_lambda = doc.at("final").at("lambda").get<double>();
  b.s_grid = doc.at("trajectory").at("s").get<std::vector<double>>();
  b.trajectory.q = MatrixFromJson(doc.at("trajectory").at("q"));

  for (const json& p : doc.at("relative_poses")) {
    const json& t = p.at("translation");
    const json& q = p.at("rotation");
    b.relative_poses.push_back(
        {Eigen::Vector3d(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()),
         Eigen::Quaterniond(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                            q.at(3).get<double>())});
  }
  for (const json& e : doc.at("path_errors")) {
    b.path_errors.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  }

  const json& trace = doc.at("trace");
  b.trace.method = trace.at("method").get<std::string>();
  b.trace.penalty_sign = PenaltySignFromString(trace.at("penalty_sign").get<std::string>());
  b.trace.evaluations = trace.at("evaluations").get<std::int64_t>();
  for (const json& r : trace.at("records")) {
    b.trace.records.push_back({r.at(0).get<int>(), r.at(1).get<double>(), r.at(2).get<double>(),
                               r.at(3).get<double>(), r.at(4).get<double>(),
                               r.at(5).get<double>(), r.at(6).get<double>()});
  }
  return b;
}

std::string TraceCsv(const RunTrace& trace) {
  std::string out = "t,lambda,best_R,mean_R,V,E,wall_ms\n";
  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.t) + "," + FormatDouble(r.lambda) + "," + FormatDouble(r.best_R) + "," +
           FormatDouble(r.mean_R) + "," + FormatDouble(r.V) + "," + FormatDouble(r.E) + "," +
           FormatDouble(r.wall_ms) + "\n";
  }
  return out;
}

std::string TrajectoryCsv(const ResultBundle& bundle) {
  const Matrix& q = bundle.trajectory.q;
  std::string out = "i,s";
  for (Eigen::Index j = 0; j < q.cols(); ++j) out += ",q_" + std::to_string(j + 1);
  out += "\n";
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    out += std::to_string(i) + "," + FormatDouble(bundle.s_grid.at(static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j < q.cols(); ++j) out += "," + FormatDouble(q(i, j));
    out += "\n";
  }
  return out;
}

std::string PathErrorCsv(const ResultBundle& bundle) {
  std::string out = "i,translation_err,rotation_err\n";
  for (std::size_t i = 0; i < bundle.path_errors.size(); ++i) {
    out += std::to_string(i) + "," + FormatDouble(bundle.path_errors[i].translation) + "," +
           FormatDouble(bundle.path_errors[i].rotation) + "\n";
  }
  return out;
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void Emit(const ResultBundle& bundle, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create output directory " + out_dir.string());
  }
  WriteTextFile(out_dir / "result.json", BundleToJson(bundle).dump(2) + "\n");
  WriteTextFile(out_dir / "trace.csv", TraceCsv(bundle.trace));
  WriteTextFile(out_dir / "trajectory.csv", TrajectoryCsv(bundle));
  WriteTextFile(out_dir / "path_errors.csv", PathErrorCsv(bundle));
}

VerifyReport VerifyResult(const json& result_doc) {
  const ResultBundle bundle = BundleFromJson(result_doc);
  const Scenario scenario = ParseScenario(bundle.scenario_echo);
  VerifyReport report;
  report.recorded = bundle.final;
  report.recomputed = ReEvaluate(bundle, scenario);
  report.bit_identical = SameBits(report.recorded, report.recomputed);
  return report;
}

}  // namespace mbdtraj
