#include "mbdtraj/trajectory_param.hpp"

#include <cmath>
#include <sstream>

namespace mbdtraj {

namespace {
constexpr double kLatentSlack = 1e-12;
}  // namespace

const char* ToString(ExponentOrder order) {
  switch (order) {
    case ExponentOrder::kDegreeDm1:
      return "degree_dm1";
    case ExponentOrder::kPaperLiteral:
      return "paper_literal";
  }
  return "unknown";
}

ExponentOrder ExponentOrderFromString(const std::string& name) {
  if (name == "degree_dm1") return ExponentOrder::kDegreeDm1;
  if (name == "paper_literal") return ExponentOrder::kPaperLiteral;
  throw ValidationError("exponent_order: expected degree_dm1 or paper_literal, got '" + name + "'");
}

BasisConfig BasisConfig::Uniform(int d, int n_segments, ExponentOrder order) {
  BasisConfig cfg;
  cfg.d = d;
  cfg.order = order;
  if (n_segments < 1) throw ValidationError("basis: N must be >= 1");
  cfg.s_grid.resize(static_cast<std::size_t>(n_segments) + 1);
  for (int i = 0; i <= n_segments; ++i) {
    cfg.s_grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / n_segments;
  }
  return cfg;
}

int BasisConfig::Exponent(int k) const {
  return order == ExponentOrder::kDegreeDm1 ? d - 1 - k : d - k;
}

void BasisConfig::Validate() const {
  if (d < 1) throw ValidationError("basis: d must be >= 1");
  if (s_grid.size() < 2) throw ValidationError("basis: N must be >= 1 (s_grid needs >= 2 samples)");
  if (s_grid.front() != 0.0 || s_grid.back() != 1.0) {
    throw ValidationError("basis: s_grid must start at exactly 0 and end at exactly 1");
  }
  for (std::size_t i = 1; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > s_grid[i - 1])) {
      std::ostringstream msg;
      msg << "basis: s_grid must be strictly increasing (violated at index " << i << ")";
      throw ValidationError(msg.str());
    }
  }
}

Vector BasisRow(double s, const BasisConfig& cfg) {
  if (!(s >= 0.0 && s <= 1.0)) {
    std::ostringstream msg;
    msg << "basis_row: s = " << s << " outside [0,1]";
    throw DomainError(msg.str());
  }
  Vector row(cfg.d);
  for (int k = 0; k < cfg.d; ++k) row(k) = std::pow(s, cfg.Exponent(k));
  return row;
}

Matrix BasisMatrix(const BasisConfig& cfg) {
  Matrix basis(cfg.samples(), cfg.d);
  for (int i = 0; i < cfg.samples(); ++i) {
    basis.row(i) = BasisRow(cfg.s_grid[static_cast<std::size_t>(i)], cfg).transpose();
  }
  return basis;
}

CoefficientVector::CoefficientVector(Matrix theta) : theta_(std::move(theta)) {
  if (!theta_.allFinite()) throw DomainError("coefficient vector has non-finite entries");
}

Vector CoefficientVector::Flatten() const {
  Vector flat(theta_.size());
  Eigen::Map<RowMatrix>(flat.data(), theta_.rows(), theta_.cols()) = theta_;
  return flat;
}

JointTrajectory ReconstructTrajectory(const CoefficientVector& theta, const Matrix& basis) {
  if (theta.terms() != basis.cols()) {
    std::ostringstream msg;
    msg << "reconstruct_trajectory: theta has " << theta.terms() << " terms per joint, basis has "
        << basis.cols();
    throw ShapeError(msg.str());
  }
  return JointTrajectory{basis * theta.matrix().transpose()};
}

JointTrajectory ReconstructTrajectory(const CoefficientVector& theta, const BasisConfig& cfg) {
  return ReconstructTrajectory(theta, BasisMatrix(cfg));
}

ExplorationBounds SelectSigma(const CoefficientVector& theta0, const Vector& q_limits,
                              const BasisConfig& cfg) {
  if (q_limits.size() != theta0.joints()) {
    throw ShapeError("select_sigma: one joint limit per theta0 row is required");
  }
  if (theta0.terms() != cfg.d) throw ShapeError("select_sigma: theta0 columns must equal d");
  ExplorationBounds bounds;
  bounds.theta0 = theta0;
  bounds.sigma.resize(theta0.joints(), theta0.terms());
  for (int j = 0; j < theta0.joints(); ++j) {
    if (!(q_limits(j) > 0.0)) {
      std::ostringstream msg;
      msg << "select_sigma: joint limit " << j << " must be positive";
      throw ValidationError(msg.str());
    }
    const double budget = q_limits(j) / cfg.d;
    for (int k = 0; k < cfg.d; ++k) {
      const double room = budget - std::abs(theta0(j, k));
      if (room < 0.0) bounds.collapsed.emplace_back(j, k);
      bounds.sigma(j, k) = std::max(0.0, room);
    }
  }
  return bounds;
}

CoefficientVector MapLatent(const Eigen::Ref<const Vector>& y, const ExplorationBounds& bounds) {
  const Matrix& theta0 = bounds.theta0.matrix();
  if (y.size() != theta0.size()) {
    std::ostringstream msg;
    msg << "map_latent: latent has " << y.size() << " entries, expected " << theta0.size();
    throw ShapeError(msg.str());
  }
  for (Eigen::Index m = 0; m < y.size(); ++m) {
    if (!(std::abs(y(m)) <= 1.0 + kLatentSlack)) {
      std::ostringstream msg;
      msg << "map_latent: latent entry " << m << " = " << y(m) << " is outside [-1,1]";
      throw DomainError(msg.str());
    }
  }
  const auto y_mat = Eigen::Map<const RowMatrix>(y.data(), theta0.rows(), theta0.cols());
  return CoefficientVector(theta0 + bounds.sigma.cwiseProduct(Matrix(y_mat)));
}

Vector UnmapLatent(const CoefficientVector& theta, const ExplorationBounds& bounds) {
  const Matrix& theta0 = bounds.theta0.matrix();
  if (theta.matrix().rows() != theta0.rows() || theta.matrix().cols() != theta0.cols()) {
    throw ShapeError("unmap_latent: theta shape differs from theta0");
  }
  RowMatrix y(theta0.rows(), theta0.cols());
  for (Eigen::Index j = 0; j < theta0.rows(); ++j) {
    for (Eigen::Index k = 0; k < theta0.cols(); ++k) {
      const double s = bounds.sigma(j, k);
      y(j, k) = s > 0.0 ? (theta(static_cast<int>(j), static_cast<int>(k)) - theta0(j, k)) / s : 0.0;
    }
  }
  return Eigen::Map<const Vector>(y.data(), y.size());
}

Vector ClipToBox(const Eigen::Ref<const Vector>& y) { return y.cwiseMax(-1.0).cwiseMin(1.0); }

}  // namespace mbdtraj
