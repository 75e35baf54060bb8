#pragma once

// Polynomial joint-trajectory parameterization.
//
// Every joint j follows q_j(s) = sum_k theta_{j,k} * p_k(s) over the path
// parameter s in [0,1], with monomial basis functions p_k. The optimizer never
// touches theta directly: it works on a latent y in [-1,1]^{nd} that is mapped
// affinely onto a box around a nominal theta0 whose half-widths sigma are sized
// from the joint limits. With |theta0_{j,k}| + sigma_{j,k} <= qbar_j / d, every
// reconstructed trajectory satisfies |q_ij| <= qbar_j.

#include <utility>
#include <vector>

#include "mbdtraj/common.hpp"

namespace mbdtraj {

enum class ExponentOrder {
  // Exponents d-1-k for k = 0..d-1 (degree d-1 down to the constant term).
  kDegreeDm1,
  // Exponents d-k for k = 0..d-1 (degree d down to 1, no constant term).
  kPaperLiteral,
};

const char* ToString(ExponentOrder order);
ExponentOrder ExponentOrderFromString(const std::string& name);

struct BasisConfig {
  int d = 1;
  ExponentOrder order = ExponentOrder::kDegreeDm1;
  // N+1 samples, strictly increasing, s_grid.front() == 0, s_grid.back() == 1.
  std::vector<double> s_grid;

  // Uniform grid s_i = i/N.
  static BasisConfig Uniform(int d, int n_segments,
                             ExponentOrder order = ExponentOrder::kDegreeDm1);

  int segments() const { return static_cast<int>(s_grid.size()) - 1; }
  int samples() const { return static_cast<int>(s_grid.size()); }
  int Exponent(int k) const;

  // Throws ValidationError.
  void Validate() const;
};

// [p_0(s), ..., p_{d-1}(s)]. Throws DomainError when s is outside [0,1].
Vector BasisRow(double s, const BasisConfig& cfg);

// (N+1) x d matrix whose row i is BasisRow(s_i).
Matrix BasisMatrix(const BasisConfig& cfg);

// n x d polynomial coefficients; row j holds theta_j.
class CoefficientVector {
 public:
  CoefficientVector() = default;
  explicit CoefficientVector(Matrix theta);
  static CoefficientVector Zero(int n, int d) { return CoefficientVector(Matrix::Zero(n, d)); }

  const Matrix& matrix() const { return theta_; }
  int joints() const { return static_cast<int>(theta_.rows()); }
  int terms() const { return static_cast<int>(theta_.cols()); }
  double operator()(int j, int k) const { return theta_(j, k); }

  // Joint-major flattening (theta_{1,0..d-1}, theta_{2,0..d-1}, ...).
  Vector Flatten() const;

 private:
  Matrix theta_;
};

// (N+1) x n joint positions.
struct JointTrajectory {
  Matrix q;

  int samples() const { return static_cast<int>(q.rows()); }
  int joints() const { return static_cast<int>(q.cols()); }
};

struct ExplorationBounds {
  CoefficientVector theta0;
  Matrix sigma;  // n x d, non-negative
  // (j, k) of every coefficient whose nominal already exceeds qbar_j / d; their
  // sigma is clamped to zero.
  std::vector<std::pair<int, int>> collapsed;

  bool has_warning() const { return !collapsed.empty(); }
  int latent_dim() const { return static_cast<int>(sigma.size()); }
};

// q_ij = sum_k theta_{j,k} p_k(s_i). Throws ShapeError on a term-count mismatch.
JointTrajectory ReconstructTrajectory(const CoefficientVector& theta, const BasisConfig& cfg);
// Same, with a precomputed BasisMatrix(cfg).
JointTrajectory ReconstructTrajectory(const CoefficientVector& theta, const Matrix& basis);

// sigma_{j,k} = max(0, qbar_j/d - |theta0_{j,k}|).
ExplorationBounds SelectSigma(const CoefficientVector& theta0, const Vector& q_limits,
                              const BasisConfig& cfg);

// theta = theta0 + sigma o y, y read joint-major. Throws DomainError when any
// |y_m| > 1 + 1e-12; callers clip first.
CoefficientVector MapLatent(const Eigen::Ref<const Vector>& y, const ExplorationBounds& bounds);

// Inverse of MapLatent on coefficients with sigma > 0; entries with sigma == 0
// map to 0.
Vector UnmapLatent(const CoefficientVector& theta, const ExplorationBounds& bounds);

// Elementwise clamp to [-1,1].
Vector ClipToBox(const Eigen::Ref<const Vector>& y);

}  // namespace mbdtraj
