#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "ppcdom/types.hpp"

namespace ppcdom {

/// Gaussian radial basis: centers are columns of a dim x m matrix.
struct RbfBasis {
  Eigen::MatrixXd centers;
  Eigen::VectorXd widths;

  int size() const { return static_cast<int>(centers.cols()); }
  int dim() const { return static_cast<int>(centers.rows()); }

  /// Uniform widths of width_scale times the median pairwise center
  /// distance (1.0 when all centers coincide).
  static RbfBasis from_centers(Eigen::MatrixXd centers, double width_scale = 1.5);
};

/// theta_i = exp(-|x - c_i|^2 / sigma_i^2).
Eigen::VectorXd rbf_features(const Eigen::VectorXd& x, const RbfBasis& basis);

/// Lloyd's k-means over the columns of `samples`, initialised from m distinct
/// samples drawn with `seed`. Stops after max_iterations or when no centroid
/// moves more than tolerance. Deterministic for a given seed.
Eigen::MatrixXd kmeans_centers(const Eigen::MatrixXd& samples, int m, std::uint64_t seed,
                               int max_iterations = 100, double tolerance = 1e-9);

double median_pairwise_distance(const Eigen::MatrixXd& points);

/// RBFNN output weights. Block (k, j) is the m x 3 matrix mapping features to
/// the Jacobian column slice of keypoint k and control channel j.
class JacobianWeights {
 public:
  static constexpr double kMaxNorm = 1e3;

  JacobianWeights() = default;
  JacobianWeights(int basis_size, int keypoints);

  int basis_size() const { return static_cast<int>(data_.rows()); }
  int keypoints() const { return keypoints_; }

  auto block(int k, int j) { return data_.middleCols(column(k, j), 3); }
  auto block(int k, int j) const { return data_.middleCols(column(k, j), 3); }

  /// J_hat in R^{3n x 12}, block (k, j) = W[k][j]^T theta.
  Eigen::MatrixXd predict(const Eigen::VectorXd& theta) const;

  /// One explicit-Euler step of dW[k][j]/dt = rate * theta u_j z_k^T - gamma W[k][j].
  /// The total Frobenius norm is then projected onto kMaxNorm; returns true
  /// when that projection was active.
  bool adapt(const Eigen::VectorXd& theta, const Twist& u, const Eigen::VectorXd& z, double gamma,
             double dt, double rate = 1.0);

  /// Sum of squared Frobenius norms over all blocks.
  double squared_norm() const { return data_.squaredNorm(); }

  const Eigen::MatrixXd& data() const { return data_; }
  Eigen::MatrixXd& data() { return data_; }

 private:
  Eigen::Index column(int k, int j) const { return 3 * (static_cast<Eigen::Index>(k) * kControlDim + j); }

  Eigen::MatrixXd data_;  // m x (n * 12 * 3)
  int keypoints_ = 0;
};

/// One motor-babbling observation: estimator input x = [c; p], the applied
/// twist and the observed keypoint velocity.
struct BabbleSample {
  Eigen::VectorXd x;
  Twist u = Twist::Zero();
  Eigen::VectorXd pdot;
};

/// Ridge least squares for all blocks at once so that
/// sum_j (W[k][j]^T theta(x)) u_j ~ pdot_k over the log.
JacobianWeights prefit(const std::vector<BabbleSample>& log, const RbfBasis& basis, double ridge = 1e-6);

/// Constant Jacobian J minimising sum |J u - pdot|^2 + ridge |J|^2.
Eigen::MatrixXd fit_linear_jacobian(const std::vector<BabbleSample>& log, double ridge = 1e-6);

/// Rank-one secant estimator used as a baseline.
struct BroydenState {
  static constexpr double kMinStep = 1e-9;

  Eigen::MatrixXd jacobian;
  double damping = 1.0;

  /// J += damping (dp - J dq) dq^T / (dq^T dq); skipped (returns false) when
  /// |dq| <= kMinStep.
  bool update(const Eigen::VectorXd& dp, const Eigen::VectorXd& dq);
};

}  // namespace ppcdom
