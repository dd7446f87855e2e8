#include "ppcdom/estimator.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ppcdom {

double median_pairwise_distance(const Eigen::MatrixXd& points) {
  std::vector<double> d;
  const Eigen::Index m = points.cols();
  d.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) d.push_back((points.col(i) - points.col(j)).norm());
  }
  if (d.empty()) return 0.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

RbfBasis RbfBasis::from_centers(Eigen::MatrixXd centers, double width_scale) {
  if (centers.cols() < 1) throw std::invalid_argument("RbfBasis needs at least one center");
  if (!(width_scale > 0.0)) throw std::invalid_argument("RbfBasis width scale must be positive");
  RbfBasis basis;
  double median = median_pairwise_distance(centers);
  if (!(median > 0.0)) median = 1.0;
  basis.widths = Eigen::VectorXd::Constant(centers.cols(), width_scale * median);
  basis.centers = std::move(centers);
  return basis;
}

Eigen::VectorXd rbf_features(const Eigen::VectorXd& x, const RbfBasis& basis) {
  if (x.size() != basis.dim()) throw std::invalid_argument("rbf_features: input dimension mismatch");
  const Eigen::VectorXd sq = (basis.centers.colwise() - x).colwise().squaredNorm().transpose();
  return (-sq.array() / basis.widths.array().square()).exp().matrix();
}

Eigen::MatrixXd kmeans_centers(const Eigen::MatrixXd& samples, int m, std::uint64_t seed, int max_iterations,
                               double tolerance) {
  const Eigen::Index count = samples.cols();
  if (m < 1) throw std::invalid_argument("kmeans_centers: m must be positive");
  if (count < m) throw std::invalid_argument("kmeans_centers: fewer samples than centers");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Eigen::MatrixXd centers(samples.rows(), m);
  for (int c = 0; c < m; ++c) centers.col(c) = samples.col(order[static_cast<std::size_t>(c)]);

  std::vector<int> label(static_cast<std::size_t>(count), 0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    for (Eigen::Index s = 0; s < count; ++s) {
      Eigen::Index best = 0;
      (centers.colwise() - samples.col(s)).colwise().squaredNorm().minCoeff(&best);
      label[static_cast<std::size_t>(s)] = static_cast<int>(best);
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(samples.rows(), m);
    std::vector<int> members(static_cast<std::size_t>(m), 0);
    for (Eigen::Index s = 0; s < count; ++s) {
      sums.col(label[static_cast<std::size_t>(s)]) += samples.col(s);
      ++members[static_cast<std::size_t>(label[static_cast<std::size_t>(s)])];
    }
    double shift = 0.0;
    for (int c = 0; c < m; ++c) {
      if (members[static_cast<std::size_t>(c)] == 0) continue;  // empty cluster keeps its center
      const Eigen::VectorXd updated = sums.col(c) / members[static_cast<std::size_t>(c)];
      shift = std::max(shift, (updated - centers.col(c)).norm());
      centers.col(c) = updated;
    }
    if (shift <= tolerance) break;
  }
  return centers;
}

JacobianWeights::JacobianWeights(int basis_size, int keypoints)
    : data_(Eigen::MatrixXd::Zero(basis_size, 3 * static_cast<Eigen::Index>(keypoints) * kControlDim)),
      keypoints_(keypoints) {
  if (basis_size < 1 || keypoints < 1) throw std::invalid_argument("JacobianWeights: empty dimensions");
}

Eigen::MatrixXd JacobianWeights::predict(const Eigen::VectorXd& theta) const {
  if (theta.size() != data_.rows()) throw std::invalid_argument("predict: feature dimension mismatch");
  const Eigen::VectorXd flat = data_.transpose() * theta;
  Eigen::MatrixXd jac(3 * keypoints_, kControlDim);
  for (int k = 0; k < keypoints_; ++k) {
    for (int j = 0; j < kControlDim; ++j) jac.block<3, 1>(3 * k, j) = flat.segment<3>(column(k, j));
  }
  return jac;
}

bool JacobianWeights::adapt(const Eigen::VectorXd& theta, const Twist& u, const Eigen::VectorXd& z, double gamma,
                            double dt, double rate) {
  if (theta.size() != data_.rows() || z.size() != 3 * keypoints_) {
    throw std::invalid_argument("adapt: dimension mismatch");
  }
  if (!(gamma >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("adapt: need gamma >= 0 and dt > 0");
  if (!theta.allFinite() || !u.allFinite() || !z.allFinite() || !std::isfinite(rate)) {
    throw std::invalid_argument("adapt: non-finite input");
  }
  Eigen::RowVectorXd drive(data_.cols());
  for (int k = 0; k < keypoints_; ++k) {
    for (int j = 0; j < kControlDim; ++j) drive.segment<3>(column(k, j)) = u[j] * z.segment<3>(3 * k).transpose();
  }
  data_ = (1.0 - gamma * dt) * data_ + (rate * dt) * (theta * drive);
  const double norm = data_.norm();
  if (norm > kMaxNorm) {
    data_ *= kMaxNorm / norm;
    return true;
  }
  return false;
}

JacobianWeights prefit(const std::vector<BabbleSample>& log, const RbfBasis& basis, double ridge) {
  if (log.empty()) throw std::invalid_argument("prefit: empty babbling log");
  const int m = basis.size();
  const Eigen::Index out_dim = log.front().pdot.size();
  if (out_dim == 0 || out_dim % 3 != 0) throw std::invalid_argument("prefit: bad velocity dimension");
  const int n = static_cast<int>(out_dim / 3);
  const Eigen::Index samples = static_cast<Eigen::Index>(log.size());
  const Eigen::Index features = static_cast<Eigen::Index>(kControlDim) * m;

  // Row s of phi is kron(u_s, theta(x_s)); column block j holds u_j theta.
  Eigen::MatrixXd phi(samples, features);
  Eigen::MatrixXd targets(samples, out_dim);
  for (Eigen::Index s = 0; s < samples; ++s) {
    const BabbleSample& b = log[static_cast<std::size_t>(s)];
    if (b.pdot.size() != out_dim) throw std::invalid_argument("prefit: inconsistent sample dimensions");
    const Eigen::VectorXd theta = rbf_features(b.x, basis);
    for (int j = 0; j < kControlDim; ++j) phi.block(s, static_cast<Eigen::Index>(j) * m, 1, m) = b.u[j] * theta.transpose();
    targets.row(s) = b.pdot.transpose();
  }

  Eigen::MatrixXd solution;  // features x out_dim
  if (samples < features) {
    Eigen::MatrixXd gram = phi * phi.transpose();
    gram.diagonal().array() += ridge;
    solution = phi.transpose() * gram.ldlt().solve(targets);
  } else {
    Eigen::MatrixXd normal = phi.transpose() * phi;
    normal.diagonal().array() += ridge;
    solution = normal.ldlt().solve(phi.transpose() * targets);
  }

  JacobianWeights w(m, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < kControlDim; ++j) {
      w.block(k, j) = solution.block(static_cast<Eigen::Index>(j) * m, 3 * k, m, 3);
    }
  }
  return w;
}

Eigen::MatrixXd fit_linear_jacobian(const std::vector<BabbleSample>& log, double ridge) {
  if (log.empty()) throw std::invalid_argument("fit_linear_jacobian: empty log");
  const Eigen::Index out_dim = log.front().pdot.size();
  Eigen::Matrix<double, kControlDim, kControlDim> uu = ridge * Eigen::Matrix<double, kControlDim, kControlDim>::Identity();
  Eigen::MatrixXd pu = Eigen::MatrixXd::Zero(out_dim, kControlDim);
  for (const BabbleSample& b : log) {
    uu += b.u * b.u.transpose();
    pu += b.pdot * b.u.transpose();
  }
  return uu.ldlt().solve(pu.transpose()).transpose();
}

bool BroydenState::update(const Eigen::VectorXd& dp, const Eigen::VectorXd& dq) {
  const double dq2 = dq.squaredNorm();
  if (std::sqrt(dq2) <= kMinStep) return false;
  jacobian += damping * (dp - jacobian * dq) * dq.transpose() / dq2;
  return true;
}

}  // namespace ppcdom
