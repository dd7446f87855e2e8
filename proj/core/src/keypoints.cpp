#include "ppcdom/keypoints.hpp"

#include <limits>
#include <set>
#include <stdexcept>

namespace ppcdom {

void KeypointSet::validate(int node_count) const {
  if (indices.empty()) throw std::out_of_range("keypoint set is empty");
  std::set<int> seen;
  for (int i : indices) {
    if (i < 0 || i >= node_count) throw std::out_of_range("keypoint index out of range");
    if (!seen.insert(i).second) throw std::out_of_range("keypoint index repeated");
  }
}

KeypointSet farthest_point_sample(const Eigen::Matrix3Xd& points, int n, int start) {
  const int count = static_cast<int>(points.cols());
  if (n < 1 || n > count) throw std::invalid_argument("farthest_point_sample: n must be in [1, point count]");
  if (start < 0 || start >= count) throw std::invalid_argument("farthest_point_sample: invalid start index");

  KeypointSet out;
  out.indices.reserve(static_cast<std::size_t>(n));
  Eigen::VectorXd min_dist = Eigen::VectorXd::Constant(count, std::numeric_limits<double>::infinity());
  std::vector<bool> taken(static_cast<std::size_t>(count), false);
  int next = start;
  for (int s = 0; s < n; ++s) {
    out.indices.push_back(next);
    taken[static_cast<std::size_t>(next)] = true;
    for (int i = 0; i < count; ++i) {
      min_dist[i] = std::min(min_dist[i], (points.col(i) - points.col(next)).squaredNorm());
    }
    int best = -1;
    for (int i = 0; i < count; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || min_dist[i] > min_dist[best]) best = i;  // strict: lowest index wins ties
    }
    next = best;
  }
  return out;
}

double chamfer_distance(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  if (a.cols() == 0 || b.cols() == 0) throw std::invalid_argument("chamfer_distance: empty point set");
  const auto directed = [](const Eigen::Matrix3Xd& from, const Eigen::Matrix3Xd& to) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < from.cols(); ++i) {
      sum += (to.colwise() - from.col(i)).colwise().squaredNorm().minCoeff();
    }
    return sum / static_cast<double>(from.cols());
  };
  return directed(a, b) + directed(b, a);
}

Eigen::VectorXd extract_features(const Plant& plant, const KeypointSet& keypoints) {
  return stack_nodes(plant.positions(), keypoints.indices);
}

Eigen::VectorXd extract_features(const Plant& plant, const KeypointSet& keypoints, double noise_std,
                                 std::mt19937_64& rng) {
  Eigen::VectorXd p = extract_features(plant, keypoints);
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] += noise(rng);
  }
  return p;
}

FeatureState::FeatureState(Eigen::VectorXd features, Eigen::VectorXd target)
    : features_(std::move(features)), target_(std::move(target)) {
  refresh();
}

void FeatureState::set_features(Eigen::VectorXd features) {
  features_ = std::move(features);
  refresh();
}

void FeatureState::set_target(Eigen::VectorXd target) {
  target_ = std::move(target);
  refresh();
}

void FeatureState::refresh() {
  if (features_.size() % 3 != 0) throw std::invalid_argument("feature length must be a multiple of 3");
  if (target_.size() == 0) {
    error_ = Eigen::VectorXd::Zero(features_.size());
    return;
  }
  if (target_.size() != features_.size()) throw std::invalid_argument("feature and target lengths differ");
  error_ = features_ - target_;
}

}  // namespace ppcdom
