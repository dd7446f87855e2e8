#pragma once

#include <Eigen/Core>
#include <random>
#include <vector>

#include "ppcdom/plant.hpp"

namespace ppcdom {

/// Mesh nodes tracked as keypoints, in feature-stacking order.
struct KeypointSet {
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
  /// Throws std::out_of_range unless indices are unique, in [0, node_count)
  /// and non-empty.
  void validate(int node_count) const;
};

/// Greedy farthest point sampling: starts at `start` and repeatedly adds the
/// point with the largest distance to the selected set, lowest index on ties.
/// Returned indices refer to columns of `points`, in selection order.
KeypointSet farthest_point_sample(const Eigen::Matrix3Xd& points, int n, int start = 0);

/// Symmetric Chamfer distance with squared Euclidean distances:
/// mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2.
double chamfer_distance(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b);

/// Stacked keypoint coordinates p in R^{3n}.
Eigen::VectorXd extract_features(const Plant& plant, const KeypointSet& keypoints);

/// Same with additive zero-mean Gaussian sensing noise of the given std (m).
Eigen::VectorXd extract_features(const Plant& plant, const KeypointSet& keypoints, double noise_std,
                                 std::mt19937_64& rng);

/// Current features p, target p* and error e = p - p*.
class FeatureState {
 public:
  FeatureState() = default;
  FeatureState(Eigen::VectorXd features, Eigen::VectorXd target);

  const Eigen::VectorXd& features() const { return features_; }
  const Eigen::VectorXd& target() const { return target_; }
  const Eigen::VectorXd& error() const { return error_; }
  int keypoint_count() const { return static_cast<int>(features_.size() / 3); }

  void set_features(Eigen::VectorXd features);
  void set_target(Eigen::VectorXd target);

 private:
  void refresh();

  Eigen::VectorXd features_;
  Eigen::VectorXd target_;
  Eigen::VectorXd error_;
};

}  // namespace ppcdom
