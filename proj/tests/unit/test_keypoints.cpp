#include <gtest/gtest.h>

#include <random>

#include "ppcdom/keypoints.hpp"

using namespace ppcdom;

namespace {

Eigen::Matrix3Xd line(int count, double spacing = 1.0) {
  Eigen::Matrix3Xd p = Eigen::Matrix3Xd::Zero(3, count);
  for (int i = 0; i < count; ++i) p(0, i) = spacing * i;
  return p;
}

Plant small_plant() {
  MeshSpec s;
  const Mesh mesh = build_mesh(s);
  const std::vector<int> left{0, 5, 10, 15, 20};
  const std::vector<int> right{4, 9, 14, 19, 24};
  SolverSettings settings;
  settings.force_tolerance = 1e-10;
  settings.gravity = Vec3(0, 0, -9.81);
  settings.node_mass = 0.002;
  Plant p = attach_grippers(mesh, left, right, settings);
  p.solve_equilibrium();
  return p;
}

}  // namespace

TEST(FarthestPointSample, CollinearExtremes) {
  EXPECT_EQ(farthest_point_sample(line(10), 2, 0).indices, (std::vector<int>{0, 9}));
}

TEST(FarthestPointSample, TieGoesToLowestIndex) {
  EXPECT_EQ(farthest_point_sample(line(10), 3, 0).indices, (std::vector<int>{0, 9, 4}));
}

TEST(FarthestPointSample, AllPointsForAnyStart) {
  for (int start : {0, 3, 9}) {
    std::vector<int> got = farthest_point_sample(line(10), 10, start).indices;
    std::sort(got.begin(), got.end());
    for (int i = 0; i < 10; ++i) EXPECT_EQ(got[static_cast<std::size_t>(i)], i);
  }
}

TEST(FarthestPointSample, RejectsTooMany) {
  EXPECT_THROW(farthest_point_sample(line(3), 4), std::invalid_argument);
}

TEST(Chamfer, Basics) {
  const Eigen::Matrix3Xd a = line(4);
  EXPECT_EQ(chamfer_distance(a, a), 0.0);
  Eigen::Matrix3Xd p = Eigen::Matrix3Xd::Zero(3, 1);
  Eigen::Matrix3Xd q = Eigen::Matrix3Xd::Zero(3, 1);
  q(0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(chamfer_distance(p, q), 2.0);
  EXPECT_THROW(chamfer_distance(Eigen::Matrix3Xd(3, 0), q), std::invalid_argument);
}

TEST(Chamfer, Symmetric) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix3Xd a(3, 5 + trial % 3);
    Eigen::Matrix3Xd b(3, 7);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = n(rng);
    EXPECT_DOUBLE_EQ(chamfer_distance(a, b), chamfer_distance(b, a));
  }
}

TEST(Features, VerbatimCoordinates) {
  const Plant p = small_plant();
  KeypointSet ks;
  ks.indices = {6, 12, 18};
  const Eigen::VectorXd f = extract_features(p, ks);
  ASSERT_EQ(f.size(), 9);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(f.segment<3>(3 * k), Eigen::Vector3d(p.positions().col(ks.indices[k])));
}

TEST(Features, ShiftWithRigidTranslation) {
  Plant p = small_plant();
  KeypointSet ks;
  ks.indices = {7, 13};
  const Eigen::VectorXd before = extract_features(p, ks);
  Twist u = Twist::Zero();
  const Eigen::Vector3d v(0.01, 0.0, -0.02);
  u.segment<3>(0) = v;
  u.segment<3>(6) = v;
  p.step(u, 1.0);
  const Eigen::VectorXd after = extract_features(p, ks);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR((after.segment<3>(3 * k) - before.segment<3>(3 * k) - v).norm(), 0.0, 1e-9);
}

TEST(Features, ZeroNoiseIsDeterministic) {
  const Plant p = small_plant();
  KeypointSet ks;
  ks.indices = {7, 13};
  std::mt19937_64 a(1);
  std::mt19937_64 b(2);
  EXPECT_EQ(extract_features(p, ks, 0.0, a), extract_features(p, ks, 0.0, b));
  EXPECT_EQ(extract_features(p, ks, 0.0, a), extract_features(p, ks));
}

TEST(Features, StateTracksError) {
  FeatureState s(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 1, 1));
  EXPECT_EQ(s.error(), Eigen::Vector3d(0, 1, 2));
  s.set_features(Eigen::Vector3d(1, 1, 1));
  EXPECT_EQ(s.error().norm(), 0.0);
  EXPECT_EQ(s.keypoint_count(), 1);
  EXPECT_THROW(s.set_target(Eigen::VectorXd::Zero(6)), std::invalid_argument);
}

TEST(Keypoints, ValidateRange) {
  KeypointSet ks;
  ks.indices = {0, 3};
  EXPECT_NO_THROW(ks.validate(4));
  EXPECT_THROW(ks.validate(3), std::out_of_range);
  ks.indices = {1, 1};
  EXPECT_THROW(ks.validate(4), std::out_of_range);
}
