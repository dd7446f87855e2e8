#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ppcdom/error.hpp"
#include "ppcdom/mesh.hpp"

using namespace ppcdom;

namespace {

MeshSpec spec(MeshShape shape, int nx, int ny) {
  MeshSpec s;
  s.shape = shape;
  s.nx = nx;
  s.ny = ny;
  s.spacing = 0.02;
  s.stiffness = 50.0;
  return s;
}

}  // namespace

TEST(Mesh, SlitSheetFiveByFive) {
  const Mesh m = build_mesh(spec(MeshShape::kSlitSheet, 5, 5));
  EXPECT_EQ(m.node_count(), 25);
  // 40 structural + 32 shear, minus 3 structural and 4 shear crossing the slit.
  EXPECT_EQ(m.springs.size(), 65u);
  for (const Spring& s : m.springs) {
    const bool straight = std::abs(s.rest_length - 0.02) < 1e-12;
    const bool diagonal = std::abs(s.rest_length - 0.02 * std::sqrt(2.0)) < 1e-12;
    EXPECT_TRUE(straight || diagonal) << s.rest_length;
  }
  EXPECT_NO_THROW(m.validate());
}

TEST(Mesh, SlitSpringsAreMissing) {
  const Mesh m = build_mesh(spec(MeshShape::kSlitSheet, 5, 5));
  const int a = m.node_at(2, 2);
  const int b = m.node_at(3, 2);
  for (const Spring& s : m.springs) {
    EXPECT_FALSE((s.a == a && s.b == b) || (s.a == b && s.b == a));
  }
  // The bottom row stays connected across the slit.
  const int c = m.node_at(2, 0);
  const int d = m.node_at(3, 0);
  bool found = false;
  for (const Spring& s : m.springs) found = found || (s.a == c && s.b == d) || (s.a == d && s.b == c);
  EXPECT_TRUE(found);
}

TEST(Mesh, LSheetNodeCount) {
  MeshSpec s = spec(MeshShape::kLSheet, 5, 5);
  s.leg_width = 3;
  const Mesh m = build_mesh(s);
  EXPECT_EQ(m.node_count(), 5 * 3 + 3 * 5 - 3 * 3);
  EXPECT_NO_THROW(m.validate());
}

TEST(Mesh, SquareHoleNodeCount) {
  MeshSpec s = spec(MeshShape::kSquareHoleSheet, 7, 7);
  s.hole_nx = 3;
  s.hole_ny = 3;
  const Mesh m = build_mesh(s);
  EXPECT_EQ(m.node_count(), 40);
  EXPECT_EQ(m.node_at(3, 3), -1);
  EXPECT_NO_THROW(m.validate());
}

TEST(Mesh, RestLengthsMatchGeometry) {
  const Mesh m = build_mesh(spec(MeshShape::kSquareHoleSheet, 9, 7));
  for (const Spring& s : m.springs) {
    EXPECT_NEAR((m.nodes.col(s.a) - m.nodes.col(s.b)).norm(), s.rest_length, 1e-15);
  }
}

TEST(Mesh, RejectsBadSpecs) {
  EXPECT_THROW(build_mesh(spec(MeshShape::kSlitSheet, 2, 5)), ConfigError);
  MeshSpec s = spec(MeshShape::kSlitSheet, 5, 5);
  s.spacing = 0.0;
  EXPECT_THROW(build_mesh(s), ConfigError);
  EXPECT_THROW(parse_mesh_shape("disc"), ConfigError);
}

TEST(Mesh, ShapeNamesRoundTrip) {
  for (MeshShape shape : {MeshShape::kSlitSheet, MeshShape::kSquareHoleSheet, MeshShape::kLSheet}) {
    EXPECT_EQ(parse_mesh_shape(to_string(shape)), shape);
  }
}

TEST(Mesh, ValidateCatchesDefects) {
  Mesh m;
  m.nodes = Eigen::Matrix3Xd::Zero(3, 3);
  m.nodes.col(1) = Eigen::Vector3d(1, 0, 0);
  m.nodes.col(2) = Eigen::Vector3d(2, 0, 0);
  m.springs = {{0, 1, 1.0, 10.0}, {1, 2, 1.0, 10.0}};
  EXPECT_NO_THROW(m.validate());

  Mesh duplicate = m;
  duplicate.springs.push_back({1, 0, 1.0, 10.0});
  EXPECT_THROW(duplicate.validate(), ConfigError);

  Mesh disconnected = m;
  disconnected.springs.pop_back();
  EXPECT_THROW(disconnected.validate(), ConfigError);

  Mesh bad_rest = m;
  bad_rest.springs[0].rest_length = 0.0;
  EXPECT_THROW(bad_rest.validate(), ConfigError);

  Mesh bad_k = m;
  bad_k.springs[0].stiffness = -1.0;
  EXPECT_THROW(bad_k.validate(), ConfigError);

  Mesh bad_index = m;
  bad_index.springs[0].b = 7;
  EXPECT_THROW(bad_index.validate(), ConfigError);
}
