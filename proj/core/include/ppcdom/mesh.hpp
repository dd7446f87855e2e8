#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

namespace ppcdom {

enum class MeshShape { kSlitSheet, kSquareHoleSheet, kLSheet };

MeshShape parse_mesh_shape(std::string_view name);
std::string to_string(MeshShape shape);

/// Parameters of a planar grid sheet. Negative shape parameters select the
/// defaults documented next to each field.
struct MeshSpec {
  MeshShape shape = MeshShape::kSlitSheet;
  int nx = 5;               // columns
  int ny = 5;               // rows
  double spacing = 0.02;    // m
  double stiffness = 50.0;  // N/m, structural springs
  double shear_stiffness = -1.0;  // N/m, defaults to stiffness

  // slit-sheet: the cut runs between columns slit_column and slit_column+1,
  // over rows [slit_begin, slit_end]. Defaults: centre column, all interior rows.
  int slit_column = -1;
  int slit_begin = -1;
  int slit_end = -1;

  // square-hole-sheet: centred hole of hole_nx x hole_ny removed nodes.
  // Default: (nx - 4) x (ny - 4).
  int hole_nx = -1;
  int hole_ny = -1;

  // L-sheet: union of the bottom nx x leg_width band and the left
  // leg_width x ny band. Default: (min(nx, ny) + 1) / 2.
  int leg_width = -1;
};

struct Spring {
  int a = 0;
  int b = 0;
  double rest_length = 0.0;  // m
  double stiffness = 0.0;    // N/m
};

/// Spring network. Node i sits at column(i), row(i) of the generating grid.
struct Mesh {
  Eigen::Matrix3Xd nodes;
  std::vector<Spring> springs;
  std::vector<Eigen::Vector2i> grid;  // (column, row); empty for hand-built meshes

  int node_count() const { return static_cast<int>(nodes.cols()); }

  /// Index of the node at (column, row), or -1 when absent.
  int node_at(int column, int row) const;

  /// Throws ConfigError unless rest lengths and stiffnesses are positive,
  /// indices are in range, springs are unique and the graph is connected.
  void validate() const;
};

Mesh build_mesh(const MeshSpec& spec);

}  // namespace ppcdom
