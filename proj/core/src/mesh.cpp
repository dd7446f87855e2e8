#include "ppcdom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <utility>

#include "ppcdom/error.hpp"

namespace ppcdom {

MeshShape parse_mesh_shape(std::string_view name) {
  if (name == "slit-sheet") return MeshShape::kSlitSheet;
  if (name == "square-hole-sheet") return MeshShape::kSquareHoleSheet;
  if (name == "L-sheet") return MeshShape::kLSheet;
  throw ConfigError("unknown mesh shape '" + std::string(name) + "'");
}

std::string to_string(MeshShape shape) {
  switch (shape) {
    case MeshShape::kSlitSheet:
      return "slit-sheet";
    case MeshShape::kSquareHoleSheet:
      return "square-hole-sheet";
    case MeshShape::kLSheet:
      return "L-sheet";
  }
  return "unknown";
}

int Mesh::node_at(int column, int row) const {
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    if (grid[i].x() == column && grid[i].y() == row) return i;
  }
  return -1;
}

void Mesh::validate() const {
  const int n = node_count();
  if (n == 0) throw ConfigError("mesh has no nodes");
  if (!nodes.allFinite()) throw ConfigError("mesh has non-finite node positions");
  std::set<std::pair<int, int>> seen;
  std::vector<std::vector<int>> adjacency(n);
  for (const Spring& s : springs) {
    if (s.a < 0 || s.b < 0 || s.a >= n || s.b >= n || s.a == s.b) {
      throw ConfigError("spring index out of range");
    }
    if (!(s.rest_length > 0.0)) throw ConfigError("spring rest length must be positive");
    if (!(s.stiffness > 0.0)) throw ConfigError("spring stiffness must be positive");
    if (!seen.emplace(std::min(s.a, s.b), std::max(s.a, s.b)).second) {
      throw ConfigError("duplicate spring between nodes " + std::to_string(s.a) + " and " +
                        std::to_string(s.b));
    }
    adjacency[s.a].push_back(s.b);
    adjacency[s.b].push_back(s.a);
  }
  std::vector<bool> reached(n, false);
  std::queue<int> frontier;
  frontier.push(0);
  reached[0] = true;
  int count = 1;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int j : adjacency[i]) {
      if (!reached[j]) {
        reached[j] = true;
        ++count;
        frontier.push(j);
      }
    }
  }
  if (count != n) throw ConfigError("mesh graph is not connected");
}

namespace {

bool node_present(const MeshSpec& spec, int c, int r) {
  switch (spec.shape) {
    case MeshShape::kSlitSheet:
      return true;
    case MeshShape::kSquareHoleSheet: {
      const int hx0 = (spec.nx - spec.hole_nx) / 2;
      const int hy0 = (spec.ny - spec.hole_ny) / 2;
      const bool in_hole =
          c >= hx0 && c < hx0 + spec.hole_nx && r >= hy0 && r < hy0 + spec.hole_ny;
      return !in_hole;
    }
    case MeshShape::kLSheet:
      return r < spec.leg_width || c < spec.leg_width;
  }
  return false;
}

// True when the segment between two grid points crosses the slit cut.
bool crosses_slit(const MeshSpec& spec, int c0, int r0, int c1, int r1) {
  if (spec.shape != MeshShape::kSlitSheet) return false;
  const int lo = std::min(c0, c1);
  const int hi = std::max(c0, c1);
  if (!(lo == spec.slit_column && hi == spec.slit_column + 1)) return false;
  const auto in_slit = [&](int r) { return r >= spec.slit_begin && r <= spec.slit_end; };
  return in_slit(r0) && in_slit(r1);
}

MeshSpec resolve_defaults(MeshSpec spec) {
  if (spec.nx < 3 || spec.ny < 3) throw ConfigError("mesh resolution must be at least 3 per side");
  if (!(spec.spacing > 0.0)) throw ConfigError("mesh spacing must be positive");
  if (!(spec.stiffness > 0.0)) throw ConfigError("mesh stiffness must be positive");
  if (spec.shear_stiffness < 0.0) spec.shear_stiffness = spec.stiffness;
  if (!(spec.shear_stiffness > 0.0)) throw ConfigError("mesh shear stiffness must be positive");
  switch (spec.shape) {
    case MeshShape::kSlitSheet:
      if (spec.slit_column < 0) spec.slit_column = (spec.nx - 1) / 2;
      if (spec.slit_begin < 0) spec.slit_begin = 1;
      if (spec.slit_end < 0) spec.slit_end = spec.ny - 2;
      if (spec.slit_column + 1 >= spec.nx || spec.slit_begin > spec.slit_end ||
          spec.slit_begin < 1 || spec.slit_end > spec.ny - 2) {
        throw ConfigError("slit must lie strictly inside the sheet");
      }
      break;
    case MeshShape::kSquareHoleSheet:
      if (spec.hole_nx < 0) spec.hole_nx = spec.nx - 4;
      if (spec.hole_ny < 0) spec.hole_ny = spec.ny - 4;
      if (spec.hole_nx < 1 || spec.hole_ny < 1 || spec.hole_nx > spec.nx - 2 ||
          spec.hole_ny > spec.ny - 2) {
        throw ConfigError("square hole must leave a border of at least one node");
      }
      break;
    case MeshShape::kLSheet:
      if (spec.leg_width < 0) spec.leg_width = (std::min(spec.nx, spec.ny) + 1) / 2;
      if (spec.leg_width < 1 || spec.leg_width >= std::min(spec.nx, spec.ny)) {
        throw ConfigError("L-sheet leg width must be in [1, min(nx, ny))");
      }
      break;
  }
  return spec;
}

}  // namespace

Mesh build_mesh(const MeshSpec& raw) {
  const MeshSpec spec = resolve_defaults(raw);

  std::vector<int> index(static_cast<std::size_t>(spec.nx * spec.ny), -1);
  const auto at = [&](int c, int r) -> int& { return index[static_cast<std::size_t>(r * spec.nx + c)]; };

  Mesh mesh;
  std::vector<Eigen::Vector3d> points;
  for (int r = 0; r < spec.ny; ++r) {
    for (int c = 0; c < spec.nx; ++c) {
      if (!node_present(spec, c, r)) continue;
      at(c, r) = static_cast<int>(points.size());
      points.emplace_back(c * spec.spacing, r * spec.spacing, 0.0);
      mesh.grid.emplace_back(c, r);
    }
  }
  mesh.nodes.resize(3, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) mesh.nodes.col(static_cast<Eigen::Index>(i)) = points[i];

  const auto connect = [&](int c0, int r0, int c1, int r1, double k) {
    const int a = at(c0, r0);
    const int b = at(c1, r1);
    if (a < 0 || b < 0 || crosses_slit(spec, c0, r0, c1, r1)) return;
    mesh.springs.push_back({a, b, (mesh.nodes.col(a) - mesh.nodes.col(b)).norm(), k});
  };

  for (int r = 0; r < spec.ny; ++r) {
    for (int c = 0; c < spec.nx; ++c) {
      if (at(c, r) < 0) continue;
      if (c + 1 < spec.nx) connect(c, r, c + 1, r, spec.stiffness);
      if (r + 1 < spec.ny) connect(c, r, c, r + 1, spec.stiffness);
      // Shear springs only inside complete cells.
      if (c + 1 < spec.nx && r + 1 < spec.ny && at(c + 1, r) >= 0 && at(c, r + 1) >= 0 &&
          at(c + 1, r + 1) >= 0) {
        connect(c, r, c + 1, r + 1, spec.shear_stiffness);
        connect(c + 1, r, c, r + 1, spec.shear_stiffness);
      }
    }
  }

  mesh.validate();
  return mesh;
}

}  // namespace ppcdom
