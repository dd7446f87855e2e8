#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <span>
#include <vector>

#include "ppcdom/mesh.hpp"
#include "ppcdom/types.hpp"

namespace ppcdom {

struct Attachment {
  int node = 0;
  Vec3 offset = Vec3::Zero();  // in the gripper frame
};

/// Rigid gripper holding a set of mesh nodes.
struct GripperFrame {
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  std::vector<Attachment> attached;

  /// Rotation vector of the orientation, magnitude in [0, pi].
  Vec3 rotation_vector() const;
};

struct SolverSettings {
  double force_tolerance = 1e-6;  // N, max free-node residual force
  int max_iterations = 500;
  Vec3 gravity = Vec3::Zero();    // m/s^2, applied to every free node
  double node_mass = 0.0;         // kg
};

struct SolveReport {
  double residual = 0.0;  // N
  int iterations = 0;
  std::vector<double> energy;  // total energy after each accepted iterate
};

/// Quasi-static mass-spring object held by two rigid grippers.
///
/// The plant is a value type: copies are independent, and a single instance
/// must only be driven by one control loop at a time.
class Plant {
 public:
  Plant(Mesh mesh, std::array<GripperFrame, 2> grippers, SolverSettings settings = {});

  const Mesh& mesh() const { return mesh_; }
  const Eigen::Matrix3Xd& positions() const { return positions_; }
  const std::array<GripperFrame, 2>& grippers() const { return grippers_; }
  const std::vector<int>& free_nodes() const { return free_nodes_; }
  const SolverSettings& settings() const { return settings_; }
  void set_settings(const SolverSettings& settings) { settings_ = settings; }

  Configuration configuration() const;

  /// Advances both gripper poses by the twist u held for dt seconds, moves
  /// the attached nodes rigidly and re-solves the free nodes. Throws
  /// SolverDivergence and leaves the plant untouched on failure.
  void step(const Twist& u, double dt);

  /// Moves free nodes to a minimum of the total energy. Returns the final
  /// residual; throws SolverDivergence when the tolerance is not reached.
  SolveReport solve_equilibrium();

  double elastic_energy() const;
  double total_energy() const;
  /// Net force on every node (zero columns for attached nodes).
  Eigen::Matrix3Xd forces() const;
  /// Max free-node force norm.
  double residual() const;

 private:
  void place_attached_nodes();
  double energy_at(const Eigen::Matrix3Xd& x) const;
  Eigen::Matrix3Xd forces_at(const Eigen::Matrix3Xd& x) const;
  double residual_at(const Eigen::Matrix3Xd& x) const;

  Mesh mesh_;
  std::array<GripperFrame, 2> grippers_;
  SolverSettings settings_;
  Eigen::Matrix3Xd positions_;
  std::vector<int> free_nodes_;
  std::vector<int> dof_of_node_;  // -1 for attached nodes
};

/// Builds a plant whose grippers sit at the centroids of the given node sets
/// with identity orientation. Throws ConfigError for empty, overlapping or
/// out-of-range sets.
Plant attach_grippers(Mesh mesh, std::span<const int> left, std::span<const int> right,
                      SolverSettings settings = {});

/// Central-difference Jacobian of the stacked keypoint positions with respect
/// to the gripper twist, one re-solved equilibrium per perturbation. The
/// plant itself is never modified.
Eigen::MatrixXd finite_difference_jacobian(const Plant& plant, std::span<const int> keypoints,
                                           double h = 1e-4);

/// Stacked (x, y, z) of the listed nodes.
Eigen::VectorXd stack_nodes(const Eigen::Matrix3Xd& positions, std::span<const int> nodes);

}  // namespace ppcdom
