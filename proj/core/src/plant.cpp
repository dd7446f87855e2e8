#include "ppcdom/plant.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <string>

#include "ppcdom/error.hpp"

namespace ppcdom {

namespace {

// Tolerance used for the perturbed solves of the finite-difference oracle,
// so solver noise stays well below the O(h^2) truncation error.
constexpr double kOracleForceTolerance = 1e-11;

Eigen::Quaterniond exp_rotation(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle == 0.0) return Eigen::Quaterniond::Identity();
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, omega / angle));
}

}  // namespace

Vec3 GripperFrame::rotation_vector() const {
  const Eigen::AngleAxisd aa(orientation.normalized());
  return aa.angle() * aa.axis();
}

Plant::Plant(Mesh mesh, std::array<GripperFrame, 2> grippers, SolverSettings settings)
    : mesh_(std::move(mesh)), grippers_(std::move(grippers)), settings_(settings) {
  mesh_.validate();
  const int n = mesh_.node_count();
  std::vector<int> owner(n, -1);
  for (int g = 0; g < 2; ++g) {
    if (grippers_[g].attached.empty()) throw ConfigError("gripper has no attached nodes");
    grippers_[g].orientation.normalize();
    for (const Attachment& a : grippers_[g].attached) {
      if (a.node < 0 || a.node >= n) throw ConfigError("attached node index out of range");
      if (owner[a.node] != -1) throw ConfigError("gripper node sets overlap");
      owner[a.node] = g;
    }
  }
  dof_of_node_.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (owner[i] == -1) {
      dof_of_node_[i] = static_cast<int>(free_nodes_.size());
      free_nodes_.push_back(i);
    }
  }
  positions_ = mesh_.nodes;
  place_attached_nodes();
}

Configuration Plant::configuration() const {
  Configuration c;
  for (int g = 0; g < 2; ++g) {
    c.segment<3>(6 * g) = grippers_[g].position;
    c.segment<3>(6 * g + 3) = grippers_[g].rotation_vector();
  }
  return c;
}

void Plant::place_attached_nodes() {
  for (const GripperFrame& g : grippers_) {
    const Eigen::Matrix3d r = g.orientation.toRotationMatrix();
    for (const Attachment& a : g.attached) positions_.col(a.node) = g.position + r * a.offset;
  }
}

void Plant::step(const Twist& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (!u.allFinite()) throw std::invalid_argument("step: non-finite control");
  const auto saved_grippers = grippers_;
  const Eigen::Matrix3Xd saved_positions = positions_;
  for (int g = 0; g < 2; ++g) {
    grippers_[g].position += dt * u.segment<3>(6 * g);
    grippers_[g].orientation = (exp_rotation(dt * u.segment<3>(6 * g + 3)) * grippers_[g].orientation).normalized();
  }
  place_attached_nodes();
  try {
    solve_equilibrium();
  } catch (...) {
    grippers_ = saved_grippers;
    positions_ = saved_positions;
    throw;
  }
}

double Plant::energy_at(const Eigen::Matrix3Xd& x) const {
  double e = 0.0;
  for (const Spring& s : mesh_.springs) {
    const double stretch = (x.col(s.a) - x.col(s.b)).norm() - s.rest_length;
    e += 0.5 * s.stiffness * stretch * stretch;
  }
  if (settings_.node_mass > 0.0) {
    for (int i : free_nodes_) e -= settings_.node_mass * settings_.gravity.dot(x.col(i));
  }
  return e;
}

double Plant::elastic_energy() const {
  double e = 0.0;
  for (const Spring& s : mesh_.springs) {
    const double stretch = (positions_.col(s.a) - positions_.col(s.b)).norm() - s.rest_length;
    e += 0.5 * s.stiffness * stretch * stretch;
  }
  return e;
}

double Plant::total_energy() const { return energy_at(positions_); }

Eigen::Matrix3Xd Plant::forces() const { return forces_at(positions_); }

Eigen::Matrix3Xd Plant::forces_at(const Eigen::Matrix3Xd& x) const {
  Eigen::Matrix3Xd f = Eigen::Matrix3Xd::Zero(3, mesh_.node_count());
  for (const Spring& s : mesh_.springs) {
    const Vec3 d = x.col(s.a) - x.col(s.b);
    const double len = d.norm();
    if (len == 0.0) continue;
    const Vec3 fa = -s.stiffness * (len - s.rest_length) / len * d;
    f.col(s.a) += fa;
    f.col(s.b) -= fa;
  }
  for (int i = 0; i < mesh_.node_count(); ++i) {
    if (dof_of_node_[i] < 0) {
      f.col(i).setZero();
    } else if (settings_.node_mass > 0.0) {
      f.col(i) += settings_.node_mass * settings_.gravity;
    }
  }
  return f;
}

double Plant::residual() const { return residual_at(positions_); }

double Plant::residual_at(const Eigen::Matrix3Xd& x) const {
  const Eigen::Matrix3Xd f = forces_at(x);
  double worst = 0.0;
  for (int i : free_nodes_) worst = std::max(worst, f.col(i).norm());
  return worst;
}

SolveReport Plant::solve_equilibrium() {
  SolveReport report;
  const int dofs = 3 * static_cast<int>(free_nodes_.size());
  report.energy.push_back(total_energy());
  report.residual = residual();
  if (dofs == 0 || report.residual <= settings_.force_tolerance) return report;

  double k_max = 0.0;
  for (const Spring& s : mesh_.springs) k_max = std::max(k_max, s.stiffness);

  Eigen::VectorXd gradient(dofs);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh_.springs.size() * 36);
  Eigen::SparseMatrix<double> hessian(dofs, dofs);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

  const auto build = [&](bool project) {
    gradient.setZero();
    triplets.clear();
    for (const Spring& s : mesh_.springs) {
      const Vec3 d = positions_.col(s.a) - positions_.col(s.b);
      const double len = d.norm();
      if (len == 0.0) continue;
      const Vec3 dir = d / len;
      const Vec3 g = s.stiffness * (len - s.rest_length) * dir;
      double transverse = 1.0 - s.rest_length / len;
      if (project) transverse = std::max(transverse, 0.0);
      const Eigen::Matrix3d dd = dir * dir.transpose();
      const Eigen::Matrix3d block =
          s.stiffness * (dd + transverse * (Eigen::Matrix3d::Identity() - dd));
      const int da = dof_of_node_[s.a];
      const int db = dof_of_node_[s.b];
      if (da >= 0) gradient.segment<3>(3 * da) += g;
      if (db >= 0) gradient.segment<3>(3 * db) -= g;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          const double v = block(r, c);
          if (da >= 0) triplets.emplace_back(3 * da + r, 3 * da + c, v);
          if (db >= 0) triplets.emplace_back(3 * db + r, 3 * db + c, v);
          if (da >= 0 && db >= 0) {
            triplets.emplace_back(3 * da + r, 3 * db + c, -v);
            triplets.emplace_back(3 * db + r, 3 * da + c, -v);
          }
        }
      }
    }
    if (settings_.node_mass > 0.0) {
      for (int i : free_nodes_) {
        gradient.segment<3>(3 * dof_of_node_[i]) -= settings_.node_mass * settings_.gravity;
      }
    }
    hessian.setFromTriplets(triplets.begin(), triplets.end());
  };

  const auto factor = [&](double shift) {
    Eigen::SparseMatrix<double> shifted = hessian;
    if (shift > 0.0) {
      Eigen::SparseMatrix<double> id(dofs, dofs);
      id.setIdentity();
      shifted += shift * id;
    }
    ldlt.compute(shifted);
    return ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
  };

  double energy = report.energy.back();
  Eigen::Matrix3Xd trial = positions_;
  for (int iter = 1; iter <= settings_.max_iterations; ++iter) {
    report.iterations = iter;

    build(false);
    bool ok = factor(0.0);
    if (!ok) {
      build(true);
      double shift = 1e-9 * k_max;
      for (int attempt = 0; attempt < 12 && !ok; ++attempt, shift *= 10.0) ok = factor(shift);
    }
    Eigen::VectorXd direction = ok ? Eigen::VectorXd(-ldlt.solve(gradient)) : Eigen::VectorXd(-gradient);
    double slope = gradient.dot(direction);
    if (!(slope < 0.0) || !direction.allFinite()) {
      direction = -gradient;
      slope = -gradient.squaredNorm();
    }

    const auto place = [&](double step) {
      trial = positions_;
      for (std::size_t f = 0; f < free_nodes_.size(); ++f) {
        trial.col(free_nodes_[f]) += step * direction.segment<3>(3 * static_cast<Eigen::Index>(f));
      }
      return energy_at(trial);
    };

    // Full Newton step when it halves the residual without raising the energy
    // beyond round-off; energy differences alone are unresolvable near the
    // solution.
    bool accepted = false;
    double trial_energy = energy;
    if (ok) {
      trial_energy = place(1.0);
      const double floor = 1e-13 * (std::abs(energy) + 1e-12);
      accepted = trial_energy <= energy + floor && residual_at(trial) < 0.5 * report.residual;
    }
    // Otherwise backtrack on the total energy.
    for (double step = 1.0; !accepted && step > 1e-18; step *= 0.5) {
      trial_energy = place(step);
      accepted = trial_energy <= energy + 1e-4 * step * slope;
    }
    if (!accepted) break;

    positions_.swap(trial);
    energy = trial_energy;
    report.energy.push_back(energy);
    report.residual = residual();
    if (report.residual <= settings_.force_tolerance) return report;
  }
  report.residual = residual();
  if (report.residual <= settings_.force_tolerance) return report;
  char message[96];
  std::snprintf(message, sizeof message, "equilibrium solver stopped at residual %.3e N after %d iterations",
                report.residual, report.iterations);
  throw SolverDivergence(message, report.residual, report.iterations);
}

Plant attach_grippers(Mesh mesh, std::span<const int> left, std::span<const int> right,
                      SolverSettings settings) {
  const int n = mesh.node_count();
  std::array<GripperFrame, 2> grippers;
  std::set<int> used;
  const std::array<std::span<const int>, 2> sets{left, right};
  for (int g = 0; g < 2; ++g) {
    if (sets[g].empty()) throw ConfigError("gripper node set is empty");
    Vec3 centroid = Vec3::Zero();
    for (int node : sets[g]) {
      if (node < 0 || node >= n) throw ConfigError("gripper node index out of range");
      if (!used.insert(node).second) throw ConfigError("gripper node sets overlap or repeat");
      centroid += mesh.nodes.col(node);
    }
    centroid /= static_cast<double>(sets[g].size());
    grippers[g].position = centroid;
    for (int node : sets[g]) grippers[g].attached.push_back({node, mesh.nodes.col(node) - centroid});
  }
  return Plant(std::move(mesh), std::move(grippers), settings);
}

Eigen::VectorXd stack_nodes(const Eigen::Matrix3Xd& positions, std::span<const int> nodes) {
  Eigen::VectorXd p(3 * static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int node = nodes[k];
    if (node < 0 || node >= positions.cols()) throw std::out_of_range("keypoint index out of range");
    p.segment<3>(3 * static_cast<Eigen::Index>(k)) = positions.col(node);
  }
  return p;
}

Eigen::MatrixXd finite_difference_jacobian(const Plant& plant, std::span<const int> keypoints,
                                           double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_jacobian: h must be positive");
  Plant base = plant;
  SolverSettings tight = base.settings();
  tight.force_tolerance = std::min(tight.force_tolerance, kOracleForceTolerance);
  tight.max_iterations = std::max(tight.max_iterations, 500);
  base.set_settings(tight);
  base.solve_equilibrium();

  Eigen::MatrixXd jac(3 * static_cast<Eigen::Index>(keypoints.size()), kControlDim);
  for (int j = 0; j < kControlDim; ++j) {
    const Twist e = Twist::Unit(j);
    Plant plus = base;
    plus.step(h * e, 1.0);
    Plant minus = base;
    minus.step(-h * e, 1.0);
    jac.col(j) = (stack_nodes(plus.positions(), keypoints) - stack_nodes(minus.positions(), keypoints)) / (2.0 * h);
  }
  return jac;
}

}  // namespace ppcdom
