#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ppcdom/controller.hpp"
#include "ppcdom/mesh.hpp"
#include "ppcdom/plant.hpp"
#include "ppcdom/types.hpp"

namespace ppcdom {

/// Funnel parameters for the x, y and z error channels of every keypoint.
struct AxisEnvelopes {
  std::array<PerformanceEnvelope, 3> axis;

  /// Table I values of the sponge tasks ("task_a", "task_b", "task_c").
  static AxisEnvelopes preset(std::string_view name);
  /// One envelope per error channel for n keypoints, anchored at t0 = 0.
  std::vector<PerformanceEnvelope> expand(int keypoints) const;
  double max_mu_inf() const;
  double min_mu_inf() const;
};

struct DemoSegment {
  Twist twist = Twist::Zero();
  double duration = 0.0;  // s
};

struct StageSpec {
  AxisEnvelopes envelope;
  double duration = 30.0;  // s of closed-loop control
  std::vector<DemoSegment> demo;  // appended to the previous stages' demonstration
};

struct EstimatorSpec {
  int basis_size = 64;
  double width_scale = 1.5;
  double ridge = 1e-6;
  int babble_samples = 100;
  double babble_dt = -1.0;     // s; defaults to the control dt
  double babble_speed = -1.0;  // per-channel bound; defaults to the speed limit
  int kmeans_iterations = 100;
  double broyden_damping = 1.0;
};

struct ControllerSpec {
  double k1 = 2.0;
  double kz = 1.0;
  double k_eta = 0.5;
  double gamma = 0.0;
  double adaptation_rate = 1.0;
  double pinv_damping = 1e-3;
  double speed_limit = 0.03;

  ControllerGains gains(int channels) const;
};

struct Scenario {
  std::string name;
  MeshSpec mesh;
  SolverSettings solver;
  std::vector<int> left_nodes;
  std::vector<int> right_nodes;
  std::vector<int> roi_nodes;  // candidate keypoint nodes
  int keypoint_count = 6;
  int keypoint_start = 0;  // position inside roi_nodes where sampling starts
  ControllerSpec controller;
  EstimatorSpec estimator;
  std::vector<StageSpec> stages;
  double stage_pause = 5.0;  // s, hold with zero control between stages
  double dt = 0.05;          // s
  double noise_std = 0.0;    // m, sensing noise on keypoint coordinates
  double success_threshold = -1.0;   // m on |e|_inf; defaults to 1.5 max mu_inf
  double convergence_band = -1.0;    // m on |e|_inf; defaults to 0.5 min mu_inf
  double steady_window = 1.0;        // s averaged for the steady-state error

  double resolved_success_threshold() const;
  double resolved_convergence_band() const;
  /// Throws ConfigError describing the first offending field.
  void validate() const;
};

/// Parses a scenario document. `origin` prefixes error messages.
Scenario parse_scenario(std::string_view json_text, const std::string& origin = "scenario");

/// Loads a scenario from a JSON file, or a built-in preset when `path_or_name`
/// names one ("task_a", "task_b", "task_c") and no such file exists.
Scenario load_scenario(const std::string& path_or_name);

std::vector<std::string> builtin_scenario_names();
std::string builtin_scenario_text(std::string_view name);

}  // namespace ppcdom
