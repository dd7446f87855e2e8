#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ppcdom/estimator.hpp"
#include "ppcdom/keypoints.hpp"
#include "ppcdom/monitor.hpp"
#include "ppcdom/plant.hpp"
#include "ppcdom/scenario.hpp"

namespace ppcdom {

enum class Method { kPpcRbf, kBaselineRbf, kPpcBroyden, kBaselineBroyden };

Method parse_method(std::string_view name);
std::string to_string(Method method);
bool uses_barrier(Method method);
bool uses_rbf(Method method);

/// Deterministic, seed-independent part of a scenario: the equilibrated
/// plant, the tracked keypoints and the demonstrated targets.
struct ScenarioSetup {
  Plant initial;
  KeypointSet keypoints;
  std::vector<Eigen::VectorXd> targets;  // one per stage
};

/// Builds the mesh, attaches the grippers, settles the initial equilibrium,
/// samples keypoints in the region of interest and records the targets.
ScenarioSetup prepare(const Scenario& scenario);

/// Replays each stage's demonstration open-loop from the initial plant and
/// captures the keypoint features at every stage boundary.
std::vector<Eigen::VectorXd> record_target(const Scenario& scenario, const Plant& initial,
                                           const KeypointSet& keypoints);

/// Random-walk motor babbling: uniform twists bounded per channel, one
/// (x, u, pdot) sample per step. The plant is taken by value.
std::vector<BabbleSample> babble(Plant plant, const KeypointSet& keypoints, const Scenario& scenario,
                                 std::uint64_t seed);

struct RbfModel {
  RbfBasis basis;
  JacobianWeights weights;
};

/// k-means basis over the babbling inputs followed by the ridge prefit.
RbfModel fit_rbf(const std::vector<BabbleSample>& samples, const EstimatorSpec& spec, std::uint64_t seed);

/// Estimator input x = [c; p].
Eigen::VectorXd estimator_input(const Configuration& c, const Eigen::VectorXd& p);

struct StepRecord {
  int stage = 0;
  bool holding = false;  // inter-stage pause
  Eigen::VectorXd e;       // measured error
  Eigen::VectorXd e_true;  // noise-free error
  Eigen::VectorXd xi;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd mu0;     // envelope anchor values in force at this step
  Eigen::VectorXd t0;
  Twist u = Twist::Zero();
  double norm_e = 0.0;
  StabilityRecord stability;
};

struct RunLog {
  int channels = 0;
  double dt = 0.0;
  std::vector<StepRecord> steps;
};

struct RunResult {
  Method method = Method::kPpcRbf;
  std::uint64_t seed = 0;
  bool success = false;
  bool completed = true;       // false when the run stopped early
  std::string failure;         // reason when not successful
  double steady_state_error = 0.0;  // m, mean keypoint distance over the final window
  double final_error_inf = 0.0;     // m, noise-free
  double convergence_time = 0.0;    // s, summed over stages
  int violation_count = 0;
  int appendix_failures = 0;
  int negative_ze = 0;
  bool weights_clamped = false;
  double max_weight_norm_sq = 0.0;
  std::vector<double> stage_convergence;
  RunLog log;
};

/// Full closed loop: babble, fit, then staged control with funnel resets.
RunResult run(const Scenario& scenario, Method method, std::uint64_t seed);
RunResult run(const Scenario& scenario, const ScenarioSetup& setup, Method method, std::uint64_t seed);

struct Statistics {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

/// Linear-interpolation quantiles of the values.
Statistics describe(std::vector<double> values);

struct MethodSummary {
  Method method = Method::kPpcRbf;
  int runs = 0;
  double success_rate = 0.0;
  Statistics steady_state_error;
  Statistics convergence_time;
  int total_violations = 0;
  std::vector<RunResult> results;  // sorted by seed, logs dropped
};

struct ComparisonSummary {
  std::string scenario;
  double success_threshold = 0.0;
  double convergence_band = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<MethodSummary> methods;
};

/// Runs every (method, seed) pair, in parallel when threads > 1, and
/// aggregates per method in seed order.
ComparisonSummary compare(const Scenario& scenario, const std::vector<Method>& methods,
                          const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

}  // namespace ppcdom
