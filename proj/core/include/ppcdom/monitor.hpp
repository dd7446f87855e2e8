#pragma once

#include <Eigen/Core>
#include <vector>

#include "ppcdom/controller.hpp"

namespace ppcdom {

/// Barrier Lyapunov value from both transfer ratios and the sign selector
/// S_i (1 for e_i > 0): sum S_i/2 ln(1/(1-xi_b^2)) + (1-S_i)/2 ln(1/(1-xi_a^2)).
/// Throws BarrierViolation when an active ratio reaches 1.
double barrier_v1(const Eigen::VectorXd& xi_lower, const Eigen::VectorXd& xi_upper, const Eigen::VectorXi& signs);

/// Same value from the active transfer errors: sum 1/2 ln(1/(1-xi_i^2)).
double barrier_v1(const Eigen::VectorXd& xi);

/// ln(1/(1-v^{2y})) < v^{2y}/(1-v^{2y}). Throws std::domain_error unless
/// 0 < v < 1 and y >= 1.
bool lemma1_check(double v, int y);

struct ViolationReport {
  int count = 0;
  double worst_margin = 0.0;  // min over channels of distance to the nearer bound; negative when outside
  std::vector<int> channels;
};

/// Flags every channel with e_i <= lower_i or e_i >= upper_i.
ViolationReport check_bounds(const Eigen::VectorXd& e, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// -eta z e - xi^2/(1-xi^2) * mu_dot/mu.
double appendix_lhs(double xi, double e, double z, double eta, double mu, double mu_dot);
/// appendix_lhs(...) <= 0.
bool appendix_inequality_check(double xi, double e, double z, double eta, double mu, double mu_dot);

struct EstimationResidual {
  double absolute = 0.0;  // |(J_hat - J_ref) u|
  double relative = 0.0;  // absolute / |J_ref u|, +inf when J_ref u = 0
};

/// Velocity-prediction error of an estimate against a reference Jacobian.
EstimationResidual estimation_residual(const Eigen::MatrixXd& j_hat, const Eigen::MatrixXd& j_ref, const Twist& u);

struct StabilityRecord {
  double t = 0.0;
  double v1 = 0.0;               // +inf when outside the funnel
  double weight_norm_sq = 0.0;   // sum |W|_F^2
  double max_xi = 0.0;
  double min_upper_margin = 0.0;  // min(upper - e)
  double min_lower_margin = 0.0;  // min(e - lower)
  int violations = 0;
  bool appendix_ok = true;
  double min_ze = 0.0;           // min z_i e_i
  bool weights_clamped = false;
};

StabilityRecord log_step(double t, const Eigen::VectorXd& e, const TransferState& transfer, double weight_norm_sq,
                         bool weights_clamped = false);

}  // namespace ppcdom
