#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "ppcdom/types.hpp"

namespace ppcdom {

struct EnvelopeValue {
  double mu = 0.0;      // m
  double mu_dot = 0.0;  // m/s
};

struct Boundaries {
  double lower = 0.0;  // -delta * mu
  double upper = 0.0;  // +delta * mu
};

/// Exponentially shrinking error funnel of one channel:
/// mu(t) = (mu0 - mu_inf) exp(-alpha (t - t0)) + mu_inf, bounds +-delta mu(t).
struct PerformanceEnvelope {
  double mu0 = 0.1;
  double mu_inf = 0.01;
  double alpha = 0.2;
  double delta = 1.0;
  double t0 = 0.0;

  /// Throws ConfigError unless mu0 > mu_inf > 0, alpha > 0, delta > 0.
  void validate() const;
  /// Throws std::domain_error for t < t0.
  EnvelopeValue value(double t) const;
  Boundaries boundaries(double t) const;
};

/// Error normalised by its active boundary: e/upper for e > 0, else e/lower.
/// Lies in [0, 1) exactly when e is strictly inside the funnel.
double transfer_error(double e, double lower, double upper);

/// Barrier variable xi^2 / ((1 - xi^2) e), evaluated in the form
/// e / (phi^2 (1 - xi^2)) with phi the active boundary. Throws
/// BarrierViolation when xi >= 1.
double barrier_variable(double e, double lower, double upper, int channel = 0);

/// Barrier variables of all channels at time t.
Eigen::VectorXd z_vector(const Eigen::VectorXd& e, std::span<const PerformanceEnvelope> envelopes, double t);

/// Time-varying gain sqrt((dphi_a/phi_a)^2 + (dphi_b/phi_b)^2 + k_eta)
/// = sqrt(2 (mu_dot/mu)^2 + k_eta).
double eta_gain(const PerformanceEnvelope& envelope, double t, double k_eta);

struct ControllerGains {
  Eigen::VectorXd k1;  // diagonal, 3n
  Eigen::VectorXd kz;  // diagonal, 3n
  double k_eta = 0.5;
  double gamma = 0.0;          // adaptive leak, 1/s
  double adaptation_rate = 1.0;
  double pinv_damping = 1e-3;
  double speed_limit = 0.03;   // per channel

  static ControllerGains uniform(int channels, double k1, double kz, double k_eta, double speed_limit);
  /// Throws ConfigError on non-positive diagonals or limits.
  void validate(int channels) const;
};

/// J^T (J J^T + lambda^2 I)^-1, computed through an SVD so lambda = 0 gives
/// the Moore-Penrose inverse.
Eigen::MatrixXd damped_pseudo_inverse(const Eigen::MatrixXd& jacobian, double lambda);

/// Scales the whole vector so that no channel exceeds limit.
Twist clamp_speed(const Twist& u, double limit);

/// u = -pinv(J) [(K1 + diag(eta)) e + Kz z], then clamped.
Twist control(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& e, const Eigen::VectorXd& z,
              const Eigen::VectorXd& eta, const ControllerGains& gains);

/// u = -pinv(J) K1 e, then clamped.
Twist baseline_control(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& e, const ControllerGains& gains);

/// Re-anchors every envelope at t_now and widens mu0 so that the current
/// error starts strictly inside: mu0 = max(configured, |e_i| / delta * 1.1).
void reset_stage(std::vector<PerformanceEnvelope>& envelopes, const Eigen::VectorXd& e, double t_now,
                 std::span<const double> configured_mu0);

inline constexpr double kResetMargin = 1.1;

/// Everything the controller and the monitor need about one time instant.
/// z holds NaN for channels outside their funnel.
struct TransferState {
  Eigen::VectorXd xi;
  Eigen::VectorXd z;
  Eigen::VectorXd eta;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd mu;
  Eigen::VectorXd mu_dot;
  bool inside = true;
};

TransferState evaluate_transfer(const Eigen::VectorXd& e, std::span<const PerformanceEnvelope> envelopes, double t,
                                double k_eta);

}  // namespace ppcdom
