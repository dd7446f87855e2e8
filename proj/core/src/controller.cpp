#include "ppcdom/controller.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ppcdom/error.hpp"

namespace ppcdom {

void PerformanceEnvelope::validate() const {
  if (!(mu_inf > 0.0)) throw ConfigError("envelope mu_inf must be positive");
  if (!(mu0 > mu_inf)) throw ConfigError("envelope mu0 must exceed mu_inf");
  if (!(alpha > 0.0)) throw ConfigError("envelope alpha must be positive");
  if (!(delta > 0.0)) throw ConfigError("envelope delta must be positive");
}

EnvelopeValue PerformanceEnvelope::value(double t) const {
  if (t < t0) throw std::domain_error("envelope evaluated before its anchor time");
  const double decay = std::exp(-alpha * (t - t0));
  return {(mu0 - mu_inf) * decay + mu_inf, -alpha * (mu0 - mu_inf) * decay};
}

Boundaries PerformanceEnvelope::boundaries(double t) const {
  const double bound = delta * value(t).mu;
  return {-bound, bound};
}

double transfer_error(double e, double lower, double upper) { return e > 0.0 ? e / upper : e / lower; }

double barrier_variable(double e, double lower, double upper, int channel) {
  const double xi = transfer_error(e, lower, upper);
  if (!(xi < 1.0)) {
    throw BarrierViolation("error channel " + std::to_string(channel) + " left its funnel (xi = " +
                               std::to_string(xi) + ")",
                           channel, xi);
  }
  if (e == 0.0) return 0.0;
  const double phi = e > 0.0 ? upper : lower;
  return e / (phi * phi * (1.0 - xi * xi));
}

Eigen::VectorXd z_vector(const Eigen::VectorXd& e, std::span<const PerformanceEnvelope> envelopes, double t) {
  if (static_cast<std::size_t>(e.size()) != envelopes.size()) {
    throw std::invalid_argument("z_vector: one envelope per error channel required");
  }
  Eigen::VectorXd z(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const Boundaries b = envelopes[static_cast<std::size_t>(i)].boundaries(t);
    z[i] = barrier_variable(e[i], b.lower, b.upper, static_cast<int>(i));
  }
  return z;
}

double eta_gain(const PerformanceEnvelope& envelope, double t, double k_eta) {
  if (!(k_eta > 0.0)) throw std::invalid_argument("eta_gain: k_eta must be positive");
  const EnvelopeValue v = envelope.value(t);
  const double rate = v.mu_dot / v.mu;  // identical for both boundaries
  return std::sqrt(2.0 * rate * rate + k_eta);
}

ControllerGains ControllerGains::uniform(int channels, double k1, double kz, double k_eta, double speed_limit) {
  ControllerGains g;
  g.k1 = Eigen::VectorXd::Constant(channels, k1);
  g.kz = Eigen::VectorXd::Constant(channels, kz);
  g.k_eta = k_eta;
  g.speed_limit = speed_limit;
  return g;
}

void ControllerGains::validate(int channels) const {
  if (k1.size() != channels || kz.size() != channels) throw ConfigError("gain diagonals must have one entry per channel");
  if (!(k1.array() > 0.0).all()) throw ConfigError("K1 diagonal must be positive");
  if (!(kz.array() > 0.0).all()) throw ConfigError("Kz diagonal must be positive");
  if (!(k_eta > 0.0)) throw ConfigError("K_eta must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (!(adaptation_rate >= 0.0)) throw ConfigError("adaptation rate must be non-negative");
  if (!(pinv_damping >= 0.0)) throw ConfigError("pseudo-inverse damping must be non-negative");
  if (!(speed_limit > 0.0)) throw ConfigError("speed limit must be positive");
}

Eigen::MatrixXd damped_pseudo_inverse(const Eigen::MatrixXd& jacobian, double lambda) {
  if (!jacobian.allFinite()) throw std::invalid_argument("damped_pseudo_inverse: non-finite Jacobian");
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? s[0] * 1e-12 * static_cast<double>(std::max(jacobian.rows(), jacobian.cols())) : 0.0;
  Eigen::VectorXd inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (lambda > 0.0) {
      inv[i] = s[i] / (s[i] * s[i] + lambda * lambda);
    } else {
      inv[i] = s[i] > cutoff ? 1.0 / s[i] : 0.0;
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Twist clamp_speed(const Twist& u, double limit) {
  const double peak = u.cwiseAbs().maxCoeff();
  if (peak <= limit) return u;
  return u * (limit / peak);
}

Twist control(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& e, const Eigen::VectorXd& z,
              const Eigen::VectorXd& eta, const ControllerGains& gains) {
  if (!z.allFinite()) throw std::invalid_argument("control: barrier variable is not finite");
  const Eigen::VectorXd demand = (gains.k1 + eta).cwiseProduct(e) + gains.kz.cwiseProduct(z);
  const Twist u = -damped_pseudo_inverse(jacobian, gains.pinv_damping) * demand;
  return clamp_speed(u, gains.speed_limit);
}

Twist baseline_control(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& e, const ControllerGains& gains) {
  const Twist u = -damped_pseudo_inverse(jacobian, gains.pinv_damping) * gains.k1.cwiseProduct(e);
  return clamp_speed(u, gains.speed_limit);
}

void reset_stage(std::vector<PerformanceEnvelope>& envelopes, const Eigen::VectorXd& e, double t_now,
                 std::span<const double> configured_mu0) {
  if (static_cast<std::size_t>(e.size()) != envelopes.size() || configured_mu0.size() != envelopes.size()) {
    throw std::invalid_argument("reset_stage: dimension mismatch");
  }
  for (std::size_t i = 0; i < envelopes.size(); ++i) {
    PerformanceEnvelope& env = envelopes[i];
    env.t0 = t_now;
    env.mu0 = std::max(configured_mu0[i], std::abs(e[static_cast<Eigen::Index>(i)]) / env.delta * kResetMargin);
  }
}

TransferState evaluate_transfer(const Eigen::VectorXd& e, std::span<const PerformanceEnvelope> envelopes, double t,
                                double k_eta) {
  const Eigen::Index n = e.size();
  if (static_cast<std::size_t>(n) != envelopes.size()) {
    throw std::invalid_argument("evaluate_transfer: one envelope per error channel required");
  }
  TransferState s;
  s.xi.resize(n);
  s.z.resize(n);
  s.eta.resize(n);
  s.lower.resize(n);
  s.upper.resize(n);
  s.mu.resize(n);
  s.mu_dot.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PerformanceEnvelope& env = envelopes[static_cast<std::size_t>(i)];
    const EnvelopeValue v = env.value(t);
    s.mu[i] = v.mu;
    s.mu_dot[i] = v.mu_dot;
    s.lower[i] = -env.delta * v.mu;
    s.upper[i] = env.delta * v.mu;
    s.xi[i] = transfer_error(e[i], s.lower[i], s.upper[i]);
    s.eta[i] = eta_gain(env, t, k_eta);
    if (s.xi[i] < 1.0) {
      s.z[i] = barrier_variable(e[i], s.lower[i], s.upper[i], static_cast<int>(i));
    } else {
      s.z[i] = std::numeric_limits<double>::quiet_NaN();
      s.inside = false;
    }
  }
  return s;
}

}  // namespace ppcdom
