#include "ppcdom/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppcdom/error.hpp"

namespace ppcdom {

namespace {

double barrier_term(double xi, int channel) {
  if (!(std::abs(xi) < 1.0)) throw BarrierViolation("transfer error reached the barrier", channel, xi);
  return -0.5 * std::log1p(-xi * xi);
}

}  // namespace

double barrier_v1(const Eigen::VectorXd& xi_lower, const Eigen::VectorXd& xi_upper, const Eigen::VectorXi& signs) {
  if (xi_lower.size() != xi_upper.size() || signs.size() != xi_upper.size()) {
    throw std::invalid_argument("barrier_v1: dimension mismatch");
  }
  double v = 0.0;
  for (Eigen::Index i = 0; i < signs.size(); ++i) {
    v += signs[i] == 1 ? barrier_term(xi_upper[i], static_cast<int>(i)) : barrier_term(xi_lower[i], static_cast<int>(i));
  }
  return v;
}

double barrier_v1(const Eigen::VectorXd& xi) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) v += barrier_term(xi[i], static_cast<int>(i));
  return v;
}

bool lemma1_check(double v, int y) {
  if (!(v > 0.0 && v < 1.0) || y < 1) throw std::domain_error("lemma1_check: need 0 < v < 1 and y >= 1");
  const double u = std::pow(v, 2 * y);
  // rhs - lhs = u/(1-u) + ln(1-u); for small u both sides round to u, so sum
  // the series sum_{k>=2} (k-1)/k u^k instead.
  double gap = 0.0;
  if (u < 1e-3) {
    double term = u;
    for (int k = 2; k < 12; ++k) {
      term *= u;
      gap += (k - 1.0) / k * term;
    }
  } else {
    gap = u / (1.0 - u) + std::log1p(-u);
  }
  return gap > 0.0;
}

ViolationReport check_bounds(const Eigen::VectorXd& e, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  ViolationReport r;
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double margin = std::min(upper[i] - e[i], e[i] - lower[i]);
    r.worst_margin = std::min(r.worst_margin, margin);
    if (e[i] <= lower[i] || e[i] >= upper[i]) {
      ++r.count;
      r.channels.push_back(static_cast<int>(i));
    }
  }
  return r;
}

double appendix_lhs(double xi, double e, double z, double eta, double mu, double mu_dot) {
  const double barrier = xi * xi / (1.0 - xi * xi);
  return -eta * z * e - barrier * (mu_dot / mu);
}

bool appendix_inequality_check(double xi, double e, double z, double eta, double mu, double mu_dot) {
  return appendix_lhs(xi, e, z, eta, mu, mu_dot) <= 0.0;
}

EstimationResidual estimation_residual(const Eigen::MatrixXd& j_hat, const Eigen::MatrixXd& j_ref, const Twist& u) {
  if (j_hat.rows() != j_ref.rows() || j_hat.cols() != kControlDim || j_ref.cols() != kControlDim)
    throw std::invalid_argument("estimation_residual: Jacobian shapes differ");
  EstimationResidual r;
  r.absolute = ((j_hat - j_ref) * u).norm();
  const double ref = (j_ref * u).norm();
  r.relative = ref > 0.0 ? r.absolute / ref : std::numeric_limits<double>::infinity();
  return r;
}

StabilityRecord log_step(double t, const Eigen::VectorXd& e, const TransferState& transfer, double weight_norm_sq,
                         bool weights_clamped) {
  StabilityRecord r;
  r.t = t;
  r.weight_norm_sq = weight_norm_sq;
  r.weights_clamped = weights_clamped;
  r.max_xi = e.size() > 0 ? transfer.xi.maxCoeff() : 0.0;
  r.min_upper_margin = e.size() > 0 ? (transfer.upper - e).minCoeff() : 0.0;
  r.min_lower_margin = e.size() > 0 ? (e - transfer.lower).minCoeff() : 0.0;
  r.violations = check_bounds(e, transfer.lower, transfer.upper).count;
  if (r.violations > 0) {
    r.v1 = std::numeric_limits<double>::infinity();
    r.appendix_ok = false;
    r.min_ze = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.v1 = barrier_v1(transfer.xi);
  r.min_ze = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    r.min_ze = std::min(r.min_ze, transfer.z[i] * e[i]);
    if (!appendix_inequality_check(transfer.xi[i], e[i], transfer.z[i], transfer.eta[i], transfer.mu[i],
                                   transfer.mu_dot[i])) {
      r.appendix_ok = false;
    }
  }
  if (e.size() == 0) r.min_ze = 0.0;
  return r;
}

}  // namespace ppcdom
